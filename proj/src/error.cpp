#include "parcel_trace/error.hpp"

namespace parcel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Unwritable: return "unwritable";
    case ErrorKind::UnsupportedFormat: return "unsupported format";
    case ErrorKind::Corrupt: return "corrupt";
    case ErrorKind::BadMagic: return "bad magic";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::DimensionOverflow: return "dimension overflow";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::InvalidValue: return "invalid value";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::MissingTile: return "missing tile";
    case ErrorKind::NotThin: return "not thin";
  }
  return "unknown";
}

bool is_io_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound:
    case ErrorKind::Unwritable:
    case ErrorKind::UnsupportedFormat:
    case ErrorKind::Corrupt:
    case ErrorKind::BadMagic:
    case ErrorKind::Truncated:
    case ErrorKind::DimensionOverflow:
    case ErrorKind::MissingTile:
      return true;
    default:
      return false;
  }
}

}  // namespace parcel
