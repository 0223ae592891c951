#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parcel {

enum class ErrorKind {
  NotFound,
  Unwritable,
  UnsupportedFormat,
  Corrupt,
  BadMagic,
  Truncated,
  DimensionOverflow,
  ShapeMismatch,
  InvalidValue,
  InvalidArgument,
  MissingTile,
  NotThin,
};

std::string_view to_string(ErrorKind kind);

// I/O-class errors map to exit status 2 in the CLI, everything else to 1.
bool is_io_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace parcel
