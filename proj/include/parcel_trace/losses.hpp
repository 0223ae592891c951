#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "parcel_trace/raster.hpp"

namespace parcel {

enum class LossKind {
  Jaccard,
  Dice,
  Tversky,
  Focal,
  JaccardPlusFocal,
  DicePlusFocal,
  TverskyPlusFocal,
};

inline constexpr LossKind kAllLossKinds[] = {
    LossKind::Jaccard,          LossKind::Dice,          LossKind::Tversky,
    LossKind::Focal,            LossKind::JaccardPlusFocal,
    LossKind::DicePlusFocal,    LossKind::TverskyPlusFocal,
};

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::JaccardPlusFocal;
  double epsilon = 1e-6;
  double focal_gamma = 2.0;
  double focal_alpha = 1.0;
  double tversky_alpha = 0.3;
  double tversky_beta = 0.7;
  double region_weight = 1.0;
  double focal_weight = 1.0;

  void validate() const;
};

/// A probability tensor that is exactly one-hot at every pixel.
class OneHotTarget {
 public:
  explicit OneHotTarget(ProbTensor t);
  static OneHotTarget from_mask(const ClassMask& mask);

  const ProbTensor& tensor() const noexcept { return t_; }

 private:
  ProbTensor t_;
};

/// Per-pixel softmax with max subtraction.
ProbTensor softmax(const ProbTensor& logits);

/// Loss of probabilities `p` against `g`. Region losses are macro-averaged
/// over channels; focal is averaged over pixels.
double loss_eval(const ProbTensor& p, const OneHotTarget& g, const LossConfig& cfg);

/// Gradient of loss_eval(softmax(logits), g) with respect to the logits.
ProbTensor loss_grad(const ProbTensor& logits, const OneHotTarget& g,
                     const LossConfig& cfg);

/// Max relative error between loss_grad and central differences of
/// loss_eval(softmax(.)) with the given step. Denominators are floored at 1e-8.
double finite_diff_check(const ProbTensor& logits, const OneHotTarget& g,
                         const LossConfig& cfg, double step);

}  // namespace parcel
