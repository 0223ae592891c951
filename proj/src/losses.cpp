#include "parcel_trace/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace parcel {
namespace {

enum class Region { None, Jaccard, Dice, Tversky };

struct Composition {
  Region region = Region::None;
  bool focal = false;
  double region_weight = 1.0;
  double focal_weight = 1.0;
};

Composition compose(const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::Jaccard: return {Region::Jaccard, false, 1.0, 0.0};
    case LossKind::Dice: return {Region::Dice, false, 1.0, 0.0};
    case LossKind::Tversky: return {Region::Tversky, false, 1.0, 0.0};
    case LossKind::Focal: return {Region::None, true, 0.0, 1.0};
    case LossKind::JaccardPlusFocal:
      return {Region::Jaccard, true, cfg.region_weight, cfg.focal_weight};
    case LossKind::DicePlusFocal:
      return {Region::Dice, true, cfg.region_weight, cfg.focal_weight};
    case LossKind::TverskyPlusFocal:
      return {Region::Tversky, true, cfg.region_weight, cfg.focal_weight};
  }
  return {};
}

struct ClassSums {
  double intersection = 0.0;  // sum p*g
  double predicted = 0.0;     // sum p
  double target = 0.0;        // sum g
};

std::vector<ClassSums> class_sums(const ProbTensor& p, const ProbTensor& g) {
  std::vector<ClassSums> sums(p.channels());
  const auto pv = p.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    ClassSums& s = sums[i % p.channels()];
    s.intersection += pv[i] * gv[i];
    s.predicted += pv[i];
    s.target += gv[i];
  }
  return sums;
}

// Per-class ratio N/D of the region score and its partial derivatives with
// respect to a single p value, split by whether g is 0 or 1 at that entry:
// dN/dp = n1 * g, dD/dp = d0 + d1 * g.
struct RegionTerm {
  double numerator = 0.0;
  double denominator = 0.0;
  double n1 = 0.0;
  double d0 = 0.0;
  double d1 = 0.0;
};

RegionTerm region_term(Region region, const ClassSums& s, const LossConfig& cfg) {
  const double eps = cfg.epsilon;
  switch (region) {
    case Region::Jaccard:
      // (I + eps) / (P + G - I + eps)
      return {s.intersection + eps, s.predicted + s.target - s.intersection + eps, 1.0, 1.0,
              -1.0};
    case Region::Dice:
      // (2I + 2eps) / (P + G + 2eps), i.e. (I + eps) / ((P + G)/2 + eps)
      return {2.0 * s.intersection + 2.0 * eps, s.predicted + s.target + 2.0 * eps, 2.0, 1.0,
              0.0};
    case Region::Tversky: {
      // (I + eps) / (I + a(P - I) + b(G - I) + eps)
      const double a = cfg.tversky_alpha;
      const double b = cfg.tversky_beta;
      const double fp = s.predicted - s.intersection;
      const double fn = s.target - s.intersection;
      return {s.intersection + eps, s.intersection + a * fp + b * fn + eps, 1.0, a,
              1.0 - a - b};
    }
    case Region::None: break;
  }
  return {};
}

double region_loss(Region region, const std::vector<ClassSums>& sums, const LossConfig& cfg) {
  if (sums.empty()) return 0.0;
  double mean = 0.0;
  for (const ClassSums& s : sums) {
    const RegionTerm t = region_term(region, s, cfg);
    mean += t.numerator / t.denominator;
  }
  return 1.0 - mean / static_cast<double>(sums.size());
}

double focal_loss(const ProbTensor& p, const ProbTensor& g, const LossConfig& cfg) {
  const std::size_t pixels = p.height() * p.width();
  if (pixels == 0) return 0.0;
  double total = 0.0;
  const auto pv = p.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (gv[i] == 0.0) continue;
    total += cfg.focal_alpha * gv[i] * std::pow(1.0 - pv[i], cfg.focal_gamma) *
             std::log(pv[i] + cfg.epsilon);
  }
  return -total / static_cast<double>(pixels);
}

// d/dp of (1-p)^gamma * ln(p + eps).
double focal_term_derivative(double p, double gamma, double eps) {
  const double q = 1.0 - p;
  double lead = 0.0;
  if (gamma != 0.0) {
    double q_pow = 0.0;
    if (gamma == 1.0) {
      q_pow = 1.0;
    } else if (q > 0.0) {
      q_pow = std::pow(q, gamma - 1.0);
    }
    lead = -gamma * q_pow * std::log(p + eps);
  }
  return lead + std::pow(q, gamma) / (p + eps);
}

// Gradient of the configured loss with respect to the probabilities.
ProbTensor probability_gradient(const ProbTensor& p, const ProbTensor& g,
                                const LossConfig& cfg) {
  const Composition comp = compose(cfg);
  ProbTensor grad(p.height(), p.width(), p.channels());
  auto gradv = grad.values();
  const auto pv = p.values();
  const auto gv = g.values();
  const std::size_t channels = p.channels();

  if (comp.region != Region::None && channels > 0) {
    const auto sums = class_sums(p, g);
    std::vector<RegionTerm> terms;
    for (const ClassSums& s : sums) terms.push_back(region_term(comp.region, s, cfg));
    const double scale = -comp.region_weight / static_cast<double>(channels);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const RegionTerm& t = terms[i % channels];
      const double dn = t.n1 * gv[i];
      const double dd = t.d0 + t.d1 * gv[i];
      gradv[i] += scale * (dn * t.denominator - t.numerator * dd) /
                  (t.denominator * t.denominator);
    }
  }
  if (comp.focal) {
    const std::size_t pixels = p.height() * p.width();
    if (pixels > 0) {
      const double scale = -comp.focal_weight * cfg.focal_alpha / static_cast<double>(pixels);
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (gv[i] == 0.0) continue;
        gradv[i] += scale * gv[i] * focal_term_derivative(pv[i], cfg.focal_gamma, cfg.epsilon);
      }
    }
  }
  return grad;
}

void check_shapes(const ProbTensor& p, const OneHotTarget& g) {
  if (!p.same_shape(g.tensor())) {
    throw Error(ErrorKind::ShapeMismatch,
                "prediction is " + std::to_string(p.height()) + "x" + std::to_string(p.width()) +
                    "x" + std::to_string(p.channels()) + ", target is " +
                    std::to_string(g.tensor().height()) + "x" +
                    std::to_string(g.tensor().width()) + "x" +
                    std::to_string(g.tensor().channels()));
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Jaccard: return "jaccard";
    case LossKind::Dice: return "dice";
    case LossKind::Tversky: return "tversky";
    case LossKind::Focal: return "focal";
    case LossKind::JaccardPlusFocal: return "jaccard+focal";
    case LossKind::DicePlusFocal: return "dice+focal";
    case LossKind::TverskyPlusFocal: return "tversky+focal";
  }
  return "jaccard+focal";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (LossKind k : kAllLossKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void LossConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "loss epsilon must be > 0");
  if (!(focal_gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "focal gamma must be >= 0");
  if (!(tversky_alpha >= 0.0 && tversky_beta >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "Tversky alpha and beta must be >= 0");
  }
  if (!(focal_alpha >= 0.0 && region_weight >= 0.0 && focal_weight >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "loss weights must be >= 0");
  }
}

OneHotTarget::OneHotTarget(ProbTensor t) : t_(std::move(t)) {
  for (std::size_t r = 0; r < t_.height(); ++r) {
    for (std::size_t c = 0; c < t_.width(); ++c) {
      int ones = 0;
      for (double v : t_.pixel(r, c)) {
        if (v == 1.0) {
          ++ones;
        } else if (v != 0.0) {
          ones = -1;
          break;
        }
      }
      if (ones != 1) {
        throw Error(ErrorKind::InvalidValue, "target is not one-hot at (" + std::to_string(r) +
                                                 ", " + std::to_string(c) + ")");
      }
    }
  }
}

OneHotTarget OneHotTarget::from_mask(const ClassMask& mask) { return OneHotTarget(one_hot(mask)); }

ProbTensor softmax(const ProbTensor& logits) {
  logits.validate_finite();
  ProbTensor out(logits.height(), logits.width(), logits.channels(),
                 TensorKind::Probabilities);
  for (std::size_t r = 0; r < logits.height(); ++r) {
    for (std::size_t c = 0; c < logits.width(); ++c) {
      auto in = logits.pixel(r, c);
      auto dst = out.pixel(r, c);
      if (in.empty()) continue;
      const double mx = *std::max_element(in.begin(), in.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        dst[k] = std::exp(in[k] - mx);
        sum += dst[k];
      }
      for (double& v : dst) v /= sum;
    }
  }
  return out;
}

double loss_eval(const ProbTensor& p, const OneHotTarget& g, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(p, g);
  p.validate_probabilities();
  const Composition comp = compose(cfg);
  double loss = 0.0;
  if (comp.region != Region::None) {
    loss += comp.region_weight * region_loss(comp.region, class_sums(p, g.tensor()), cfg);
  }
  if (comp.focal) loss += comp.focal_weight * focal_loss(p, g.tensor(), cfg);
  return loss;
}

ProbTensor loss_grad(const ProbTensor& logits, const OneHotTarget& g, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(logits, g);
  const ProbTensor p = softmax(logits);
  const ProbTensor dp = probability_gradient(p, g.tensor(), cfg);
  // Softmax Jacobian: dL/dz_k = p_k (dL/dp_k - sum_j p_j dL/dp_j).
  ProbTensor dz(logits.height(), logits.width(), logits.channels(), TensorKind::Logits);
  for (std::size_t r = 0; r < p.height(); ++r) {
    for (std::size_t c = 0; c < p.width(); ++c) {
      auto pp = p.pixel(r, c);
      auto gp = dp.pixel(r, c);
      auto out = dz.pixel(r, c);
      double dot = 0.0;
      for (std::size_t k = 0; k < pp.size(); ++k) dot += pp[k] * gp[k];
      for (std::size_t k = 0; k < pp.size(); ++k) out[k] = pp[k] * (gp[k] - dot);
    }
  }
  return dz;
}

double finite_diff_check(const ProbTensor& logits, const OneHotTarget& g, const LossConfig& cfg,
                         double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be > 0");
  if (logits.size() == 0) return 0.0;
  const ProbTensor analytic = loss_grad(logits, g, cfg);
  ProbTensor probe = logits;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe.values()[i];
    probe.values()[i] = saved + step;
    const double up = loss_eval(softmax(probe), g, cfg);
    probe.values()[i] = saved - step;
    const double down = loss_eval(softmax(probe), g, cfg);
    probe.values()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.values()[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace parcel
