// Copyright 2026 The mcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCS_LOSSES_HPP_
#define MCS_LOSSES_HPP_

// Margin losses and the corrections built on top of them.
//
// A margin loss is l(t, y) = phi(y * t). Given label noise rates
// rho = (rho+, rho-) (rho+ is the chance a true +1 is reported as -1) the
// corrected loss l^rho is the linear recombination of l(t, 1) and l(t, -1)
// whose expectation over the noisy label equals the clean loss. Cost
// weights alpha = (alpha+, alpha-) scale the two classes. Every corrected
// loss here is therefore of the form
//
//   on_pos * l(t, 1) + on_neg * l(t, -1)
//
// and LossMix carries those two coefficients. Corrected values can be
// negative; nothing in this library clamps them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace mcs {

enum class LossKind { kLogistic, kSquared, kHuber, kCustom };

class MarginLoss {
 public:
  using ScalarFn = std::function<double(double)>;

  static MarginLoss logistic() {
    MarginLoss l(LossKind::kLogistic, "logistic");
    l.lipschitz_ = 1.0;
    l.value_at_zero_ = std::log(2.0);
    return l;
  }

  // phi(m) = (1 - m)^2. Not globally Lipschitz, so lipschitz() is +inf.
  static MarginLoss squared() {
    MarginLoss l(LossKind::kSquared, "squared");
    l.lipschitz_ = std::numeric_limits<double>::infinity();
    l.value_at_zero_ = 1.0;
    return l;
  }

  // Huberized margin loss with a quadratic zone |m| <= width:
  //   phi(m) = 0                    for m >= width
  //          = (width - m)^2 / width for |m| <= width
  //          = -4 m                  for m <= -width
  // width = 1 is the modified Huber loss. phi'' is even, so the corrected
  // loss stays convex.
  static MarginLoss huber(double width = 1.0) {
    if (!(width > 0.0) || !std::isfinite(width)) {
      throw InputError("huber width must be positive and finite");
    }
    MarginLoss l(LossKind::kHuber, "huber");
    l.width_ = width;
    l.lipschitz_ = 4.0;
    l.value_at_zero_ = width;
    return l;
  }

  // User-supplied margin function. second_derivative may be empty, in which
  // case second-order queries throw UnsupportedError.
  static MarginLoss custom(std::string name, ScalarFn phi, ScalarFn dphi,
                           ScalarFn d2phi, double lipschitz) {
    MarginLoss l(LossKind::kCustom, std::move(name));
    l.phi_ = std::move(phi);
    l.dphi_ = std::move(dphi);
    l.d2phi_ = std::move(d2phi);
    l.lipschitz_ = lipschitz;
    l.value_at_zero_ = l.phi_(0.0);
    return l;
  }

  static MarginLoss from_name(const std::string& name, double huber_width = 1.0) {
    if (name == "logistic") return logistic();
    if (name == "squared") return squared();
    if (name == "huber") return huber(huber_width);
    throw InputError("unknown loss '" + name + "' (expected logistic, squared or huber)");
  }

  LossKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double width() const { return width_; }
  double lipschitz() const { return lipschitz_; }
  double value_at_zero() const { return value_at_zero_; }

  double phi(double m) const {
    switch (kind_) {
      case LossKind::kLogistic:
        // log(1 + exp(-m)) without overflow.
        return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
      case LossKind::kSquared:
        return (1.0 - m) * (1.0 - m);
      case LossKind::kHuber:
        if (m >= width_) return 0.0;
        if (m <= -width_) return -4.0 * m;
        return (width_ - m) * (width_ - m) / width_;
      case LossKind::kCustom:
        return phi_(m);
    }
    return 0.0;
  }

  double dphi(double m) const {
    switch (kind_) {
      case LossKind::kLogistic:
        // -1 / (1 + exp(m))
        return m > 0.0 ? -std::exp(-m) / (1.0 + std::exp(-m)) : -1.0 / (1.0 + std::exp(m));
      case LossKind::kSquared:
        return -2.0 * (1.0 - m);
      case LossKind::kHuber:
        if (m >= width_) return 0.0;
        if (m <= -width_) return -4.0;
        return -2.0 * (width_ - m) / width_;
      case LossKind::kCustom:
        return dphi_(m);
    }
    return 0.0;
  }

  bool has_second_derivative() const { return kind_ != LossKind::kCustom || static_cast<bool>(d2phi_); }

  double d2phi(double m) const {
    switch (kind_) {
      case LossKind::kLogistic: {
        const double e = std::exp(-std::abs(m));
        return e / ((1.0 + e) * (1.0 + e));
      }
      case LossKind::kSquared:
        return 2.0;
      case LossKind::kHuber:
        return std::abs(m) <= width_ ? 2.0 / width_ : 0.0;
      case LossKind::kCustom:
        if (!d2phi_) throw UnsupportedError("loss '" + name_ + "' has no second derivative");
        return d2phi_(m);
    }
    return 0.0;
  }

  // l(t, y) and its first two derivatives in t.
  double value(double t, int y) const { return phi(y * t); }
  double deriv(double t, int y) const { return y * dphi(y * t); }
  double second(double t, int y) const { return d2phi(y * t); }

 private:
  MarginLoss(LossKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  LossKind kind_;
  std::string name_;
  double width_ = 1.0;
  double lipschitz_ = 0.0;
  double value_at_zero_ = 0.0;
  ScalarFn phi_, dphi_, d2phi_;
};

// Smallest accepted 1 - rho+ - rho-. The divisor appears in every corrected
// formula.
inline constexpr double kMinNoiseMargin = 1e-9;

struct NoiseRates {
  double plus = 0.0;   // P(report -1 | true +1)
  double minus = 0.0;  // P(report +1 | true -1)

  double margin() const { return 1.0 - plus - minus; }

  void validate() const {
    if (!(plus >= 0.0 && plus < 1.0) || !(minus >= 0.0 && minus < 1.0)) {
      std::ostringstream os;
      os << "noise rates must lie in [0,1), got (" << plus << ", " << minus << ")";
      throw InputError(os.str());
    }
    if (margin() < kMinNoiseMargin) {
      std::ostringstream os;
      os << "noise rates need rho+ + rho- < 1, got " << plus << " + " << minus;
      throw InputError(os.str());
    }
  }
};

struct CostPair {
  double plus = 1.0;
  double minus = 1.0;

  double max() const { return std::max(plus, minus); }

  void validate() const {
    if (!(plus > 0.0) || !(minus > 0.0) || !std::isfinite(plus) || !std::isfinite(minus)) {
      throw InputError("cost weights must be positive and finite");
    }
  }
};

// Label proportions (gamma+, gamma-) of an oriented bag pair.
struct GammaPair {
  double plus = 1.0;
  double minus = 0.0;

  double gap() const { return plus - minus; }

  void validate() const {
    if (!(minus >= 0.0) || !(plus <= 1.0)) {
      throw InputError("label proportions must lie in [0,1]");
    }
    if (!(plus > minus)) {
      std::ostringstream os;
      os << "need gamma+ > gamma-, got (" << plus << ", " << minus << ")";
      throw InputError(os.str());
    }
  }
};

struct LossMix {
  double on_pos = 0.0;  // coefficient of l(t, 1)
  double on_neg = 0.0;  // coefficient of l(t, -1)

  double apply(const MarginLoss& loss, double t) const {
    return on_pos * loss.phi(t) + on_neg * loss.phi(-t);
  }
  double apply_deriv(const MarginLoss& loss, double t) const {
    return on_pos * loss.dphi(t) - on_neg * loss.dphi(-t);
  }
  double apply_second(const MarginLoss& loss, double t) const {
    return on_pos * loss.d2phi(t) + on_neg * loss.d2phi(-t);
  }
};

inline void check_label(int y) {
  if (y != 1 && y != -1) throw InputError("labels must be +1 or -1");
}

// (l_alpha)^rho: costs first, then the noise correction.
inline LossMix corrected_cost_mix(const CostPair& alpha, const NoiseRates& rho, int y) {
  rho.validate();
  alpha.validate();
  check_label(y);
  const double d = rho.margin();
  if (y == 1) return {(1.0 - rho.minus) * alpha.plus / d, -rho.plus * alpha.minus / d};
  return {-rho.minus * alpha.plus / d, (1.0 - rho.plus) * alpha.minus / d};
}

// The same loss written directly in the bag proportions of a pair.
inline LossMix llp_mix(const GammaPair& gamma, int y) {
  gamma.validate();
  check_label(y);
  const double g = gamma.gap();
  if (y == 1) return {(1.0 - gamma.minus) / g, -gamma.minus / g};
  return {-(1.0 - gamma.plus) / g, gamma.plus / g};
}

inline double corrected_loss(const MarginLoss& loss, const NoiseRates& rho, double t, int y) {
  return corrected_cost_mix(CostPair{}, rho, y).apply(loss, t);
}

inline double cost_sensitive_loss(const MarginLoss& loss, const CostPair& alpha, double t, int y) {
  alpha.validate();
  check_label(y);
  return (y == 1 ? alpha.plus : alpha.minus) * loss.value(t, y);
}

inline double corrected_cost_loss(const MarginLoss& loss, const CostPair& alpha,
                                  const NoiseRates& rho, double t, int y) {
  return corrected_cost_mix(alpha, rho, y).apply(loss, t);
}

inline double llp_corrected_form(const MarginLoss& loss, const GammaPair& gamma, double t, int y) {
  return llp_mix(gamma, y).apply(loss, t);
}

inline double corrected_cost_grad(const MarginLoss& loss, const CostPair& alpha,
                                  const NoiseRates& rho, double t, int y) {
  return corrected_cost_mix(alpha, rho, y).apply_deriv(loss, t);
}

inline double llp_corrected_grad(const MarginLoss& loss, const GammaPair& gamma, double t, int y) {
  return llp_mix(gamma, y).apply_deriv(loss, t);
}

// Average of the corrected loss over `samples` independent flips of a clean
// label y, flipped with probability rho+ (y = 1) or rho- (y = -1).
inline double flipped_label_mean(const MarginLoss& loss, const NoiseRates& rho, double t, int y, long samples,
                                 std::uint64_t seed) {
  rho.validate();
  check_label(y);
  if (samples < 1) throw InputError("need at least one sample");
  Rng rng(seed);
  const double p = y == 1 ? rho.plus : rho.minus;
  long flips = 0;
  for (long s = 0; s < samples; ++s) flips += rng.uniform() < p;
  const double kept = static_cast<double>(samples - flips);
  return (kept * corrected_loss(loss, rho, t, y) + static_cast<double>(flips) * corrected_loss(loss, rho, t, -y)) /
         static_cast<double>(samples);
}

// Loss constants used by the generalization bounds. Each one bounds either the
// Lipschitz constant |l'| or the value at zero |l'|_0 = max_y l'(0, y) of a
// corrected loss l', given the Lipschitz constant and phi(0) of the base loss.

inline double noise_factor(const NoiseRates& rho) {
  rho.validate();
  return (1.0 + std::abs(rho.plus - rho.minus)) / rho.margin();
}

inline double lipschitz_constant_bound(double lipschitz, const NoiseRates& rho) {
  return lipschitz * noise_factor(rho);
}
inline double lipschitz_constant_bound(double lipschitz, const NoiseRates& rho, const CostPair& alpha) {
  alpha.validate();
  return lipschitz * noise_factor(rho) * alpha.max();
}
inline double lipschitz_constant_bound(double lipschitz, const GammaPair& gamma) {
  gamma.validate();
  return lipschitz / gamma.gap();
}

inline double zero_value_bound(double phi0, const NoiseRates& rho) {
  rho.validate();
  return phi0;
}
inline double zero_value_bound(double phi0, const NoiseRates& rho, const CostPair& alpha) {
  rho.validate();
  alpha.validate();
  return 2.0 * phi0 * alpha.max() / rho.margin();
}
inline double zero_value_bound(double phi0, const GammaPair& gamma) {
  gamma.validate();
  return phi0 / gamma.gap();
}

inline double lipschitz_constant_bound(const MarginLoss& loss, const NoiseRates& rho) {
  return lipschitz_constant_bound(loss.lipschitz(), rho);
}
inline double lipschitz_constant_bound(const MarginLoss& loss, const NoiseRates& rho, const CostPair& alpha) {
  return lipschitz_constant_bound(loss.lipschitz(), rho, alpha);
}
inline double lipschitz_constant_bound(const MarginLoss& loss, const GammaPair& gamma) {
  return lipschitz_constant_bound(loss.lipschitz(), gamma);
}
inline double zero_value_bound(const MarginLoss& loss, const NoiseRates& rho) {
  return zero_value_bound(loss.value_at_zero(), rho);
}
inline double zero_value_bound(const MarginLoss& loss, const NoiseRates& rho, const CostPair& alpha) {
  return zero_value_bound(loss.value_at_zero(), rho, alpha);
}
inline double zero_value_bound(const MarginLoss& loss, const GammaPair& gamma) {
  return zero_value_bound(loss.value_at_zero(), gamma);
}

// True iff l''(t, 1) == l''(t, -1) on t = -5, -4.9, ..., 5 to 1e-10.
inline bool check_second_order_condition(const MarginLoss& loss) {
  if (!loss.has_second_derivative()) {
    throw UnsupportedError("loss '" + loss.name() + "' has no second derivative");
  }
  for (int k = -50; k <= 50; ++k) {
    const double t = k / 10.0;
    if (std::abs(loss.second(t, 1) - loss.second(t, -1)) > 1e-10) return false;
  }
  return true;
}

}  // namespace mcs

#endif  // MCS_LOSSES_HPP_
