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

#ifndef MCS_WEIGHTING_HPP_
#define MCS_WEIGHTING_HPP_

// Source weights that minimize the generalization bound.
//
// Each source i gets a coefficient c_i (the inverse square root of its
// "signal to noise" ratio). The bound is proportional to sqrt(sum w_i^2 c_i^2)
// and over the simplex that quadratic is minimized by w_i ~ c_i^-2, where it
// equals H(c_1^2, ..., c_N^2) / N with H the harmonic mean.

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "mcs/error.hpp"
#include "mcs/losses.hpp"

namespace mcs {

enum class Setting { kCommon, kVaryingPriors, kLlp };

inline const char* setting_name(Setting s) {
  switch (s) {
    case Setting::kCommon: return "common";
    case Setting::kVaryingPriors: return "varying_priors";
    case Setting::kLlp: return "llp";
  }
  return "?";
}

struct SourceStats {
  long n = 1;
  std::optional<NoiseRates> rho;
  std::optional<double> pi;
  // Raw (gamma+, gamma-). Equal values are allowed here and give an infinite
  // coefficient; such sources are dropped by source_weights.
  std::optional<std::pair<double, double>> gamma;
};

struct WeightVector {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }

  void validate() const {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InputError("weights must be nonnegative");
      sum += w;
    }
    if (weights.empty() || std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "weights must sum to 1, got " << sum;
      throw InputError(os.str());
    }
  }
};

inline double snr_coefficient(const SourceStats& s, Setting setting) {
  if (s.n < 1) throw InputError("source sample size must be at least 1");
  const double root_n = std::sqrt(static_cast<double>(s.n));
  switch (setting) {
    case Setting::kCommon:
      if (!s.rho) throw InputError("common setting needs noise rates");
      return noise_factor(*s.rho) / root_n;
    case Setting::kVaryingPriors: {
      if (!s.rho || !s.pi) throw InputError("varying-priors setting needs noise rates and a class prior");
      const double pi = *s.pi;
      if (!(pi > 0.0 && pi < 1.0)) throw InputError("class prior must lie in (0,1)");
      return noise_factor(*s.rho) / root_n / std::min(pi, 1.0 - pi);
    }
    case Setting::kLlp: {
      if (!s.gamma) throw InputError("llp setting needs label proportions");
      const double gap = s.gamma->first - s.gamma->second;
      if (gap < 0.0) throw InputError("llp source needs gamma+ >= gamma-");
      if (gap == 0.0) return std::numeric_limits<double>::infinity();
      return 1.0 / std::sqrt(static_cast<double>(s.n) * gap * gap);
    }
  }
  return 0.0;
}

inline WeightVector optimal_weights(std::span<const double> c) {
  if (c.empty()) throw InputError("need at least one source");
  std::vector<double> inv(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0) || !std::isfinite(c[i])) {
      throw InputError("source coefficients must be positive and finite");
    }
    inv[i] = 1.0 / (c[i] * c[i]);
  }
  const double total = std::accumulate(inv.begin(), inv.end(), 0.0);
  for (double& v : inv) v /= total;
  return {std::move(inv)};
}

inline WeightVector uniform_weights(std::size_t n) {
  if (n == 0) throw InputError("need at least one source");
  return {std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

inline double weighted_quadratic(const WeightVector& w, std::span<const double> c) {
  if (w.size() != c.size()) throw InputError("weights and coefficients differ in length");
  double q = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) q += w[i] * w[i] * c[i] * c[i];
  return q;
}

inline double arithmetic_mean(std::span<const double> v) {
  if (v.empty()) throw InputError("mean of an empty sequence");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double harmonic_mean(std::span<const double> v) {
  if (v.empty()) throw InputError("mean of an empty sequence");
  double s = 0.0;
  for (double x : v) {
    if (!(x > 0.0)) throw InputError("harmonic mean needs positive values");
    s += 1.0 / x;
  }
  return static_cast<double>(v.size()) / s;
}

// A(c^2) / H(c^2) for N sources of size n, the first N - 1 with symmetric
// noise `low_noise` and the last with `high_noise`.
inline double mean_ratio(int num_sources, long n, double low_noise, double high_noise) {
  std::vector<double> c2;
  for (int i = 0; i < num_sources; ++i) {
    const double r = (i + 1 < num_sources) ? low_noise : high_noise;
    const double c = snr_coefficient({n, NoiseRates{r, r}, {}, {}}, Setting::kCommon);
    c2.push_back(c * c);
  }
  return arithmetic_mean(c2) / harmonic_mean(c2);
}

// Ten sources of 100 points, nine with 1% symmetric noise and one with 49%.
inline double mean_ratio_illustration() { return mean_ratio(10, 100, 0.01, 0.49); }

// Bound-optimal weights for a set of sources. Sources with an infinite
// coefficient (zero-gap bag pairs) get weight 0 and the rest are
// renormalized. Throws if nothing is left.
inline WeightVector source_weights(std::span<const SourceStats> sources, Setting setting) {
  std::vector<double> c;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const double ci = snr_coefficient(sources[i], setting);
    if (std::isfinite(ci)) {
      c.push_back(ci);
      kept.push_back(i);
    }
  }
  if (kept.empty()) throw InputError("no usable sources: every source has an infinite coefficient");
  const WeightVector wk = optimal_weights(c);
  std::vector<double> w(sources.size(), 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k) w[kept[k]] = wk[k];
  return {std::move(w)};
}

}  // namespace mcs

#endif  // MCS_WEIGHTING_HPP_
