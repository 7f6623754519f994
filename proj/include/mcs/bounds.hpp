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

#ifndef MCS_BOUNDS_HPP_
#define MCS_BOUNDS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mcs/data_io.hpp"
#include "mcs/error.hpp"
#include "mcs/kernel.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/losses.hpp"
#include "mcs/rng.hpp"
#include "mcs/weighting.hpp"

namespace mcs {

struct BoundInputs {
  double R = 1.0;
  double K = 1.0;
  double L = 1.0;
  double phi0 = std::log(2.0);
  double delta = 0.05;
  WeightVector weights;
  std::vector<SourceStats> sources;
};

// Per-source Lipschitz constant and value at zero of the loss actually used.
struct LossConstants {
  long n = 1;
  double lipschitz = 1.0;
  double zero = 0.0;
};

namespace detail {

inline double log_term(double delta) { return std::log(2.0 / delta) / 2.0; }

inline void check_common(const BoundInputs& in) {
  if (!(in.K > 0.0) || !(in.L > 0.0) || !(in.phi0 >= 0.0)) {
    throw InputError("bound needs K > 0, L > 0 and phi(0) >= 0");
  }
  if (in.sources.empty()) throw InputError("bound needs at least one source");
  if (in.weights.size() != in.sources.size()) throw InputError("one weight per source is required");
  in.weights.validate();
  for (const SourceStats& s : in.sources) {
    if (s.n < 1) throw InputError("source sample sizes must be positive");
  }
}

inline void check_theorem_range(const BoundInputs& in, double r_factor) {
  check_common(in);
  const double r_min = r_factor * in.phi0 / (in.K * in.L);
  if (!(in.R > r_min)) {
    std::ostringstream os;
    os << "precondition R > " << (r_factor == 1.0 ? "" : "2*") << "phi(0)/(K*L) violated: R = " << in.R
       << ", threshold = " << r_min;
    throw InputError(os.str());
  }
  if (!(in.delta > 0.0 && in.delta <= 0.25)) {
    std::ostringstream os;
    os << "precondition 0 < delta <= 1/4 violated: delta = " << in.delta;
    throw InputError(os.str());
  }
}

inline double min_prior(const SourceStats& s) {
  if (!s.pi) throw InputError("varying-priors bound needs a class prior on every source");
  const double pi = *s.pi;
  if (!(pi > 0.0 && pi < 1.0)) throw InputError("class prior must lie in (0,1)");
  return std::min(pi, 1.0 - pi);
}

inline GammaPair retained_gamma(const SourceStats& s) {
  if (!s.gamma) throw InputError("llp bound needs label proportions on every source");
  const GammaPair g{s.gamma->first, s.gamma->second};
  if (g.plus == g.minus) throw InputError("llp bound: a retained source has gamma+ = gamma-");
  g.validate();
  return g;
}

}  // namespace detail

// Summands under the square root, without the log factor.
inline std::vector<double> bound_terms(const BoundInputs& in, Setting setting) {
  std::vector<double> t(in.sources.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const SourceStats& s = in.sources[i];
    const double w2n = in.weights[i] * in.weights[i] / static_cast<double>(s.n);
    switch (setting) {
      case Setting::kCommon: {
        if (!s.rho) throw InputError("common-noise bound needs noise rates on every source");
        const double f = noise_factor(*s.rho);
        t[i] = w2n * f * f;
        break;
      }
      case Setting::kVaryingPriors: {
        if (!s.rho) throw InputError("varying-priors bound needs noise rates on every source");
        const double f = noise_factor(*s.rho) / detail::min_prior(s);
        t[i] = w2n * f * f;
        break;
      }
      case Setting::kLlp: {
        const double g = detail::retained_gamma(s).gap();
        t[i] = w2n / (g * g);
        break;
      }
    }
  }
  return t;
}

namespace detail {

inline double term_sum(const BoundInputs& in, Setting setting) {
  double sum = 0.0;
  for (double v : bound_terms(in, setting)) sum += v;
  return sum;
}

}  // namespace detail

inline double bound_common(const BoundInputs& in) {
  detail::check_theorem_range(in, 1.0);
  return 4.0 * in.K * in.R * in.L * std::sqrt(detail::term_sum(in, Setting::kCommon) * detail::log_term(in.delta));
}

inline double bound_varying_priors(const BoundInputs& in) {
  detail::check_theorem_range(in, 2.0);
  const double c = 2.0 * in.K * in.R * in.L * std::sqrt(detail::log_term(in.delta));
  return c * std::sqrt(detail::term_sum(in, Setting::kVaryingPriors));
}

inline double bound_llp(const BoundInputs& in) {
  detail::check_theorem_range(in, 1.0);
  return 4.0 * in.K * in.R * in.L * std::sqrt(detail::term_sum(in, Setting::kLlp) * detail::log_term(in.delta));
}

inline double bound_for(const BoundInputs& in, Setting setting) {
  switch (setting) {
    case Setting::kCommon:
      return bound_common(in);
    case Setting::kVaryingPriors:
      return bound_varying_priors(in);
    case Setting::kLlp:
      return bound_llp(in);
  }
  return 0.0;
}

inline double bound_master(double R, double K, double delta, const WeightVector& weights,
                           const std::vector<LossConstants>& sources) {
  if (!(R > 0.0)) throw InputError("master bound needs R > 0");
  if (!(K > 0.0)) throw InputError("master bound needs K > 0");
  if (!(delta > 0.0 && delta <= 1.0)) {
    std::ostringstream os;
    os << "master bound needs 0 < delta <= 1, got " << delta;
    throw InputError(os.str());
  }
  if (weights.size() != sources.size() || sources.empty()) throw InputError("one weight per source is required");
  weights.validate();
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const LossConstants& s = sources[i];
    if (s.n < 1) throw InputError("source sample sizes must be positive");
    const double w2n = weights[i] * weights[i] / static_cast<double>(s.n);
    a += w2n * s.lipschitz * s.lipschitz;
    const double c = s.zero + s.lipschitz * K * R;
    b += w2n * c * c;
  }
  return 2.0 * K * R * std::sqrt(a) + std::sqrt(b * detail::log_term(delta));
}

// Constants of the corrected loss used in each setting, from the base loss's
// Lipschitz constant and phi(0).
inline std::vector<LossConstants> master_constants(const BoundInputs& in, Setting setting) {
  std::vector<LossConstants> out;
  for (const SourceStats& s : in.sources) {
    LossConstants c;
    c.n = s.n;
    switch (setting) {
      case Setting::kCommon:
        if (!s.rho) throw InputError("common-noise bound needs noise rates on every source");
        c.lipschitz = lipschitz_constant_bound(in.L, *s.rho);
        c.zero = zero_value_bound(in.phi0, *s.rho);
        break;
      case Setting::kVaryingPriors: {
        if (!s.rho) throw InputError("varying-priors bound needs noise rates on every source");
        detail::min_prior(s);
        const CostPair alpha{1.0 / (2.0 * *s.pi), 1.0 / (2.0 * (1.0 - *s.pi))};
        c.lipschitz = lipschitz_constant_bound(in.L, *s.rho, alpha);
        c.zero = zero_value_bound(in.phi0, *s.rho, alpha);
        break;
      }
      case Setting::kLlp: {
        const GammaPair g = detail::retained_gamma(s);
        c.lipschitz = lipschitz_constant_bound(in.L, g);
        c.zero = zero_value_bound(in.phi0, g);
        break;
      }
    }
    out.push_back(c);
  }
  return out;
}

inline double bound_master(const BoundInputs& in, Setting setting) {
  return bound_master(in.R, in.K, in.delta, in.weights, master_constants(in, setting));
}

// Bound-optimal weights plugged in, with c0 a floor on the per-source noise
// margin.
inline double bound_optimal_consistency_form(const std::vector<SourceStats>& sources, double c0, double R,
                                             double K, double L, double delta) {
  if (!(c0 > 0.0)) throw InputError("consistency form needs c0 > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("consistency form needs 0 < delta <= 1");
  double total = 0.0;
  for (const SourceStats& s : sources) {
    if (s.n < 1) throw InputError("source sample sizes must be positive");
    total += static_cast<double>(s.n);
  }
  if (!(total > 0.0)) throw InputError("consistency form needs at least one sample");
  return 8.0 * K * R * L / c0 * std::sqrt(detail::log_term(delta) / total);
}

struct CoverageSpec {
  GaussianPair data{2, 4.0};
  KernelSpec kernel{1.0};
  int num_pairs = 20;
  long bag_size = 32;
  double R = 1.0;
  double delta = 0.05;
  int trials = 200;
  int probes = 50;
  int anchors = 20;
  long holdout_per_class = 50000;
  MarginLoss loss = MarginLoss::logistic();
  std::uint64_t seed = 0;
};

struct CoverageResult {
  double coverage = 0.0;
  double bound = 0.0;
  std::vector<GammaPair> gammas;
  WeightVector weights;
  // Max over probes of |weighted corrected empirical risk - balanced risk|, per trial.
  std::vector<double> deviations;
};

// Random function in the ball of radius R: Gaussian coefficients on anchors
// drawn from the even mixture, rescaled so that ||f||^2 = R^2.
inline KernelModel random_ball_function(const GaussianPair& data, const KernelSpec& kernel, int anchors, double R,
                                        Rng& rng) {
  const Sampler pos = data.positive();
  const Sampler neg = data.negative();
  KernelModel f;
  f.kernel = kernel;
  f.anchors.resize(anchors, data.dim);
  f.coefficients.resize(anchors);
  for (int a = 0; a < anchors; ++a) {
    f.anchors.row(a) = (rng.bernoulli(0.5) ? pos(rng) : neg(rng)).transpose();
    f.coefficients[a] = rng.normal();
  }
  const double norm2 = rkhs_norm_sq(f);
  if (!(norm2 > 0.0)) throw std::logic_error("degenerate probe function");
  f.coefficients *= R / std::sqrt(norm2);
  return f;
}

// Monte-Carlo check of the bag-pair bound: the fraction of trials in which no
// probe function deviates by more than the bound.
inline CoverageResult empirical_coverage(const CoverageSpec& spec) {
  if (spec.trials < 1 || spec.probes < 1 || spec.num_pairs < 1 || spec.bag_size < 1 || spec.anchors < 1) {
    throw InputError("coverage needs positive trials, probes, pairs, bag size and anchors");
  }
  spec.kernel.validate();
  CoverageResult out;
  Rng setup(derive_seed(spec.seed, 0));

  for (int i = 0; i < spec.num_pairs; ++i) {
    GammaPair g;
    do {
      g.plus = setup.uniform(0.5, 1.0);
      g.minus = setup.uniform(0.0, 0.5);
    } while (!(g.plus > g.minus));
    out.gammas.push_back(g);
  }
  std::vector<SourceStats> stats;
  for (const GammaPair& g : out.gammas) {
    SourceStats s;
    s.n = 2 * spec.bag_size;
    s.gamma = std::make_pair(g.plus, g.minus);
    stats.push_back(s);
  }
  out.weights = source_weights(stats, Setting::kLlp);
  BoundInputs in;
  in.R = spec.R;
  in.K = spec.kernel.bound();
  in.L = spec.loss.lipschitz();
  in.phi0 = spec.loss.value_at_zero();
  in.delta = spec.delta;
  in.weights = out.weights;
  in.sources = stats;
  out.bound = bound_llp(in);

  std::vector<KernelModel> probes;
  for (int p = 0; p < spec.probes; ++p) {
    probes.push_back(random_ball_function(spec.data, spec.kernel, spec.anchors, spec.R, setup));
  }

  // Balanced risk 1/2 E+[phi(f)] + 1/2 E-[phi(-f)], shared by every pair,
  // estimated once on a large clean holdout.
  Rng hold(derive_seed(spec.seed, 1));
  const Sampler pos = spec.data.positive();
  const Sampler neg = spec.data.negative();
  Points hp(spec.holdout_per_class, spec.data.dim);
  Points hn(spec.holdout_per_class, spec.data.dim);
  for (long j = 0; j < spec.holdout_per_class; ++j) {
    hp.row(j) = pos(hold).transpose();
    hn.row(j) = neg(hold).transpose();
  }
  std::vector<double> true_risk(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Eigen::VectorXd fp = evaluate_all(probes[p], hp);
    const Eigen::VectorXd fn = evaluate_all(probes[p], hn);
    double sp = 0.0;
    double sn = 0.0;
    for (long j = 0; j < spec.holdout_per_class; ++j) {
      sp += spec.loss.value(fp[j], 1);
      sn += spec.loss.value(fn[j], -1);
    }
    true_risk[p] = 0.5 * (sp + sn) / static_cast<double>(spec.holdout_per_class);
  }

  long covered = 0;
  for (int trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(trial));
    std::vector<double> risk(probes.size(), 0.0);
    for (int i = 0; i < spec.num_pairs; ++i) {
      const SampledBagPair s = sample_bag_pair(pos, neg, out.gammas[i], spec.bag_size, spec.bag_size,
                                               derive_seed(trial_seed, static_cast<std::uint64_t>(i)));
      const double scale = out.weights[i] / static_cast<double>(s.pair.n());
      const LossMix mp = llp_mix(out.gammas[i], 1);
      const LossMix mn = llp_mix(out.gammas[i], -1);
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const Eigen::VectorXd fp = evaluate_all(probes[p], s.pair.pos_bag.instances);
        const Eigen::VectorXd fn = evaluate_all(probes[p], s.pair.neg_bag.instances);
        double r = 0.0;
        for (Eigen::Index j = 0; j < fp.size(); ++j) r += mp.apply(spec.loss, fp[j]);
        for (Eigen::Index j = 0; j < fn.size(); ++j) r += mn.apply(spec.loss, fn[j]);
        risk[p] += scale * r;
      }
    }
    double dev = 0.0;
    for (std::size_t p = 0; p < probes.size(); ++p) dev = std::max(dev, std::abs(risk[p] - true_risk[p]));
    out.deviations.push_back(dev);
    covered += dev <= out.bound;
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(spec.trials);
  return out;
}

}  // namespace mcs

#endif  // MCS_BOUNDS_HPP_
