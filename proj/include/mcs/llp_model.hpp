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

#ifndef MCS_LLP_MODEL_HPP_
#define MCS_LLP_MODEL_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcs/error.hpp"
#include "mcs/kernel.hpp"
#include "mcs/losses.hpp"
#include "mcs/matching.hpp"
#include "mcs/rng.hpp"
#include "mcs/weighting.hpp"

namespace mcs {

struct Bag {
  std::string id;
  Points instances;
  double gamma = 0.0;
  // +1/-1 per instance; only known when the bags were simulated.
  std::optional<std::vector<int>> hidden_labels;

  long size() const { return static_cast<long>(instances.rows()); }

  long positive_count() const {
    long c = 0;
    for (int y : *hidden_labels) c += (y == 1);
    return c;
  }

  void validate() const {
    if (instances.rows() == 0) throw InputError("bag '" + id + "' is empty");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("bag '" + id + "' has a proportion outside [0,1]");
    if (hidden_labels) {
      if (static_cast<long>(hidden_labels->size()) != size()) {
        throw InputError("bag '" + id + "' has a label count different from its size");
      }
      for (int y : *hidden_labels) check_label(y);
      if (gamma != static_cast<double>(positive_count()) / static_cast<double>(size())) {
        throw InputError("bag '" + id + "' proportion disagrees with its labels");
      }
    }
  }
};

struct BagPair {
  Bag pos_bag;
  Bag neg_bag;
  double gamma_plus = 1.0;
  double gamma_minus = 0.0;
  // Equal proportions: no signal, the pair is dropped from training.
  bool zero_gap = false;
  int pos_index = -1;
  int neg_index = -1;

  long n_plus() const { return pos_bag.size(); }
  long n_minus() const { return neg_bag.size(); }
  long n() const { return n_plus() + n_minus(); }
  GammaPair gammas() const { return {gamma_plus, gamma_minus}; }

  void validate() const {
    pos_bag.validate();
    neg_bag.validate();
    if (gamma_plus != pos_bag.gamma || gamma_minus != neg_bag.gamma) {
      throw InputError("bag pair proportions disagree with its bags");
    }
    if (!zero_gap && !(gamma_plus > gamma_minus)) throw InputError("bag pair needs gamma+ > gamma-");
  }
};

struct PairDerived {
  double pi = 0.5;
  NoiseRates rho;
  CostPair alpha;
};

inline PairDerived derive(const GammaPair& g) {
  g.validate();
  PairDerived d;
  const double s = g.plus + g.minus;
  d.pi = s / 2.0;
  d.rho.plus = g.minus / s;
  d.rho.minus = (1.0 - g.plus) / (2.0 - s);
  d.alpha.plus = 1.0 / s;
  d.alpha.minus = 1.0 / (2.0 - s);
  return d;
}

inline PairDerived derive(const BagPair& pair) {
  if (pair.zero_gap) throw InputError("cannot derive noise rates for a zero-gap pair");
  return derive(pair.gammas());
}

inline double noise_identity_residual(const GammaPair& g) {
  const PairDerived d = derive(g);
  const double s = g.plus + g.minus;
  return std::abs(d.rho.margin() - g.gap() / (s * (2.0 - s)));
}

inline double noise_identity_residual(const BagPair& pair) { return noise_identity_residual(pair.gammas()); }

inline SourceStats source_stats(const BagPair& pair) {
  SourceStats s;
  s.n = pair.n();
  s.gamma = std::make_pair(pair.gamma_plus, pair.gamma_minus);
  return s;
}

// Draws one instance from a class-conditional distribution.
using Sampler = std::function<Eigen::VectorXd(Rng&)>;

struct SampledBagPair {
  BagPair pair;
  // 1 where the instance came from the positive class-conditional.
  std::vector<int> pos_components;
  std::vector<int> neg_components;
  double empirical_gamma_plus = 0.0;
  double empirical_gamma_minus = 0.0;
};

namespace detail {

inline Points stack_rows(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) return Points(0, 0);
  Points out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_dims(rows[i].size(), out.cols());
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

inline Bag sample_mixture_bag(const Sampler& p_plus, const Sampler& p_minus, double gamma, long m, Rng& rng,
                              std::vector<int>& components) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(m);
  components.assign(m, 0);
  for (long j = 0; j < m; ++j) {
    const bool pos = rng.uniform() < gamma;
    components[j] = pos ? 1 : 0;
    rows.push_back(pos ? p_plus(rng) : p_minus(rng));
  }
  Bag b;
  b.instances = stack_rows(rows);
  b.gamma = gamma;
  return b;
}

}  // namespace detail

inline SampledBagPair sample_bag_pair(const Sampler& p_plus, const Sampler& p_minus, const GammaPair& gamma,
                                      long m_pos, long m_neg, std::uint64_t seed) {
  gamma.validate();
  if (m_pos < 1 || m_neg < 1) throw InputError("bag sizes must be positive");
  Rng rng(seed);
  SampledBagPair out;
  out.pair.pos_bag = detail::sample_mixture_bag(p_plus, p_minus, gamma.plus, m_pos, rng, out.pos_components);
  out.pair.neg_bag = detail::sample_mixture_bag(p_plus, p_minus, gamma.minus, m_neg, rng, out.neg_components);
  out.pair.pos_bag.id = "pos";
  out.pair.neg_bag.id = "neg";
  out.pair.gamma_plus = gamma.plus;
  out.pair.gamma_minus = gamma.minus;
  out.pair.pos_index = 0;
  out.pair.neg_index = 1;
  const auto frac = [](const std::vector<int>& c) {
    return static_cast<double>(std::accumulate(c.begin(), c.end(), 0L)) / static_cast<double>(c.size());
  };
  out.empirical_gamma_plus = frac(out.pos_components);
  out.empirical_gamma_minus = frac(out.neg_components);
  return out;
}

struct FlipSample {
  Points x;
  std::vector<int> clean;  // Y
  std::vector<int> noisy;  // the reported label after flipping
};

inline FlipSample sample_via_flip(const Sampler& p_plus, const Sampler& p_minus, const PairDerived& derived, long n,
                                  std::uint64_t seed) {
  derived.rho.validate();
  if (!(derived.pi >= 0.0 && derived.pi <= 1.0)) throw InputError("class prior must lie in [0,1]");
  if (n < 1) throw InputError("sample size must be positive");
  Rng rng(seed);
  FlipSample out;
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(n);
  out.clean.resize(n);
  out.noisy.resize(n);
  for (long j = 0; j < n; ++j) {
    const int y = rng.uniform() < derived.pi ? 1 : -1;
    rows.push_back(y == 1 ? p_plus(rng) : p_minus(rng));
    const double flip = y == 1 ? derived.rho.plus : derived.rho.minus;
    out.clean[j] = y;
    out.noisy[j] = rng.uniform() < flip ? -y : y;
  }
  out.x = detail::stack_rows(rows);
  return out;
}

enum class SizePolicy { kStrict, kPermissive };

struct Pairing {
  std::vector<BagPair> pairs;
  double objective = 0.0;
  // Set when bag sizes differ; the pseudo-label model assumes equal sizes.
  bool model_mismatch_warning = false;
};

namespace detail {

struct PairingWeights {
  int n = 0;
  std::vector<double> value;                 // true edge weights, row-major n x n
  std::vector<PerfectMatcher::Weight> exact;  // integer surrogate with the same ordering
  bool unequal = false;

  double at(int i, int j) const { return value[static_cast<std::size_t>(i) * n + j]; }
  PerfectMatcher::Weight exact_at(int i, int j) const { return exact[static_cast<std::size_t>(i) * n + j]; }
};

inline std::int64_t lcm_capped(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  const __int128 l = static_cast<__int128>(a / g) * b;
  if (l > (static_cast<__int128>(1) << 40)) return -1;
  return static_cast<std::int64_t>(l);
}

inline PairingWeights pairing_weights(const std::vector<Bag>& bags, SizePolicy policy) {
  const int n = static_cast<int>(bags.size());
  if (n % 2 != 0) {
    std::ostringstream os;
    os << "pairing needs an even number of bags, got " << n;
    throw InputError(os.str());
  }
  PairingWeights pw;
  pw.n = n;
  bool all_labeled = true;
  for (const Bag& b : bags) {
    b.validate();
    if (b.size() != bags.front().size()) pw.unequal = true;
    all_labeled = all_labeled && b.hidden_labels.has_value();
  }
  if (pw.unequal && policy == SizePolicy::kStrict) {
    throw InputError("bags have different sizes; the strict size policy requires equal sizes");
  }
  pw.value.assign(static_cast<std::size_t>(n) * n, 0.0);
  pw.exact.assign(static_cast<std::size_t>(n) * n, 0);
  double maxw = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = bags[i].gamma - bags[j].gamma;
      double w = d * d;
      if (pw.unequal) w *= static_cast<double>(bags[i].size() + bags[j].size());
      pw.value[static_cast<std::size_t>(i) * n + j] = w;
      maxw = std::max(maxw, w);
    }
  }

  // Exact integer weights from the label counts, when they fit.
  bool exact_ok = all_labeled;
  std::int64_t l = 1;
  if (exact_ok) {
    for (const Bag& b : bags) {
      l = lcm_capped(l, b.size());
      if (l < 0) {
        exact_ok = false;
        break;
      }
    }
  }
  if (exact_ok) {
    std::vector<std::int64_t> scaled(n);
    for (int i = 0; i < n; ++i) scaled[i] = bags[i].positive_count() * (l / bags[i].size());
    const __int128 limit = static_cast<__int128>(1) << 56;
    for (int i = 0; i < n && exact_ok; ++i) {
      for (int j = 0; j < n; ++j) {
        const __int128 d = scaled[i] - scaled[j];
        __int128 w = d * d;
        if (pw.unequal) w *= bags[i].size() + bags[j].size();
        if (w > limit / n) {
          exact_ok = false;
          break;
        }
        pw.exact[static_cast<std::size_t>(i) * n + j] = static_cast<std::int64_t>(w);
      }
    }
  }
  if (!exact_ok) {
    // Differences below 1e-12 (relative) count as ties.
    const double unit = 1e-12 * std::max(1.0, maxw);
    for (std::size_t k = 0; k < pw.value.size(); ++k) pw.exact[k] = std::llround(pw.value[k] / unit);
  }
  return pw;
}

inline bool same_gamma(const Bag& a, const Bag& b) {
  if (a.hidden_labels && b.hidden_labels) {
    return a.positive_count() * b.size() == b.positive_count() * a.size();
  }
  return std::abs(a.gamma - b.gamma) <= 1e-12;
}

inline Pairing build_pairing(const std::vector<Bag>& bags, const PairingWeights& pw, const std::vector<int>& mate) {
  Pairing out;
  out.model_mismatch_warning = pw.unequal;
  for (int i = 0; i < pw.n; ++i) {
    const int j = mate[i];
    if (j < i) continue;
    BagPair p;
    int pos = i;
    int neg = j;
    p.zero_gap = same_gamma(bags[i], bags[j]);
    if (!p.zero_gap && bags[j].gamma > bags[i].gamma) std::swap(pos, neg);
    p.pos_bag = bags[pos];
    p.neg_bag = bags[neg];
    p.pos_index = pos;
    p.neg_index = neg;
    p.gamma_plus = bags[pos].gamma;
    p.gamma_minus = bags[neg].gamma;
    out.objective += pw.at(i, j);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

inline Pairing pair_bags(const std::vector<Bag>& bags, SizePolicy policy = SizePolicy::kStrict) {
  const detail::PairingWeights pw = detail::pairing_weights(bags, policy);
  const MatchingResult m = max_weight_perfect_matching(pw.n, [&](int i, int j) { return pw.exact_at(i, j); });
  return detail::build_pairing(bags, pw, m.mate);
}

inline constexpr int kMaxBruteForceBags = 12;

inline Pairing pair_bags_bruteforce(const std::vector<Bag>& bags, SizePolicy policy = SizePolicy::kStrict) {
  if (static_cast<int>(bags.size()) > kMaxBruteForceBags) {
    std::ostringstream os;
    os << "exhaustive pairing supports at most " << kMaxBruteForceBags << " bags, got " << bags.size();
    throw InputError(os.str());
  }
  const detail::PairingWeights pw = detail::pairing_weights(bags, policy);
  const MatchingResult m = brute_force_perfect_matching(pw.n, [&](int i, int j) { return pw.exact_at(i, j); });
  return detail::build_pairing(bags, pw, m.mate);
}

// Bound-optimal weight of each pair; zero-gap pairs get 0.
inline std::vector<double> pairing_weights(const Pairing& pairing) {
  std::vector<double> raw(pairing.pairs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const BagPair& p = pairing.pairs[i];
    if (p.zero_gap) continue;
    const double g = p.gamma_plus - p.gamma_minus;
    raw[i] = static_cast<double>(p.n()) * g * g;
    sum += raw[i];
  }
  if (sum > 0.0) {
    for (double& w : raw) w /= sum;
  }
  return raw;
}

}  // namespace mcs

#endif  // MCS_LLP_MODEL_HPP_
