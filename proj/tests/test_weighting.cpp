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


#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mcs/rng.hpp"
#include "mcs/weighting.hpp"

namespace mcs {
namespace {

SourceStats noisy(long n, double rp, double rm) {
  SourceStats s;
  s.n = n;
  s.rho = NoiseRates{rp, rm};
  return s;
}

SourceStats bagpair(long n, double gp, double gm) {
  SourceStats s;
  s.n = n;
  s.gamma = std::make_pair(gp, gm);
  return s;
}

TEST(Snr, Examples) {
  EXPECT_NEAR(snr_coefficient(noisy(100, 0, 0), Setting::kCommon), 0.1, 1e-16);
  EXPECT_NEAR(snr_coefficient(noisy(100, 0.1, 0.3), Setting::kCommon), 0.2, 1e-15);
  EXPECT_NEAR(snr_coefficient(bagpair(100, 0.8, 0.2), Setting::kLlp), 1.0 / 6.0, 1e-15);
  SourceStats p = noisy(100, 0.1, 0.3);
  p.pi = 0.25;
  EXPECT_NEAR(snr_coefficient(p, Setting::kVaryingPriors), 0.8, 1e-15);
  EXPECT_TRUE(std::isinf(snr_coefficient(bagpair(10, 0.5, 0.5), Setting::kLlp)));
}

TEST(Snr, MissingFields) {
  EXPECT_THROW(snr_coefficient(bagpair(10, 0.8, 0.2), Setting::kCommon), InputError);
  EXPECT_THROW(snr_coefficient(noisy(10, 0, 0), Setting::kVaryingPriors), InputError);
  EXPECT_THROW(snr_coefficient(noisy(10, 0, 0), Setting::kLlp), InputError);
  EXPECT_THROW(snr_coefficient(noisy(0, 0, 0), Setting::kCommon), InputError);
}

TEST(OptimalWeights, Examples) {
  const std::vector<double> same{0.3, 0.3, 0.3, 0.3};
  for (double w : optimal_weights(same).weights) EXPECT_NEAR(w, 0.25, 1e-16);
  const std::vector<double> c{0.2, 0.05};
  const WeightVector w = optimal_weights(c);
  EXPECT_NEAR(w[0], 25.0 / 425.0, 1e-15);
  EXPECT_NEAR(w[1], 400.0 / 425.0, 1e-15);
  EXPECT_NEAR(weighted_quadratic(w, c), 2.0 / 850.0, 1e-15);
  const std::vector<double> one{7.0};
  EXPECT_EQ(optimal_weights(one).weights, std::vector<double>{1.0});
  const std::vector<double> bad{0.1, 0.0};
  EXPECT_THROW(optimal_weights(bad), InputError);
}

TEST(OptimalWeights, UniformWithEqualCoefficients) {
  const std::vector<double> c(5, 0.7);
  EXPECT_NEAR(weighted_quadratic(uniform_weights(5), c), 0.49 / 5, 1e-15);
}

TEST(OptimalWeights, BeatsRandomSimplexPointsAndMatchesHarmonicMean) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    std::vector<double> c(n), c2(n);
    for (int i = 0; i < n; ++i) {
      c[i] = rng.uniform(0.01, 2.0);
      c2[i] = c[i] * c[i];
    }
    const WeightVector opt = optimal_weights(c);
    const double best = weighted_quadratic(opt, c);
    EXPECT_NEAR(best, harmonic_mean(c2) / n, 1e-12 * best);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> w(n);
      double s = 0;
      for (double& v : w) s += (v = -std::log(1.0 - rng.uniform()));
      for (double& v : w) v /= s;
      EXPECT_GE(weighted_quadratic(WeightVector{w}, c), best - 1e-12);
    }
    std::vector<double> scaled(c);
    for (double& v : scaled) v *= 3.7;
    const WeightVector w2 = optimal_weights(scaled);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(w2[i], opt[i], 1e-15);
  }
}

TEST(OptimalWeights, LlpProportionality) {
  Rng rng(2);
  std::vector<SourceStats> s;
  std::vector<double> raw;
  double total = 0;
  for (int i = 0; i < 12; ++i) {
    const double gp = rng.uniform(0.5, 1), gm = rng.uniform(0, 0.5);
    const long n = 2 + static_cast<long>(rng.below(60));
    s.push_back(bagpair(n, gp, gm));
    raw.push_back(n * (gp - gm) * (gp - gm));
    total += raw.back();
  }
  const WeightVector w = source_weights(s, Setting::kLlp);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(w[i], raw[i] / total, 1e-12 * raw[i] / total);
}

TEST(SourceWeights, ZeroGapSourcesAreDropped) {
  const std::vector<SourceStats> s{bagpair(10, 0.9, 0.1), bagpair(10, 0.4, 0.4), bagpair(10, 0.7, 0.3)};
  const WeightVector w = source_weights(s, Setting::kLlp);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_NEAR(w[0], 0.64 / 0.8, 1e-15);
  EXPECT_NEAR(w[2], 0.16 / 0.8, 1e-15);
  w.validate();
  const std::vector<SourceStats> none{bagpair(10, 0.4, 0.4)};
  EXPECT_THROW(source_weights(none, Setting::kLlp), InputError);
}

TEST(MeanRatio, Illustration) {
  const double r = mean_ratio_illustration();
  EXPECT_GT(r, 100.0);
  // Direct arithmetic on c^2 = (1/n) / (1 - 2 rho)^2.
  const double lo = 1.0 / (0.98 * 0.98), hi = 1.0 / (0.02 * 0.02);
  const double arith = (9 * lo + hi) / 10, harm = 10 / (9 / lo + 1 / hi);
  EXPECT_NEAR(r, arith / harm, 1e-6 * r);
  EXPECT_NEAR(r, 216.910037, 1e-5);
  EXPECT_NEAR(mean_ratio(10, 100, 0.2, 0.2), 1.0, 1e-12);
}

TEST(WeightVector, Validation) {
  EXPECT_THROW((WeightVector{{0.5, 0.6}}).validate(), InputError);
  EXPECT_THROW((WeightVector{{1.5, -0.5}}).validate(), InputError);
  EXPECT_THROW((WeightVector{{}}).validate(), InputError);
  EXPECT_NO_THROW((WeightVector{{0.1, 0.2, 0.7}}).validate());
}

}  // namespace
}  // namespace mcs
