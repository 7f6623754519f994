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

#include <vector>

#include "mcs/matching.hpp"
#include "mcs/rng.hpp"

namespace mcs {
namespace {

using W = PerfectMatcher::Weight;

std::vector<std::vector<W>> random_weights(Rng& rng, int n, long range, long shift) {
  std::vector<std::vector<W>> w(n, std::vector<W>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w[i][j] = w[j][i] = static_cast<W>(rng.below(range)) - shift;
  return w;
}

bool is_perfect(const std::vector<int>& mate) {
  for (int v = 0; v < static_cast<int>(mate.size()); ++v) {
    const int u = mate[v];
    if (u < 0 || u >= static_cast<int>(mate.size()) || u == v || mate[u] != v) return false;
  }
  return true;
}

TEST(Matching, AgreesWithExhaustiveSearchIncludingTieBreak) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 * (1 + static_cast<int>(rng.below(6)));
    // Small ranges force many ties.
    const long range = trial % 3 == 0 ? 3 : 1000;
    const auto w = random_weights(rng, n, range, trial % 2 ? range / 2 : 0);
    const auto f = [&](int i, int j) { return w[i][j]; };
    const MatchingResult fast = max_weight_perfect_matching(n, f);
    const MatchingResult slow = brute_force_perfect_matching(n, f);
    ASSERT_TRUE(is_perfect(fast.mate));
    EXPECT_EQ(fast.total, slow.total) << "n=" << n;
    EXPECT_EQ(fast.mate, slow.mate) << "n=" << n;
  }
}

TEST(Matching, ReducedCostsCertifyOptimality) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 * (1 + static_cast<int>(rng.below(10)));
    const auto w = random_weights(rng, n, 50, 0);
    PerfectMatcher m(n, [&](int i, int j) { return w[i][j]; });
    const std::vector<int> mate = m.solve();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        EXPECT_GE(m.reduced_cost(i, j), 0);
        if (mate[i] == j) EXPECT_EQ(m.reduced_cost(i, j), 0);
      }
    }
  }
}

TEST(Matching, LargerInstancesStayPerfect) {
  Rng rng(3);
  const int n = 60;
  const auto w = random_weights(rng, n, 100000, 0);
  const MatchingResult r = max_weight_perfect_matching(n, [&](int i, int j) { return w[i][j]; });
  EXPECT_TRUE(is_perfect(r.mate));
}

TEST(Matching, TrivialSizes) {
  const auto f = [](int, int) { return W{5}; };
  EXPECT_TRUE(max_weight_perfect_matching(0, f).mate.empty());
  EXPECT_EQ(max_weight_perfect_matching(2, f).mate, (std::vector<int>{1, 0}));
  EXPECT_THROW(PerfectMatcher(3, f), InputError);
}

TEST(Matching, AllTiesGiveLexicographicallySmallest) {
  const MatchingResult r = max_weight_perfect_matching(6, [](int, int) { return W{1}; });
  EXPECT_EQ(r.mate, (std::vector<int>{1, 0, 3, 2, 5, 4}));
}

}  // namespace
}  // namespace mcs
