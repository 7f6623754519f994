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
#include <sstream>
#include <vector>

#include "mcs/data_io.hpp"
#include "mcs/eval_harness.hpp"

namespace mcs {
namespace {

Grid tiny_grid() {
  Grid g;
  g.learning_rates = {0.1};
  g.decays = {0.001};
  g.iterations = {100};
  g.lambdas = {0.001};
  g.bandwidths = {0.5};
  return g;
}

std::vector<BagPair> sampled_pairs(int count, long m, std::uint64_t seed) {
  Rng rng(seed);
  const GaussianPair gp{2, 4.0};
  std::vector<BagPair> out;
  for (int i = 0; i < count; ++i) {
    const GammaPair g{rng.uniform(0.6, 1.0), rng.uniform(0.0, 0.4)};
    out.push_back(sample_bag_pair(gp.positive(), gp.negative(), g, m, m, rng.next()).pair);
  }
  return out;
}

TEST(Metrics, BalancedErrorHandCount) {
  // 4 positives (2 wrong), 6 negatives (all right).
  const std::vector<double> f{1, 1, -1, -1, -1, -1, -1, -1, -1, -1};
  const std::vector<int> y{1, 1, 1, 1, -1, -1, -1, -1, -1, -1};
  EXPECT_DOUBLE_EQ(ber(f, y), 0.25);
  EXPECT_DOUBLE_EQ(balanced_accuracy(f, y), 0.75);
  EXPECT_DOUBLE_EQ(accuracy(f, y), 0.8);
  const std::vector<double> perfect{1, 1, 1, 1, -1, -1, -1, -1, -1, -1};
  EXPECT_EQ(ber(perfect, y), 0.0);
  EXPECT_EQ(accuracy(perfect, y), 1.0);
  const std::vector<double> zeros(10, 0.0);
  EXPECT_EQ(ber(zeros, y), 0.5);
  const std::vector<int> one_class(10, 1);
  EXPECT_THROW(ber(f, one_class), InputError);
  EXPECT_THROW(accuracy(std::vector<double>{}, std::vector<int>{}), InputError);
}

TEST(Metrics, AccuracyCounts) {
  std::vector<double> f(10, 1.0);
  std::vector<int> y(10, 1);
  for (int i = 0; i < 3; ++i) y[i] = -1;
  EXPECT_DOUBLE_EQ(accuracy(f, y), 0.7);
  for (double& v : f) v = -1.0;
  std::fill(y.begin(), y.end(), 1);
  EXPECT_EQ(accuracy(f, y), 0.0);
}

TEST(Metrics, BalancedErrorIgnoresTestPrior) {
  const Dataset d = synth_gaussians(2, 2.0, 50000, 3);
  const Eigen::VectorXd f = d.features.col(0);
  const std::vector<double> fv(f.data(), f.data() + f.size());
  const double full = ber(fv, *d.labels);
  std::vector<double> sf;
  std::vector<int> sy;
  long kept_neg = 0, kept_pos = 0;
  for (long i = 0; i < d.size(); ++i) {
    if ((*d.labels)[i] == -1 && i % 2) continue;
    sf.push_back(fv[i]);
    sy.push_back((*d.labels)[i]);
    ((*d.labels)[i] == 1 ? kept_pos : kept_neg)++;
  }
  const double sub = ber(sf, sy);
  const double p = bayes_ber(2.0);
  const double sigma = 0.5 * std::sqrt(p * (1 - p) / kept_neg + p * (1 - p) / kept_pos);
  EXPECT_LT(std::abs(sub - full), 3 * sigma);
  EXPECT_NEAR(full, p, 3 * sigma);
}

TEST(Grid, DefaultsAndOrder) {
  const Grid g;
  EXPECT_EQ(g.cells().size(), 3u * 3 * 4 * 2 * 3);
  const std::vector<HyperParams> c = g.cells();
  EXPECT_EQ(c[0], (HyperParams{0.1, 0.01, 100, 0.001, 0.001}));
  EXPECT_EQ(c[1], (HyperParams{0.1, 0.01, 800, 0.001, 0.001}));
  EXPECT_EQ(c.back(), (HyperParams{0.001, 0.0001, 3200, 0.0, 1.0}));
  Grid bad;
  bad.lambdas.clear();
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(CrossValidate, SingleCell) {
  const std::vector<Unit> units = llp_units(sampled_pairs(6, 8, 1));
  const CvResult r = cross_validate(units, tiny_grid(), 3, 2);
  EXPECT_EQ(r.best, tiny_grid().cells()[0]);
  EXPECT_EQ(r.mean_risk.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.mean_risk[0]));
}

TEST(CrossValidate, PrefersTheLambdaThatLearns) {
  const std::vector<Unit> units = llp_units(sampled_pairs(10, 10, 3));
  Grid g = tiny_grid();
  g.lambdas = {10.0, 0.001};
  g.learning_rates = {0.001};
  g.iterations = {200};
  const CvResult r = cross_validate(units, g, 5, 4);
  EXPECT_EQ(r.best.lambda, 0.001);
  EXPECT_LT(r.mean_risk[1], r.mean_risk[0]);
}

TEST(CrossValidate, DeterministicAndErrors) {
  const std::vector<Unit> units = llp_units(sampled_pairs(6, 6, 5));
  Grid g = tiny_grid();
  g.iterations = {10, 50};
  const CvResult a = cross_validate(units, g, 3, 9), b = cross_validate(units, g, 3, 9);
  EXPECT_EQ(a.mean_risk, b.mean_risk);
  EXPECT_THROW(cross_validate(units, g, 7, 9), InputError);
  EXPECT_THROW(cross_validate(units, g, 1, 9), InputError);
}

TEST(CrossValidate, DivergedCellsLose) {
  const std::vector<Unit> units = llp_units(sampled_pairs(6, 6, 6));
  Grid g = tiny_grid();
  g.learning_rates = {1e4, 0.1};
  g.iterations = {2000};
  const CvResult r = cross_validate(units, g, 3, 1, MarginLoss::squared());
  EXPECT_TRUE(std::isinf(r.mean_risk[0]));
  EXPECT_EQ(r.best.learning_rate, 0.1);
}

TEST(CrossValidate, HiddenLabelsNeverReachSelection) {
  std::vector<BagPair> pairs = sampled_pairs(8, 6, 7);
  const CvResult before = cross_validate(llp_units(pairs), tiny_grid(), 4, 3);
  // Rewrite every hidden label; proportions and instances stay.
  for (BagPair& p : pairs) {
    for (Bag* b : {&p.pos_bag, &p.neg_bag}) {
      b->hidden_labels.emplace(b->size(), 1);
    }
  }
  const CvResult after = cross_validate(llp_units(pairs), tiny_grid(), 4, 3);
  EXPECT_EQ(before.mean_risk, after.mean_risk);
}

TEST(Report, MeanStd) {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_DOUBLE_EQ(s, std::sqrt(5.0 / 3.0));
}

TEST(Experiment, RowsPerBagSize) {
  const Dataset d = synth_gaussians(2, 4.0, 60, 11);
  ExperimentConfig cfg;
  cfg.dataset_name = "toy";
  cfg.bag_sizes = {2, 4, 8};
  cfg.repetitions = 2;
  cfg.cv_folds = 2;
  cfg.grid = tiny_grid();
  cfg.seed = 1;
  const ExperimentReport rep = run_experiment(d, cfg);
  EXPECT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.runs.size(), 6u);
  for (const SummaryRow& r : rep.rows) {
    EXPECT_EQ(r.repetitions, 2);
    EXPECT_GE(r.balanced_accuracy_std, 0.0);
    EXPECT_GE(r.balanced_accuracy_mean, 0.0);
    EXPECT_LE(r.balanced_accuracy_mean, 1.0);
  }
  EXPECT_GT(rep.row(kLlpMethod, 2).balanced_accuracy_mean, 0.9);
  std::ostringstream table, summary;
  rep.write_table(table);
  rep.write_summary_csv(summary);
  EXPECT_NE(table.str().find("±"), std::string::npos);
  EXPECT_NE(summary.str().find("toy,corrected-loss,8,2,"), std::string::npos);

  cfg.supervised_baseline = true;
  cfg.bag_sizes = {2};
  cfg.repetitions = 1;
  const ExperimentReport with = run_experiment(d, cfg);
  EXPECT_EQ(with.rows.size(), 2u);
  EXPECT_NO_THROW(with.row(kSupervisedMethod, 0));
}

TEST(Experiment, DegenerateBagSizeNamesContext) {
  const Dataset d = synth_gaussians(2, 4.0, 20, 12);
  ExperimentConfig cfg;
  cfg.dataset_name = "tiny";
  cfg.bag_sizes = {32};
  cfg.repetitions = 1;
  cfg.grid = tiny_grid();
  try {
    run_experiment(d, cfg);
    FAIL();
  } catch (const InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("tiny"), std::string::npos);
    EXPECT_NE(what.find("bag size 32"), std::string::npos);
    EXPECT_NE(what.find("repetition 0"), std::string::npos);
  }
}

}  // namespace
}  // namespace mcs
