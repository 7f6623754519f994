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

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <vector>

#include "mcs/data_io.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/rng.hpp"
#include "mcs/solver.hpp"

namespace mcs {
namespace {

// LLP problem built from sampled Gaussian bag pairs. With `straddle` every
// pair has gamma- <= 1/2 <= gamma+.
TrainingProblem llp_problem(uint64_t seed, int num_pairs, long m, double lambda, bool straddle = true) {
  Rng rng(seed);
  const GaussianPair gp{2, 2.0};
  std::vector<BagPair> pairs;
  for (int i = 0; i < num_pairs; ++i) {
    GammaPair g;
    if (straddle) {
      g = {rng.uniform(0.5, 1.0), rng.uniform(0.0, 0.5)};
    } else {
      const double a = rng.uniform(), b = rng.uniform();
      g = {std::max(a, b), std::min(a, b)};
    }
    pairs.push_back(sample_bag_pair(gp.positive(), gp.negative(), g, m, m, rng.next()).pair);
  }
  TrainingProblem p;
  p.sources = llp_sources(pairs, std::vector<double>(pairs.size(), 1.0));
  p.kernel.bandwidth = 0.5;
  p.lambda = lambda;
  return p;
}

KernelModel representer(const TrainingProblem& p, const Eigen::VectorXd& a) {
  return {stacked_points(p), a, p.kernel};
}

double logistic(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

TEST(Objective, ThreePointOracle) {
  TrainingProblem p;
  Source s1;
  s1.x.resize(2, 1);
  s1.x << 0.0, 1.0;
  s1.labels = {1, -1};
  s1.rho = {0.3, 0.1};
  s1.alpha = {1.5, 0.5};
  s1.weight = 0.25;
  Source s2;
  s2.x.resize(1, 1);
  s2.x << -0.5;
  s2.labels = {1};
  s2.weight = 0.75;
  p.sources = {s1, s2};
  p.kernel.bandwidth = 0.7;
  p.lambda = 0.2;
  Eigen::VectorXd a(3);
  a << 0.4, -1.1, 0.3;

  const double xs[3] = {0.0, 1.0, -0.5};
  double t[3];
  for (int i = 0; i < 3; ++i) {
    t[i] = 0.0;
    for (int j = 0; j < 3; ++j) t[i] += a[j] * std::exp(-0.7 * (xs[i] - xs[j]) * (xs[i] - xs[j]));
  }
  // (l_alpha)^rho(t, y) = ((1 - rho_{-y}) alpha_y phi(yt) - rho_y alpha_{-y} phi(-yt)) / (1 - rho+ - rho-)
  const double d = 1.0 - 0.3 - 0.1;
  const double l0 = ((1 - 0.1) * 1.5 * logistic(t[0]) - 0.3 * 0.5 * logistic(-t[0])) / d;
  const double l1 = ((1 - 0.3) * 0.5 * logistic(-t[1]) - 0.1 * 1.5 * logistic(t[1])) / d;
  const double l2 = logistic(t[2]);
  const double risk = 0.25 / 2 * (l0 + l1) + 0.75 * l2;
  double norm = 0.0;
  for (int i = 0; i < 3; ++i) norm += a[i] * t[i];

  const KernelModel model = representer(p, a);
  EXPECT_NEAR(corrected_empirical_risk(p, model), risk, 1e-12);
  EXPECT_NEAR(objective(p, model), risk + 0.2 * norm, 1e-12);
}

TEST(Objective, ZeroModelGivesLn2ForLlp) {
  const TrainingProblem p = llp_problem(1, 3, 8, 0.3, false);
  const KernelModel zero = representer(p, Eigen::VectorXd::Zero(p.size()));
  EXPECT_NEAR(objective(p, zero), std::log(2.0), 1e-12);
  EXPECT_NEAR(constant_score_risk(p, 0.0), std::log(2.0), 1e-12);
}

TEST(Objective, CleanSourceIsOrdinaryRisk) {
  TrainingProblem p;
  Source s;
  s.x = Points::Random(5, 2);
  s.labels = {1, -1, 1, 1, -1};
  p.sources = {s};
  p.lambda = 0.0;
  Eigen::VectorXd a = Eigen::VectorXd::Random(5);
  const KernelModel m = representer(p, a);
  const Eigen::VectorXd f = evaluate_all(m, s.x);
  double r = 0.0;
  for (int i = 0; i < 5; ++i) r += logistic(s.labels[i] * f[i]) / 5;
  EXPECT_NEAR(corrected_empirical_risk(p, m), r, 1e-12);
  EXPECT_NEAR(objective(p, m), r, 1e-12);
}

TEST(Objective, AnchorMismatch) {
  const TrainingProblem p = llp_problem(2, 1, 4, 0.1);
  KernelModel m{Points::Zero(3, 2), Eigen::VectorXd::Zero(3), p.kernel};
  EXPECT_THROW(objective(p, m), InputError);
  EXPECT_THROW(gradient(p, m), InputError);
  // Risk alone works for any model.
  EXPECT_NEAR(corrected_empirical_risk(p, m), std::log(2.0), 1e-12);
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const TrainingProblem p = llp_problem(100 + trial, 1 + trial % 3, 2 + trial % 7, trial % 2 ? 0.05 : 0.0, trial % 3 != 0);
    ASSERT_LE(p.size(), 50);
    Eigen::VectorXd a(p.size());
    for (long i = 0; i < a.size(); ++i) a[i] = rng.normal();
    const Eigen::VectorXd g = gradient(p, representer(p, a));
    Eigen::VectorXd fd(a.size());
    const double h = 1e-6;
    for (long i = 0; i < a.size(); ++i) {
      Eigen::VectorXd up = a, down = a;
      up[i] += h;
      down[i] -= h;
      fd[i] = (objective(p, representer(p, up)) - objective(p, representer(p, down))) / (2 * h);
    }
    EXPECT_LT((g - fd).norm() / std::max(1e-12, fd.norm()), 1e-5) << "trial " << trial;
  }
}

TEST(Gradient, RegularizerDominates) {
  TrainingProblem p = llp_problem(3, 2, 4, 1e6);
  const CompiledProblem c = compile(p);
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(p.size(), 0.5);
  const Eigen::VectorXd g = gradient(p, representer(p, a));
  const Eigen::VectorXd reg = 2.0 * p.lambda * c.gram * a;
  EXPECT_LT((g - reg).norm() / reg.norm(), 1e-5);
}

TEST(Certificate, HandCase) {
  TrainingProblem p;
  Source s;
  s.x = Points::Zero(10, 1);
  s.labels.assign(10, 1);
  s.gamma = GammaPair{0.9, 0.6};
  const PairDerived d = derive(*s.gamma);
  s.rho = d.rho;
  s.alpha = d.alpha;
  p.sources = {s};
  const ConvexityCertificate c = convexity_certificate(p);
  EXPECT_NEAR(c.lhs, -1.0 / 3.0, 1e-15);
  EXPECT_FALSE(c.convex);
  EXPECT_FALSE(c.straddles_half);
  // The pooled scalar function has a negative second difference somewhere.
  const LossMix mix = s.mix(1);
  bool found = false;
  for (double t = -5.0; t <= 5.0; t += 0.1) {
    const double h = 0.1;
    const double d2 = mix.apply(p.loss, t + h) - 2 * mix.apply(p.loss, t) + mix.apply(p.loss, t - h);
    found = found || d2 < 0.0;
  }
  EXPECT_TRUE(found);
}

TEST(Certificate, SufficientCases) {
  const ConvexityCertificate a = convexity_certificate(llp_problem(4, 4, 6, 0.1, true));
  EXPECT_TRUE(a.straddles_half);
  EXPECT_TRUE(a.convex);
  // Equal bag sizes in every pair make case (b) hold whatever the proportions.
  const ConvexityCertificate b = convexity_certificate(llp_problem(5, 4, 6, 0.1, false));
  EXPECT_TRUE(b.balanced);
  EXPECT_TRUE(b.convex);
  EXPECT_GE(b.lhs, 0.0);

  TrainingProblem no_gamma;
  Source s;
  s.x = Points::Zero(1, 1);
  s.labels = {1};
  no_gamma.sources = {s};
  EXPECT_THROW(convexity_certificate(no_gamma), InputError);
}

TEST(Certificate, CoefficientHessianPsdWhenStraddling) {
  for (uint64_t seed = 20; seed < 30; ++seed) {
    const TrainingProblem p = llp_problem(seed, 3, 6, 0.01, true);
    ASSERT_TRUE(convexity_certificate(p).convex);
    Rng rng(seed);
    Eigen::VectorXd a(p.size());
    for (long i = 0; i < a.size(); ++i) a[i] = rng.normal();
    const Eigen::MatrixXd h = objective_hessian(p, representer(p, a));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-8 * ev.maxCoeff());
  }
}

TEST(Hessian, MatchesDifferencedGradient) {
  for (uint64_t seed = 40; seed < 45; ++seed) {
    const TrainingProblem p = llp_problem(seed, 2, 4, 0.01, false);
    Rng rng(seed);
    Eigen::VectorXd a(p.size());
    for (long i = 0; i < a.size(); ++i) a[i] = rng.normal();
    const Eigen::MatrixXd h = objective_hessian(p, representer(p, a));
    Eigen::MatrixXd fd(a.size(), a.size());
    for (long i = 0; i < a.size(); ++i) {
      Eigen::VectorXd up = a, down = a;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      fd.col(i) = (gradient(p, representer(p, up)) - gradient(p, representer(p, down))) / 2e-5;
    }
    EXPECT_LT((h - fd).norm() / h.norm(), 1e-6);
  }
}

TEST(Train, TwoInitsAgreeOnConvexProblem) {
  const TrainingProblem p = llp_problem(6, 2, 8, 0.1, true);
  ASSERT_TRUE(convexity_certificate(p).convex);
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.iterations = 20000;
  const TrainResult zero = train(p, cfg);
  cfg.init = InitKind::kGaussian;
  cfg.seed = 9;
  const TrainResult noisy = train(p, cfg);
  EXPECT_NEAR(zero.trace.back(), noisy.trace.back(), 1e-4);
}

TEST(Train, MonotoneOnSeparableProblem) {
  const TrainingProblem p = llp_problem(7, 3, 10, 0.001, true);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.iterations = 100;
  const TrainResult r = train(p, cfg);
  ASSERT_EQ(r.trace.size(), 101u);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LT(r.trace[k], r.trace[k - 1]);
  EXPECT_TRUE(r.monotone());
  EXPECT_NEAR(r.trace.front(), std::log(2.0), 1e-12);
  EXPECT_NEAR(r.trace.back(), objective(p, r.model), 1e-12);
}

TEST(Train, NormBoundAfterMonotoneRun) {
  const TrainingProblem p = llp_problem(8, 3, 10, 0.05, true);
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.iterations = 800;
  const TrainResult r = train(p, cfg);
  ASSERT_TRUE(r.monotone());
  EXPECT_LE(rkhs_norm_sq(r.model), std::log(2.0) / p.lambda + 1e-9);
}

TEST(Train, LargeLambdaShrinksToZero) {
  const TrainingProblem p = llp_problem(9, 2, 5, 1e3, true);
  TrainConfig cfg;
  cfg.learning_rate = 1e-5;
  cfg.iterations = 500;
  const TrainResult r = train(p, cfg);
  EXPECT_LT(r.model.coefficients.norm(), 1e-3);
  EXPECT_NEAR(r.trace.back(), std::log(2.0), 1e-3);
}

TEST(Train, Deterministic) {
  const TrainingProblem p = llp_problem(10, 2, 5, 0.01, true);
  TrainConfig cfg;
  cfg.init = InitKind::kGaussian;
  cfg.seed = 4;
  const TrainResult a = train(p, cfg), b = train(p, cfg);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.model.coefficients, b.model.coefficients);
}

TEST(Train, CheckpointsMatchSeparateRuns) {
  const CompiledProblem c = compile(llp_problem(12, 2, 6, 0.01, true));
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.decay = 0.01;
  cfg.iterations = 50;
  const std::vector<long> cps{10, 50, 120};
  const TrainResult r = train(c, cfg, cps);
  EXPECT_EQ(r.trace.size(), 51u);
  for (std::size_t q = 0; q < cps.size(); ++q) {
    TrainConfig one = cfg;
    one.iterations = cps[q];
    EXPECT_EQ(train(c, one).model.coefficients, r.checkpoints[q]);
  }
}

TEST(Train, DivergenceNamesStep) {
  TrainingProblem p = llp_problem(13, 2, 6, 0.0, true);
  p.loss = MarginLoss::squared();
  TrainConfig cfg;
  cfg.learning_rate = 1e3;
  cfg.iterations = 5000;
  try {
    train(p, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find(std::to_string(e.step())), std::string::npos);
  }
  const TrainResult r = train(compile(p), cfg, {}, true);
  EXPECT_TRUE(r.diverged_at.has_value());
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.decay = -1;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Problem, Validation) {
  TrainingProblem p = llp_problem(14, 2, 4, 0.1);
  p.sources[0].weight = 0.9;
  EXPECT_THROW(p.validate(), InputError);
  p = llp_problem(14, 2, 4, 0.1);
  p.lambda = -1;
  EXPECT_THROW(p.validate(), InputError);
}

TEST(ModelFile, RoundTrip) {
  const TrainingProblem p = llp_problem(15, 2, 4, 0.1);
  TrainConfig cfg;
  cfg.iterations = 20;
  const TrainResult r = train(p, cfg);
  std::stringstream ss;
  save_model(ss, r.model, p.lambda);
  const LoadedModel back = load_model(ss);
  EXPECT_EQ(back.model.coefficients, r.model.coefficients);
  EXPECT_EQ(back.model.anchors, r.model.anchors);
  EXPECT_EQ(back.model.kernel.bandwidth, p.kernel.bandwidth);
  EXPECT_EQ(back.lambda, p.lambda);

  std::stringstream bad("bandwidth,1\nlambda,0\n");
  EXPECT_THROW(load_model(bad), InputError);
}

TEST(LlpSources, DropsZeroGapAndRenormalizes) {
  const GaussianPair gp{2, 2.0};
  std::vector<BagPair> pairs;
  pairs.push_back(sample_bag_pair(gp.positive(), gp.negative(), {0.8, 0.2}, 4, 4, 1).pair);
  BagPair flat = sample_bag_pair(gp.positive(), gp.negative(), {0.6, 0.4}, 4, 4, 2).pair;
  flat.gamma_plus = flat.gamma_minus = 0.5;
  flat.zero_gap = true;
  pairs.push_back(flat);
  pairs.push_back(sample_bag_pair(gp.positive(), gp.negative(), {0.7, 0.4}, 4, 4, 3).pair);
  const std::vector<Source> s = llp_sources(pairs, std::vector<double>{0.2, 0.5, 0.3});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].weight, 0.4, 1e-15);
  EXPECT_NEAR(s[1].weight, 0.6, 1e-15);
  EXPECT_THROW(llp_sources({flat}, std::vector<double>{1.0}), InputError);
}

}  // namespace
}  // namespace mcs
