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

#ifndef MCS_SOLVER_HPP_
#define MCS_SOLVER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "mcs/csv.hpp"
#include "mcs/error.hpp"
#include "mcs/kernel.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/losses.hpp"
#include "mcs/rng.hpp"

namespace mcs {

// One corrupted source: points with their observed labels, the corruption
// model, and the source's weight in the empirical risk.
struct Source {
  Points x;
  std::vector<int> labels;
  NoiseRates rho;
  CostPair alpha;
  double weight = 1.0;
  std::optional<GammaPair> gamma;

  long size() const { return static_cast<long>(x.rows()); }
  long count(int y) const { return static_cast<long>(std::count(labels.begin(), labels.end(), y)); }

  // Per-point loss as a mix of l(t, 1) and l(t, -1).
  LossMix mix(int y) const { return gamma ? llp_mix(*gamma, y) : corrected_cost_mix(alpha, rho, y); }
};

struct TrainingProblem {
  std::vector<Source> sources;
  KernelSpec kernel;
  double lambda = 0.0;
  MarginLoss loss = MarginLoss::logistic();

  long size() const {
    long n = 0;
    for (const Source& s : sources) n += s.size();
    return n;
  }

  void validate() const {
    if (sources.empty()) throw InputError("training problem has no sources");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("regularization must be nonnegative");
    kernel.validate();
    double sum = 0.0;
    const Eigen::Index d = sources.front().x.cols();
    for (const Source& s : sources) {
      if (s.size() == 0) throw InputError("every source needs at least one point");
      if (static_cast<long>(s.labels.size()) != s.size()) throw InputError("one label per point is required");
      check_dims(s.x.cols(), d);
      for (int y : s.labels) check_label(y);
      if (!(s.weight >= 0.0)) throw InputError("source weights must be nonnegative");
      if (s.gamma) {
        s.gamma->validate();
      } else {
        s.rho.validate();
        s.alpha.validate();
      }
      sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "source weights must sum to 1, got " << std::setprecision(17) << sum;
      throw InputError(os.str());
    }
  }
};

// All points stacked, each with its loss mix already scaled by w_i / n_i.
struct CompiledProblem {
  Points x;
  std::vector<LossMix> mix;
  Eigen::MatrixXd gram;
  double lambda = 0.0;
  MarginLoss loss = MarginLoss::logistic();
  KernelSpec kernel;

  long size() const { return static_cast<long>(x.rows()); }

  double risk(const Eigen::VectorXd& t) const {
    double r = 0.0;
    for (long j = 0; j < size(); ++j) r += mix[j].apply(loss, t[j]);
    return r;
  }

  double objective(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd t = gram * a;
    return risk(t) + lambda * a.dot(t);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd t = gram * a;
    Eigen::VectorXd u(size());
    for (long j = 0; j < size(); ++j) u[j] = mix[j].apply_deriv(loss, t[j]);
    u += 2.0 * lambda * a;
    return gram * u;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd t = gram * a;
    Eigen::VectorXd d(size());
    for (long j = 0; j < size(); ++j) d[j] = mix[j].apply_second(loss, t[j]);
    return gram * d.asDiagonal() * gram + 2.0 * lambda * gram;
  }
};

inline Points stacked_points(const TrainingProblem& problem) {
  Points x(problem.size(), problem.sources.front().x.cols());
  Eigen::Index row = 0;
  for (const Source& s : problem.sources) {
    x.middleRows(row, s.size()) = s.x;
    row += s.size();
  }
  return x;
}

inline std::vector<LossMix> scaled_mixes(const TrainingProblem& problem) {
  std::vector<LossMix> out;
  out.reserve(problem.size());
  for (const Source& s : problem.sources) {
    const double scale = s.weight / static_cast<double>(s.size());
    const LossMix pos = s.mix(1);
    const LossMix neg = s.mix(-1);
    for (int y : s.labels) {
      const LossMix& m = y == 1 ? pos : neg;
      out.push_back({scale * m.on_pos, scale * m.on_neg});
    }
  }
  return out;
}

// `gram` may be passed in when the caller already has it.
inline CompiledProblem compile(const TrainingProblem& problem, const Eigen::MatrixXd* gram_matrix = nullptr) {
  problem.validate();
  CompiledProblem c;
  c.x = stacked_points(problem);
  c.mix = scaled_mixes(problem);
  c.lambda = problem.lambda;
  c.loss = problem.loss;
  c.kernel = problem.kernel;
  if (gram_matrix) {
    if (gram_matrix->rows() != c.size() || gram_matrix->cols() != c.size()) {
      throw InputError("precomputed Gram matrix has the wrong shape");
    }
    c.gram = *gram_matrix;
  } else {
    c.gram = gram(c.x, problem.kernel);
  }
  return c;
}

namespace detail {

inline void check_representer(const TrainingProblem& problem, const KernelModel& model) {
  model.validate();
  if (model.anchors.rows() != problem.size() || model.anchors.cols() != problem.sources.front().x.cols() ||
      model.anchors != stacked_points(problem)) {
    throw InputError("model anchors must be the training points");
  }
}

}  // namespace detail

inline double objective(const TrainingProblem& problem, const KernelModel& model) {
  detail::check_representer(problem, model);
  return compile(problem).objective(model.coefficients);
}

inline Eigen::VectorXd gradient(const TrainingProblem& problem, const KernelModel& model) {
  detail::check_representer(problem, model);
  return compile(problem).gradient(model.coefficients);
}

inline Eigen::MatrixXd objective_hessian(const TrainingProblem& problem, const KernelModel& model) {
  detail::check_representer(problem, model);
  return compile(problem).hessian(model.coefficients);
}

// Weighted corrected empirical risk of any model on the problem's points.
inline double corrected_empirical_risk(const TrainingProblem& problem, const KernelModel& model) {
  problem.validate();
  check_dims(model.anchors.cols(), problem.sources.front().x.cols());
  const Eigen::VectorXd t = evaluate_all(model, stacked_points(problem));
  CompiledProblem c;
  c.mix = scaled_mixes(problem);
  c.loss = problem.loss;
  c.x = Points(problem.size(), 0);
  return c.risk(t);
}

// The risk when every point receives the same score t.
inline double constant_score_risk(const TrainingProblem& problem, double t) {
  problem.validate();
  double r = 0.0;
  for (const LossMix& m : scaled_mixes(problem)) r += m.apply(problem.loss, t);
  return r;
}

enum class InitKind { kZeros, kGaussian };

struct TrainConfig {
  double learning_rate = 0.01;
  double decay = 0.0;
  long iterations = 100;
  std::uint64_t seed = 0;
  InitKind init = InitKind::kZeros;
  double init_scale = 0.1;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("learning rate must be positive");
    if (!(decay >= 0.0) || !std::isfinite(decay)) throw InputError("decay must be nonnegative");
    if (iterations < 1) throw InputError("iterations must be positive");
    if (init == InitKind::kGaussian && !(init_scale > 0.0)) throw InputError("init scale must be positive");
  }
};

struct TrainResult {
  KernelModel model;
  // Objective at iterate 0..iterations.
  std::vector<double> trace;
  // Coefficients after each requested iteration count, in request order.
  // Empty for counts past a divergence.
  std::vector<Eigen::VectorXd> checkpoints;
  // Set instead of throwing when training was asked to tolerate divergence.
  std::optional<long> diverged_at;

  bool monotone() const {
    for (std::size_t k = 1; k < trace.size(); ++k) {
      if (trace[k] > trace[k - 1]) return false;
    }
    return true;
  }
};

inline Eigen::VectorXd initial_coefficients(long n, const TrainConfig& config) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  if (config.init == InitKind::kGaussian) {
    Rng rng(config.seed);
    for (long j = 0; j < n; ++j) a[j] = config.init_scale * rng.normal();
  }
  return a;
}

// Full-batch gradient descent; step k uses learning_rate / (1 + decay * k).
inline TrainResult train(const CompiledProblem& c, const TrainConfig& config,
                         std::span<const long> checkpoints = {}, bool tolerate_divergence = false) {
  config.validate();
  long last = config.iterations;
  for (long k : checkpoints) {
    if (k < 1) throw InputError("checkpoints must be positive iteration counts");
    last = std::max(last, k);
  }
  const long n = c.size();
  TrainResult out;
  out.trace.reserve(last + 1);
  out.checkpoints.resize(checkpoints.size());
  Eigen::VectorXd a = initial_coefficients(n, config);
  Eigen::VectorXd t = c.gram * a;
  Eigen::VectorXd u(n);
  Eigen::VectorXd final_a;
  for (long k = 0;; ++k) {
    const double obj = c.risk(t) + c.lambda * a.dot(t);
    if (!std::isfinite(obj)) {
      if (tolerate_divergence) {
        out.diverged_at = k;
        return out;
      }
      std::ostringstream os;
      os << "objective became non-finite at step " << k;
      throw DivergenceError(os.str(), k);
    }
    out.trace.push_back(obj);
    for (std::size_t q = 0; q < checkpoints.size(); ++q) {
      if (checkpoints[q] == k) out.checkpoints[q] = a;
    }
    if (k == config.iterations) final_a = a;
    if (k == last) break;
    for (long j = 0; j < n; ++j) u[j] = c.mix[j].apply_deriv(c.loss, t[j]);
    u += 2.0 * c.lambda * a;
    const double step = config.learning_rate / (1.0 + config.decay * static_cast<double>(k));
    const Eigen::VectorXd g = c.gram * u;
    a -= step * g;
    t = c.gram * a;
  }
  out.trace.resize(config.iterations + 1);
  out.model.anchors = c.x;
  out.model.kernel = c.kernel;
  out.model.coefficients = std::move(final_a);
  return out;
}

inline TrainResult train(const TrainingProblem& problem, const TrainConfig& config) {
  return train(compile(problem), config);
}

struct ConvexityCertificate {
  bool convex = false;
  double lhs = 0.0;
  // gamma- <= 1/2 <= gamma+ for every source.
  bool straddles_half = false;
  // n+ = n- for every source.
  bool balanced = false;
};

inline ConvexityCertificate convexity_certificate(const TrainingProblem& problem) {
  problem.validate();
  ConvexityCertificate c;
  c.straddles_half = true;
  c.balanced = true;
  for (const Source& s : problem.sources) {
    if (!s.gamma) throw InputError("convexity certificate needs label proportions on every source");
    const double gp = s.gamma->plus;
    const double gm = s.gamma->minus;
    const double np = static_cast<double>(s.count(1));
    const double nm = static_cast<double>(s.count(-1));
    c.lhs += s.weight / (static_cast<double>(s.size()) * (gp - gm)) * (np * (0.5 - gm) + nm * (gp - 0.5));
    c.straddles_half = c.straddles_half && gm <= 0.5 && gp >= 0.5;
    c.balanced = c.balanced && s.count(1) == s.count(-1);
  }
  c.convex = c.lhs >= 0.0;
  return c;
}

// Sources for the non-degenerate pairs; weights renormalized over them.
inline std::vector<Source> llp_sources(const std::vector<BagPair>& pairs, std::span<const double> weights) {
  if (weights.size() != pairs.size()) throw InputError("one weight per bag pair is required");
  std::vector<Source> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const BagPair& p = pairs[i];
    if (p.zero_gap || !(weights[i] > 0.0)) continue;
    Source s;
    s.x.resize(p.n(), p.pos_bag.instances.cols());
    s.x.topRows(p.n_plus()) = p.pos_bag.instances;
    s.x.bottomRows(p.n_minus()) = p.neg_bag.instances;
    s.labels.assign(p.n_plus(), 1);
    s.labels.insert(s.labels.end(), p.n_minus(), -1);
    const PairDerived d = derive(p);
    s.rho = d.rho;
    s.alpha = d.alpha;
    s.gamma = p.gammas();
    s.weight = weights[i];
    sum += weights[i];
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InputError("no bag pair has distinct proportions");
  for (Source& s : out) s.weight /= sum;
  return out;
}

inline void save_model(std::ostream& os, const KernelModel& model, double lambda) {
  model.validate();
  os << std::setprecision(17);
  os << "bandwidth," << model.kernel.bandwidth << "\n";
  os << "lambda," << lambda << "\n";
  os << "dim," << model.anchors.cols() << "\n";
  os << "anchors," << model.anchors.rows() << "\n";
  os << "coefficient";
  for (Eigen::Index k = 0; k < model.anchors.cols(); ++k) os << ",x" << (k + 1);
  os << "\n";
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    os << model.coefficients[i];
    for (Eigen::Index k = 0; k < model.anchors.cols(); ++k) os << "," << model.anchors(i, k);
    os << "\n";
  }
}

struct LoadedModel {
  KernelModel model;
  double lambda = 0.0;
};

inline LoadedModel load_model(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (csv::skip(line)) continue;
    rows.push_back(csv::split_line(line));
  }
  const auto header = [&](std::size_t i, const char* key) -> const std::string& {
    if (i >= rows.size() || rows[i].size() != 2 || rows[i][0] != key) {
      throw InputError(std::string("model file: expected '") + key + ",<value>' on line " + std::to_string(i + 1));
    }
    return rows[i][1];
  };
  LoadedModel out;
  out.model.kernel.bandwidth = csv::parse_double(header(0, "bandwidth"), "bandwidth");
  out.lambda = csv::parse_double(header(1, "lambda"), "lambda");
  const long d = csv::parse_long(header(2, "dim"), "dim");
  const long m = csv::parse_long(header(3, "anchors"), "anchor count");
  if (d < 1 || m < 0) throw InputError("model file: bad dimensions");
  if (rows.size() != static_cast<std::size_t>(5 + m)) throw InputError("model file: wrong number of anchor rows");
  if (rows[4].empty() || rows[4][0] != "coefficient") throw InputError("model file: missing column header");
  out.model.anchors.resize(m, d);
  out.model.coefficients.resize(m);
  for (long i = 0; i < m; ++i) {
    const auto& r = rows[5 + i];
    if (static_cast<long>(r.size()) != d + 1) throw InputError("model file: anchor row has the wrong width");
    out.model.coefficients[i] = csv::parse_double(r[0], "coefficient");
    for (long k = 0; k < d; ++k) out.model.anchors(i, k) = csv::parse_double(r[k + 1], "anchor coordinate");
  }
  out.model.validate();
  return out;
}

inline void save_model(const std::string& path, const KernelModel& model, double lambda) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write model file " + path);
  save_model(os, model, lambda);
}

inline LoadedModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open model file " + path);
  return load_model(is);
}

}  // namespace mcs

#endif  // MCS_SOLVER_HPP_
