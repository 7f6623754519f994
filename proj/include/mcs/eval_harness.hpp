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

#ifndef MCS_EVAL_HARNESS_HPP_
#define MCS_EVAL_HARNESS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mcs/bounds.hpp"
#include "mcs/data_io.hpp"
#include "mcs/error.hpp"
#include "mcs/kernel.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/losses.hpp"
#include "mcs/rng.hpp"
#include "mcs/solver.hpp"
#include "mcs/weighting.hpp"

namespace mcs {

// sign(0) counts as +1.
inline int predict_label(double f) { return f >= 0.0 ? 1 : -1; }

inline double ber(std::span<const double> f, std::span<const int> y) {
  if (f.size() != y.size()) throw InputError("one decision value per label is required");
  long np = 0, nn = 0, ep = 0, en = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    check_label(y[i]);
    if (y[i] == 1) {
      ++np;
      ep += predict_label(f[i]) != 1;
    } else {
      ++nn;
      en += predict_label(f[i]) != -1;
    }
  }
  if (np == 0 || nn == 0) throw InputError("balanced error needs both classes in the true labels");
  return 0.5 * (static_cast<double>(ep) / static_cast<double>(np) + static_cast<double>(en) / static_cast<double>(nn));
}

inline double balanced_accuracy(std::span<const double> f, std::span<const int> y) { return 1.0 - ber(f, y); }

inline double accuracy(std::span<const double> f, std::span<const int> y) {
  if (f.size() != y.size()) throw InputError("one decision value per label is required");
  if (y.empty()) throw InputError("accuracy of an empty set is undefined");
  long ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    check_label(y[i]);
    ok += predict_label(f[i]) == y[i];
  }
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

struct HyperParams {
  double learning_rate = 0.01;
  double decay = 0.001;
  long iterations = 100;
  double lambda = 0.001;
  double bandwidth = 1.0;
};

inline bool operator==(const HyperParams& a, const HyperParams& b) {
  return a.learning_rate == b.learning_rate && a.decay == b.decay && a.iterations == b.iterations &&
         a.lambda == b.lambda && a.bandwidth == b.bandwidth;
}

struct Grid {
  std::vector<double> learning_rates{0.1, 0.01, 0.001};
  std::vector<double> decays{0.01, 0.001, 0.0001};
  std::vector<long> iterations{100, 800, 1600, 3200};
  std::vector<double> lambdas{0.001, 0.0};
  std::vector<double> bandwidths{0.001, 0.1, 1.0};

  void validate() const {
    if (learning_rates.empty() || decays.empty() || iterations.empty() || lambdas.empty() || bandwidths.empty()) {
      throw InputError("every hyperparameter grid must be nonempty");
    }
    for (double v : learning_rates) {
      if (!(v > 0.0)) throw InputError("grid learning rates must be positive");
    }
    for (double v : decays) {
      if (!(v >= 0.0)) throw InputError("grid decays must be nonnegative");
    }
    for (long v : iterations) {
      if (v < 1) throw InputError("grid iteration counts must be positive");
    }
    for (double v : lambdas) {
      if (!(v >= 0.0)) throw InputError("grid lambdas must be nonnegative");
    }
    for (double v : bandwidths) {
      if (!(v > 0.0)) throw InputError("grid bandwidths must be positive");
    }
  }

  // Order: bandwidth, lambda, learning rate, decay, iterations (fastest).
  std::vector<HyperParams> cells() const {
    std::vector<HyperParams> out;
    for (double bw : bandwidths)
      for (double lam : lambdas)
        for (double lr : learning_rates)
          for (double dc : decays)
            for (long it : iterations) out.push_back({lr, dc, it, lam, bw});
    return out;
  }
};

// The unit of cross-validation. Weights inside any subset of units are
// proportional to `score`.
struct Unit {
  Source source;
  double score = 1.0;
};

// Bag pairs as training units; only instances and proportions are used.
inline std::vector<Unit> llp_units(const std::vector<BagPair>& pairs) {
  std::vector<Unit> out;
  for (const BagPair& p : pairs) {
    if (p.zero_gap) continue;
    Unit u;
    const std::vector<double> one{1.0};
    u.source = llp_sources({p}, one).front();
    const double g = p.gamma_plus - p.gamma_minus;
    u.score = static_cast<double>(p.n()) * g * g;
    out.push_back(std::move(u));
  }
  return out;
}

// Fully supervised units: one per instance, balanced costs from the prior.
inline std::vector<Unit> supervised_units(const Dataset& train) {
  const auto& y = train.labels_or_throw();
  const double pi = train.prior();
  if (!(pi > 0.0 && pi < 1.0)) throw InputError("supervised baseline needs both classes in the training data");
  const CostPair alpha{1.0 / (2.0 * pi), 1.0 / (2.0 * (1.0 - pi))};
  std::vector<Unit> out;
  for (long i = 0; i < train.size(); ++i) {
    Unit u;
    u.source.x = train.features.row(i);
    u.source.labels = {y[i]};
    u.source.alpha = alpha;
    out.push_back(std::move(u));
  }
  return out;
}

inline TrainingProblem make_problem(const std::vector<Unit>& units, const std::vector<std::size_t>& which,
                                    const KernelSpec& kernel, double lambda, const MarginLoss& loss) {
  TrainingProblem p;
  p.kernel = kernel;
  p.lambda = lambda;
  p.loss = loss;
  double total = 0.0;
  for (std::size_t i : which) total += units[i].score;
  if (!(total > 0.0)) throw InputError("no usable units");
  for (std::size_t i : which) {
    Source s = units[i].source;
    s.weight = units[i].score / total;
    p.sources.push_back(std::move(s));
  }
  return p;
}

struct CvResult {
  HyperParams best;
  std::vector<HyperParams> cells;
  // Mean validation corrected risk per cell; +inf for diverged cells.
  std::vector<double> mean_risk;
};

inline CvResult cross_validate(const std::vector<Unit>& units, const Grid& grid, int folds, std::uint64_t seed,
                               const MarginLoss& loss = MarginLoss::logistic()) {
  grid.validate();
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (static_cast<long>(units.size()) < folds) {
    std::ostringstream os;
    os << "cross-validation needs at least " << folds << " usable units, got " << units.size();
    throw InputError(os.str());
  }
  CvResult out;
  out.cells = grid.cells();
  out.mean_risk.assign(out.cells.size(), 0.0);

  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(units.size());
  std::vector<long> iters = grid.iterations;

  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t k = 0; k < perm.size(); ++k) (static_cast<int>(k % folds) == f ? va : tr).push_back(perm[k]);
    const TrainingProblem val0 = make_problem(units, va, KernelSpec{1.0}, 0.0, loss);
    const Points xv = stacked_points(val0);
    const std::vector<LossMix> mv = scaled_mixes(val0);
    std::size_t cell = 0;
    for (double bw : grid.bandwidths) {
      const KernelSpec kernel{bw};
      const TrainingProblem base = make_problem(units, tr, kernel, 0.0, loss);
      CompiledProblem c = compile(base);
      const Eigen::MatrixXd cross = gram(xv, c.x, kernel);
      for (double lam : grid.lambdas) {
        c.lambda = lam;
        for (double lr : grid.learning_rates) {
          for (double dc : grid.decays) {
            TrainConfig cfg;
            cfg.learning_rate = lr;
            cfg.decay = dc;
            cfg.iterations = *std::max_element(iters.begin(), iters.end());
            const TrainResult r = train(c, cfg, iters, true);
            for (std::size_t q = 0; q < iters.size(); ++q, ++cell) {
              double risk = std::numeric_limits<double>::infinity();
              if (r.checkpoints[q].size() == c.size()) {
                const Eigen::VectorXd t = cross * r.checkpoints[q];
                risk = 0.0;
                for (Eigen::Index j = 0; j < t.size(); ++j) risk += mv[j].apply(loss, t[j]);
                if (!std::isfinite(risk)) risk = std::numeric_limits<double>::infinity();
              }
              out.mean_risk[cell] += risk / folds;
            }
          }
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.mean_risk.size(); ++k) {
    if (out.mean_risk[k] < out.mean_risk[best]) best = k;
  }
  out.best = out.cells[best];
  return out;
}

inline KernelModel fit_units(const std::vector<Unit>& units, const HyperParams& hp, const MarginLoss& loss) {
  std::vector<std::size_t> all(units.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const TrainingProblem p = make_problem(units, all, KernelSpec{hp.bandwidth}, hp.lambda, loss);
  TrainConfig cfg;
  cfg.learning_rate = hp.learning_rate;
  cfg.decay = hp.decay;
  cfg.iterations = hp.iterations;
  return train(p, cfg).model;
}

struct ExperimentConfig {
  std::string dataset_name = "data";
  std::vector<long> bag_sizes{2, 4, 8, 16, 32, 64};
  int repetitions = 5;
  int cv_folds = 5;
  Grid grid;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool standardize = false;
  bool supervised_baseline = false;
  double delta = 0.05;
  MarginLoss loss = MarginLoss::logistic();

  void validate() const {
    if (bag_sizes.empty()) throw InputError("experiment needs at least one bag size");
    for (long b : bag_sizes) {
      if (b < 1) throw InputError("bag sizes must be positive");
    }
    if (repetitions < 1) throw InputError("experiment needs at least one repetition");
    if (cv_folds < 2) throw InputError("cross-validation needs at least 2 folds");
    if (!(delta > 0.0 && delta <= 0.25)) throw InputError("delta must lie in (0, 1/4]");
    grid.validate();
  }
};

inline constexpr const char* kLlpMethod = "corrected-loss";
inline constexpr const char* kSupervisedMethod = "supervised";

struct RunRecord {
  std::string method;
  long bag_size = 0;  // 0 for the supervised baseline
  int repetition = 0;
  double balanced_accuracy = 0.0;
  double accuracy = 0.0;
  HyperParams chosen;
  long pairs_used = 0;
  long pairs_dropped = 0;
  double bound = 0.0;
  double norm = 0.0;
};

struct SummaryRow {
  std::string method;
  long bag_size = 0;
  int repetitions = 0;
  double balanced_accuracy_mean = 0.0;
  double balanced_accuracy_std = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double bound_mean = 0.0;
};

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

struct ExperimentReport {
  std::string dataset;
  std::vector<long> bag_sizes;
  double delta = 0.05;
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> rows;

  const SummaryRow& row(const std::string& method, long bag_size) const {
    for (const SummaryRow& r : rows) {
      if (r.method == method && r.bag_size == bag_size) return r;
    }
    throw InputError("no report row for " + method + " at bag size " + std::to_string(bag_size));
  }

  void summarize() {
    rows.clear();
    std::vector<std::pair<std::string, long>> keys;
    for (const RunRecord& r : runs) {
      const std::pair<std::string, long> k{r.method, r.bag_size};
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    for (const auto& [method, bag] : keys) {
      std::vector<double> ba, ac, bd;
      for (const RunRecord& r : runs) {
        if (r.method == method && r.bag_size == bag) {
          ba.push_back(r.balanced_accuracy);
          ac.push_back(r.accuracy);
          bd.push_back(r.bound);
        }
      }
      SummaryRow s;
      s.method = method;
      s.bag_size = bag;
      s.repetitions = static_cast<int>(ba.size());
      std::tie(s.balanced_accuracy_mean, s.balanced_accuracy_std) = mean_std(ba);
      std::tie(s.accuracy_mean, s.accuracy_std) = mean_std(ac);
      s.bound_mean = mean_std(bd).first;
      rows.push_back(s);
    }
  }

  void write_summary_csv(std::ostream& os) const {
    os << "dataset,method,bag_size,repetitions,balanced_accuracy_mean,balanced_accuracy_std,accuracy_mean,"
          "accuracy_std,delta,bound_mean\n"
       << std::setprecision(17);
    for (const SummaryRow& r : rows) {
      os << dataset << "," << r.method << "," << r.bag_size << "," << r.repetitions << "," << r.balanced_accuracy_mean
         << "," << r.balanced_accuracy_std << "," << r.accuracy_mean << "," << r.accuracy_std << "," << delta << ","
         << r.bound_mean << "\n";
    }
  }

  void write_runs_csv(std::ostream& os) const {
    os << "dataset,method,bag_size,repetition,balanced_accuracy,accuracy,learning_rate,decay,iterations,lambda,"
          "bandwidth,pairs_used,pairs_dropped,norm,delta,bound\n"
       << std::setprecision(17);
    for (const RunRecord& r : runs) {
      os << dataset << "," << r.method << "," << r.bag_size << "," << r.repetition << "," << r.balanced_accuracy << ","
         << r.accuracy << "," << r.chosen.learning_rate << "," << r.chosen.decay << "," << r.chosen.iterations << ","
         << r.chosen.lambda << "," << r.chosen.bandwidth << "," << r.pairs_used << "," << r.pairs_dropped << ","
         << r.norm << "," << delta << "," << r.bound << "\n";
    }
  }

  // One block per metric: rows are methods, columns bag sizes, cells mean ± std.
  void write_table(std::ostream& os) const {
    const auto cell = [](double m, double s) {
      std::ostringstream c;
      c << std::fixed << std::setprecision(4) << m << " ± " << s;
      return c.str();
    };
    const auto block = [&](const std::string& title, bool balanced) {
      std::vector<std::string> methods;
      for (const SummaryRow& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
      }
      std::vector<std::vector<std::string>> table;
      std::vector<std::string> head{"dataset", "method"};
      for (long b : bag_sizes) head.push_back(std::to_string(b));
      table.push_back(head);
      for (const std::string& m : methods) {
        std::vector<std::string> line{dataset, m};
        for (long b : bag_sizes) {
          const SummaryRow* found = nullptr;
          for (const SummaryRow& r : rows) {
            // The supervised baseline ignores bags; it fills every column.
            if (r.method == m && (r.bag_size == b || r.bag_size == 0)) found = &r;
          }
          if (!found) {
            line.push_back("-");
          } else if (balanced) {
            line.push_back(cell(found->balanced_accuracy_mean, found->balanced_accuracy_std));
          } else {
            line.push_back(cell(found->accuracy_mean, found->accuracy_std));
          }
        }
        table.push_back(line);
      }
      std::vector<std::size_t> width(head.size(), 0);
      const auto display = [](const std::string& s) {
        std::size_t n = 0;
        for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
        return n;
      };
      for (const auto& line : table)
        for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], display(line[k]));
      os << title << "\n";
      for (const auto& line : table) {
        for (std::size_t k = 0; k < line.size(); ++k) {
          os << (k ? "  " : "") << line[k] << std::string(width[k] - display(line[k]), ' ');
        }
        os << "\n";
      }
    };
    block("balanced accuracy", true);
    os << "\n";
    block("accuracy", false);
  }
};

inline double test_metric_inputs(const KernelModel& model, const Dataset& test, double& acc) {
  const Eigen::VectorXd f = evaluate_all(model, test.features);
  const std::vector<double> fv(f.data(), f.data() + f.size());
  const auto& y = test.labels_or_throw();
  acc = accuracy(fv, y);
  return balanced_accuracy(fv, y);
}

// Split, bag, pair, weight, cross-validate, train and test, for every
// repetition and bag size. The same split is used for every bag size within a
// repetition.
inline ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.dataset = config.dataset_name;
  report.bag_sizes = config.bag_sizes;
  report.delta = config.delta;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
    auto [train_set, test_set] = split(data, config.train_fraction, derive_seed(rep_seed, 0));
    if (config.standardize) {
      const Standardizer st = Standardizer::fit(train_set.features);
      train_set.features = st.apply(train_set.features);
      test_set.features = st.apply(test_set.features);
    }
    const auto context = [&](long bag) {
      std::ostringstream os;
      os << "dataset " << config.dataset_name << ", ";
      if (bag > 0) {
        os << "bag size " << bag;
      } else {
        os << "supervised baseline";
      }
      os << ", repetition " << rep << ": ";
      return os.str();
    };
    const auto run = [&](long bag, auto&& body) {
      try {
        body();
      } catch (const DivergenceError& e) {
        throw DivergenceError(context(bag) + e.what(), e.step());
      } catch (const InputError& e) {
        throw InputError(context(bag) + e.what());
      }
    };

    for (long bag : config.bag_sizes) {
      run(bag, [&] {
        const std::uint64_t bag_seed = derive_seed(rep_seed, 100 + static_cast<std::uint64_t>(bag));
        std::vector<Bag> bags = make_bags(train_set, bag, derive_seed(bag_seed, 0));
        if (bags.size() % 2 == 1) bags.pop_back();
        if (bags.size() < 2) throw InputError("fewer than 2 bags");
        const Pairing pairing = pair_bags(bags, SizePolicy::kStrict);
        const std::vector<Unit> units = llp_units(pairing.pairs);
        if (units.empty()) throw InputError("no usable pairs: every pair has equal proportions");
        const CvResult cv = cross_validate(units, config.grid, config.cv_folds, derive_seed(bag_seed, 1), config.loss);
        const KernelModel model = fit_units(units, cv.best, config.loss);
        RunRecord r;
        r.method = kLlpMethod;
        r.bag_size = bag;
        r.repetition = rep;
        r.chosen = cv.best;
        r.pairs_used = static_cast<long>(units.size());
        r.pairs_dropped = static_cast<long>(pairing.pairs.size() - units.size());
        r.balanced_accuracy = test_metric_inputs(model, test_set, r.accuracy);
        r.norm = std::sqrt(rkhs_norm_sq(model));

        BoundInputs in;
        const double r_min = config.loss.value_at_zero() / (in.K * config.loss.lipschitz());
        in.R = std::max(r.norm, r_min * (1.0 + 1e-9));
        in.L = config.loss.lipschitz();
        in.phi0 = config.loss.value_at_zero();
        in.delta = config.delta;
        std::vector<double> w;
        for (const Unit& u : units) {
          in.sources.push_back({u.source.size(), std::nullopt, std::nullopt,
                                std::make_pair(u.source.gamma->plus, u.source.gamma->minus)});
          w.push_back(u.score);
        }
        double total = 0.0;
        for (double v : w) total += v;
        for (double& v : w) v /= total;
        in.weights = WeightVector{w};
        r.bound = bound_llp(in);
        report.runs.push_back(r);
      });
    }
    if (config.supervised_baseline) {
      run(0, [&] {
        const std::vector<Unit> units = supervised_units(train_set);
        const CvResult cv =
            cross_validate(units, config.grid, config.cv_folds, derive_seed(rep_seed, 1), config.loss);
        const KernelModel model = fit_units(units, cv.best, config.loss);
        RunRecord r;
        r.method = kSupervisedMethod;
        r.repetition = rep;
        r.chosen = cv.best;
        r.pairs_used = static_cast<long>(units.size());
        r.balanced_accuracy = test_metric_inputs(model, test_set, r.accuracy);
        r.norm = std::sqrt(rkhs_norm_sq(model));
        report.runs.push_back(r);
      });
    }
  }
  report.summarize();
  return report;
}

}  // namespace mcs

#endif  // MCS_EVAL_HARNESS_HPP_
