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

// Command-line entry point: pair, train, bound, experiment, simulate.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flat_config.hpp"
#include "mcs/mcs.hpp"

namespace {

constexpr const char* kVersion = "mcs 0.1.0";

namespace fs = std::filesystem;
using mcs::InputError;
using mcs::tools::FlatConfig;

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  double delta = 0.05;
  bool oracle = false;
  bool standardize = false;
};

// Everything needed to replay a run. The hash covers all fields except the
// timestamp, so identical runs produce identical output files.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, mcs::csv::fmt(value)); }
  void output(const std::string& name) { outputs_.push_back(name); }

  std::string body() const {
    std::ostringstream os;
    os << "version=" << kVersion << "\n";
    os << "command=" << command_ << "\n";
    for (const auto& [k, v] : entries_) os << k << "=" << v << "\n";
    for (const auto& o : outputs_) os << "output=" << o << "\n";
    return os.str();
  }

  std::string hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : body()) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }

  void write(const fs::path& dir) const {
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw InputError("cannot write manifest in " + dir.string());
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "hash=" << hash() << "\n" << body() << "timestamp=" << stamp << "\n";
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> outputs_;
};

fs::path prepare_out_dir(const Globals& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + g.out_dir + ": " + ec.message());
  return dir;
}

void write_output(const fs::path& dir, const std::string& name, const Manifest& m, const std::string& content) {
  std::ofstream os(dir / name);
  if (!os) throw InputError("cannot write " + (dir / name).string());
  os << "# manifest=" << m.hash() << "\n" << content;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << mcs::csv::fmt(v[i]);
  return os.str();
}

std::string join(const std::vector<long>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

mcs::MarginLoss loss_from(const FlatConfig& c, Manifest& m) {
  const std::string name = c.str("loss", "logistic");
  const double width = c.number("huber_width", 1.0);
  m.set("loss", name);
  if (name == "huber") m.set("huber_width", width);
  return mcs::MarginLoss::from_name(name, width);
}

mcs::SizePolicy size_policy_from(const std::string& s) {
  if (s == "strict") return mcs::SizePolicy::kStrict;
  if (s == "permissive") return mcs::SizePolicy::kPermissive;
  throw InputError("size policy must be strict or permissive, got '" + s + "'");
}

// ---------------------------------------------------------------- pair

struct PairArgs {
  std::string bags;
  std::string proportions;
  std::string size_policy = "strict";
};

int cmd_pair(const Globals& g, const PairArgs& a) {
  Manifest m("pair");
  m.set("bags", a.bags);
  m.set("proportions", a.proportions);
  m.set("size_policy", a.size_policy);
  m.set("seed", std::to_string(g.seed));
  m.set("oracle", g.oracle ? "true" : "false");
  m.output("pairing.csv");
  const std::vector<mcs::Bag> bags = mcs::read_bags(a.bags, a.proportions);
  const mcs::SizePolicy policy = size_policy_from(a.size_policy);
  const mcs::Pairing pairing = mcs::pair_bags(bags, policy);
  if (g.oracle) {
    if (bags.size() > 10) throw InputError("--oracle supports at most 10 bags");
    const mcs::Pairing check = mcs::pair_bags_bruteforce(bags, policy);
    if (check.objective != pairing.objective) {
      std::cerr << "oracle mismatch: matching " << mcs::csv::fmt(pairing.objective) << " vs exhaustive "
                << mcs::csv::fmt(check.objective) << "\n";
      return 1;
    }
    std::cout << "oracle: exhaustive search agrees\n";
  }
  const fs::path dir = prepare_out_dir(g);
  std::ostringstream csv;
  mcs::write_pairing(csv, pairing, mcs::pairing_weights(pairing));
  write_output(dir, "pairing.csv", m, csv.str());
  m.write(dir);
  long zero = 0;
  for (const auto& p : pairing.pairs) zero += p.zero_gap;
  std::cout << "pairs: " << pairing.pairs.size() << " (zero-gap: " << zero << ")\n";
  std::cout << "objective: " << mcs::csv::fmt(pairing.objective) << "\n";
  if (pairing.model_mismatch_warning) {
    std::cout << "warning: bag sizes differ; the pair model assumes equal sizes\n";
  }
  return 0;
}

// ---------------------------------------------------------------- train

const std::set<std::string> kTrainKeys{"bags",       "proportions", "size_policy", "loss",     "huber_width",
                                       "bandwidth",  "lambda",      "learning_rate", "decay",  "iterations",
                                       "init",       "init_scale",  "seed"};

int cmd_train(const Globals& g, std::uint64_t seed) {
  if (g.config.empty()) throw InputError("train needs --config");
  const FlatConfig c = FlatConfig::load(g.config);
  c.allow_only(kTrainKeys);
  Manifest m("train");
  m.set("bags", c.required("bags"));
  m.set("proportions", c.required("proportions"));
  const std::string policy = c.str("size_policy", "strict");
  m.set("size_policy", policy);
  const mcs::MarginLoss loss = loss_from(c, m);
  const mcs::KernelSpec kernel{c.number("bandwidth", 1.0)};
  const double lambda = c.number("lambda", 0.001);
  mcs::TrainConfig tc;
  tc.learning_rate = c.number("learning_rate", 0.01);
  tc.decay = c.number("decay", 0.001);
  tc.iterations = c.integer("iterations", 800);
  tc.seed = seed;
  const std::string init = c.str("init", "zeros");
  if (init == "gaussian") {
    tc.init = mcs::InitKind::kGaussian;
    tc.init_scale = c.number("init_scale", 0.1);
  } else if (init != "zeros") {
    throw InputError("init must be zeros or gaussian");
  }
  kernel.validate();
  tc.validate();
  m.set("bandwidth", kernel.bandwidth);
  m.set("lambda", lambda);
  m.set("learning_rate", tc.learning_rate);
  m.set("decay", tc.decay);
  m.set("iterations", std::to_string(tc.iterations));
  m.set("init", init);
  if (init == "gaussian") m.set("init_scale", tc.init_scale);
  m.set("seed", std::to_string(seed));
  m.output("pairing.csv");
  m.output("model.csv");
  m.output("trace.csv");

  const std::vector<mcs::Bag> bags = mcs::read_bags(c.path("bags"), c.path("proportions"));
  const mcs::Pairing pairing = mcs::pair_bags(bags, size_policy_from(policy));
  const std::vector<mcs::Unit> units = mcs::llp_units(pairing.pairs);
  if (units.empty()) throw InputError("no usable pairs: every pair has equal label proportions");
  std::vector<std::size_t> all(units.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const mcs::TrainingProblem problem = mcs::make_problem(units, all, kernel, lambda, loss);
  const mcs::ConvexityCertificate cert = mcs::convexity_certificate(problem);
  const mcs::TrainResult r = mcs::train(mcs::compile(problem), tc);

  const fs::path dir = prepare_out_dir(g);
  std::ostringstream pcsv, mcsv, tcsv;
  mcs::write_pairing(pcsv, pairing, mcs::pairing_weights(pairing));
  mcs::save_model(mcsv, r.model, lambda);
  tcsv << "iteration,objective\n" << std::setprecision(17);
  for (std::size_t k = 0; k < r.trace.size(); ++k) tcsv << k << "," << r.trace[k] << "\n";
  write_output(dir, "pairing.csv", m, pcsv.str());
  write_output(dir, "model.csv", m, mcsv.str());
  write_output(dir, "trace.csv", m, tcsv.str());
  m.write(dir);

  std::cout << "pairs used: " << units.size() << " of " << pairing.pairs.size() << "\n";
  std::cout << "convexity certificate: " << (cert.convex ? "true" : "false")
            << " (lhs = " << mcs::csv::fmt(cert.lhs) << (cert.straddles_half ? ", proportions straddle 1/2" : "")
            << (cert.balanced ? ", balanced pairs" : "") << ")\n";
  std::cout << "final objective: " << mcs::csv::fmt(r.trace.back()) << "\n";
  if (!r.monotone()) std::cout << "note: objective trace is not monotone\n";
  return 0;
}

// ---------------------------------------------------------------- bound

struct BoundArgs {
  std::string setting = "llp";
  double R = 1.0;
  double K = 1.0;
  std::string loss = "logistic";
  double huber_width = 1.0;
  std::vector<long> n;
  std::vector<double> rho_plus, rho_minus, pi, gamma_plus, gamma_minus, weights;
  std::string weighting = "optimal";
};

int cmd_bound(const Globals& g, const BoundArgs& a) {
  const mcs::MarginLoss loss = mcs::MarginLoss::from_name(a.loss, a.huber_width);
  std::string setting_name = a.setting;
  const bool master = setting_name.rfind("master-", 0) == 0;
  if (master) setting_name = setting_name.substr(7);
  mcs::Setting setting;
  if (setting_name == "common") {
    setting = mcs::Setting::kCommon;
  } else if (setting_name == "varying-priors") {
    setting = mcs::Setting::kVaryingPriors;
  } else if (setting_name == "llp") {
    setting = mcs::Setting::kLlp;
  } else {
    throw InputError("unknown setting '" + a.setting + "'");
  }
  const std::size_t count = a.n.size();
  if (count == 0) throw InputError("bound needs --n with one sample size per source");
  const auto check_len = [&](const std::vector<double>& v, const char* name, bool needed) {
    if (needed && v.size() != count) {
      throw InputError(std::string("--") + name + " needs one value per source (" + std::to_string(count) + ")");
    }
  };
  const bool noisy = setting != mcs::Setting::kLlp;
  check_len(a.rho_plus, "rho-plus", noisy);
  check_len(a.rho_minus, "rho-minus", noisy);
  check_len(a.pi, "pi", setting == mcs::Setting::kVaryingPriors);
  check_len(a.gamma_plus, "gamma-plus", !noisy);
  check_len(a.gamma_minus, "gamma-minus", !noisy);

  mcs::BoundInputs in;
  in.R = a.R;
  in.K = a.K;
  in.L = loss.lipschitz();
  in.phi0 = loss.value_at_zero();
  in.delta = g.delta;
  for (std::size_t i = 0; i < count; ++i) {
    mcs::SourceStats s;
    s.n = a.n[i];
    if (noisy) s.rho = mcs::NoiseRates{a.rho_plus[i], a.rho_minus[i]};
    if (setting == mcs::Setting::kVaryingPriors) s.pi = a.pi[i];
    if (!noisy) s.gamma = std::make_pair(a.gamma_plus[i], a.gamma_minus[i]);
    in.sources.push_back(s);
  }
  if (!a.weights.empty()) {
    check_len(a.weights, "weights", true);
    in.weights = mcs::WeightVector{a.weights};
  } else if (a.weighting == "optimal") {
    in.weights = mcs::source_weights(in.sources, setting);
  } else if (a.weighting == "uniform") {
    in.weights = mcs::uniform_weights(count);
  } else {
    throw InputError("--weighting must be optimal or uniform");
  }

  Manifest m("bound");
  m.set("setting", a.setting);
  m.set("R", a.R);
  m.set("K", a.K);
  m.set("loss", a.loss);
  m.set("delta", g.delta);
  m.set("n", join(a.n));
  m.set("weights", join(in.weights.weights));
  if (noisy) {
    m.set("rho_plus", join(a.rho_plus));
    m.set("rho_minus", join(a.rho_minus));
  }
  if (setting == mcs::Setting::kVaryingPriors) m.set("pi", join(a.pi));
  if (!noisy) {
    m.set("gamma_plus", join(a.gamma_plus));
    m.set("gamma_minus", join(a.gamma_minus));
  }
  m.output("bound.csv");

  double value;
  std::vector<double> terms;
  if (master) {
    const auto constants = mcs::master_constants(in, setting);
    value = mcs::bound_master(in.R, in.K, in.delta, in.weights, constants);
    for (std::size_t i = 0; i < count; ++i) {
      terms.push_back(in.weights[i] * in.weights[i] / static_cast<double>(constants[i].n) * constants[i].lipschitz *
                      constants[i].lipschitz);
    }
  } else {
    value = mcs::bound_for(in, setting);
    terms = mcs::bound_terms(in, setting);
  }

  std::ostringstream csv;
  csv << std::setprecision(17) << "setting,delta,R,bound_value";
  for (std::size_t i = 0; i < count; ++i) csv << ",source_" << (i + 1);
  csv << "\n" << a.setting << "," << g.delta << "," << a.R << "," << value;
  for (double t : terms) csv << "," << t;
  csv << "\n";
  const fs::path dir = prepare_out_dir(g);
  write_output(dir, "bound.csv", m, csv.str());
  m.write(dir);
  std::cout << a.setting << " bound (delta = " << mcs::csv::fmt(g.delta) << "): " << mcs::csv::fmt(value) << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment

const std::set<std::string> kExperimentKeys{
    "dataset_name", "data",           "label_column",   "positive_class",      "synthetic_dim",
    "synthetic_separation", "synthetic_per_class", "bag_sizes", "repetitions", "cv_folds",
    "learning_rates", "decays",       "iterations",     "lambdas",             "bandwidths",
    "train_fraction", "standardize",  "supervised_baseline", "loss",           "huber_width",
    "seed"};

int cmd_experiment(const Globals& g, std::uint64_t seed) {
  if (g.config.empty()) throw InputError("experiment needs --config");
  const FlatConfig c = FlatConfig::load(g.config);
  c.allow_only(kExperimentKeys);
  Manifest m("experiment");
  mcs::ExperimentConfig ec;
  ec.seed = seed;
  ec.delta = g.delta;
  ec.loss = loss_from(c, m);
  ec.bag_sizes = c.integers("bag_sizes", ec.bag_sizes);
  ec.repetitions = static_cast<int>(c.integer("repetitions", ec.repetitions));
  ec.cv_folds = static_cast<int>(c.integer("cv_folds", ec.cv_folds));
  ec.grid.learning_rates = c.numbers("learning_rates", ec.grid.learning_rates);
  ec.grid.decays = c.numbers("decays", ec.grid.decays);
  ec.grid.iterations = c.integers("iterations", ec.grid.iterations);
  ec.grid.lambdas = c.numbers("lambdas", ec.grid.lambdas);
  ec.grid.bandwidths = c.numbers("bandwidths", ec.grid.bandwidths);
  ec.train_fraction = c.number("train_fraction", ec.train_fraction);
  ec.standardize = g.standardize || c.flag("standardize", false);
  ec.supervised_baseline = c.flag("supervised_baseline", false);
  ec.validate();

  mcs::Dataset data;
  if (c.has("data")) {
    if (c.has("synthetic_separation")) throw InputError("set either data or synthetic_*, not both");
    const std::string label = c.required("label_column");
    const std::string positive = c.required("positive_class");
    data = mcs::load_csv(c.path("data"), label, positive);
    ec.dataset_name = c.str("dataset_name", fs::path(c.required("data")).stem().string());
    m.set("data", c.required("data"));
    m.set("label_column", label);
    m.set("positive_class", positive);
  } else {
    const long dim = c.integer("synthetic_dim", 2);
    const double sep = c.number("synthetic_separation", 4.0);
    const long per_class = c.integer("synthetic_per_class", 500);
    data = mcs::synth_gaussians(dim, sep, per_class, mcs::derive_seed(seed, 999));
    ec.dataset_name = c.str("dataset_name", "synthetic");
    m.set("synthetic_dim", std::to_string(dim));
    m.set("synthetic_separation", sep);
    m.set("synthetic_per_class", std::to_string(per_class));
  }
  m.set("dataset_name", ec.dataset_name);
  m.set("bag_sizes", join(ec.bag_sizes));
  m.set("repetitions", std::to_string(ec.repetitions));
  m.set("cv_folds", std::to_string(ec.cv_folds));
  m.set("learning_rates", join(ec.grid.learning_rates));
  m.set("decays", join(ec.grid.decays));
  m.set("iterations", join(ec.grid.iterations));
  m.set("lambdas", join(ec.grid.lambdas));
  m.set("bandwidths", join(ec.grid.bandwidths));
  m.set("train_fraction", ec.train_fraction);
  m.set("standardize", ec.standardize ? "true" : "false");
  m.set("supervised_baseline", ec.supervised_baseline ? "true" : "false");
  m.set("delta", ec.delta);
  m.set("seed", std::to_string(seed));
  m.output("summary.csv");
  m.output("runs.csv");
  m.output("table.txt");

  const mcs::ExperimentReport report = mcs::run_experiment(data, ec);
  const fs::path dir = prepare_out_dir(g);
  std::ostringstream summary, runs, table;
  report.write_summary_csv(summary);
  report.write_runs_csv(runs);
  report.write_table(table);
  write_output(dir, "summary.csv", m, summary.str());
  write_output(dir, "runs.csv", m, runs.str());
  write_output(dir, "table.txt", m, table.str());
  m.write(dir);
  std::cout << table.str();
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string kind = "unbiasedness";
  std::string loss = "logistic";
  double huber_width = 1.0;
  double rho_plus = 0.3;
  double rho_minus = 0.1;
  long samples = 1000000;
  std::vector<double> t_values{-1.0, 0.0, 1.0};
  double separation = 4.0;
  long dim = 2;
  int pairs = 20;
  long bag_size = 32;
  double R = 1.0;
  int trials = 200;
  int probes = 50;
  long holdout = 50000;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const mcs::MarginLoss loss = mcs::MarginLoss::from_name(a.loss, a.huber_width);
  Manifest m("simulate");
  m.set("kind", a.kind);
  m.set("loss", a.loss);
  m.set("seed", std::to_string(g.seed));
  const fs::path dir = prepare_out_dir(g);
  if (a.kind == "unbiasedness") {
    const mcs::NoiseRates rho{a.rho_plus, a.rho_minus};
    rho.validate();
    m.set("rho_plus", a.rho_plus);
    m.set("rho_minus", a.rho_minus);
    m.set("samples", std::to_string(a.samples));
    m.set("t", join(a.t_values));
    m.output("unbiasedness.csv");
    std::ostringstream csv;
    csv << std::setprecision(17) << "t,y,corrected_mean,clean_loss,abs_difference\n";
    std::uint64_t stream = 0;
    double worst = 0.0;
    for (double t : a.t_values) {
      for (int y : {1, -1}) {
        const double mean = mcs::flipped_label_mean(loss, rho, t, y, a.samples, mcs::derive_seed(g.seed, stream++));
        const double clean = loss.value(t, y);
        worst = std::max(worst, std::abs(mean - clean));
        csv << t << "," << y << "," << mean << "," << clean << "," << std::abs(mean - clean) << "\n";
      }
    }
    write_output(dir, "unbiasedness.csv", m, csv.str());
    m.write(dir);
    std::cout << "largest |mean corrected loss - clean loss|: " << mcs::csv::fmt(worst) << "\n";
    return 0;
  }
  if (a.kind == "coverage") {
    mcs::CoverageSpec spec;
    spec.data = {a.dim, a.separation};
    spec.num_pairs = a.pairs;
    spec.bag_size = a.bag_size;
    spec.R = a.R;
    spec.delta = g.delta;
    spec.trials = a.trials;
    spec.probes = a.probes;
    spec.holdout_per_class = a.holdout;
    spec.loss = loss;
    spec.seed = g.seed;
    m.set("dim", std::to_string(a.dim));
    m.set("separation", a.separation);
    m.set("pairs", std::to_string(a.pairs));
    m.set("bag_size", std::to_string(a.bag_size));
    m.set("R", a.R);
    m.set("delta", g.delta);
    m.set("trials", std::to_string(a.trials));
    m.set("probes", std::to_string(a.probes));
    m.set("holdout", std::to_string(a.holdout));
    m.output("coverage.csv");
    const mcs::CoverageResult r = mcs::empirical_coverage(spec);
    std::ostringstream csv;
    csv << std::setprecision(17) << "trial,max_deviation,bound,covered\n";
    for (std::size_t t = 0; t < r.deviations.size(); ++t) {
      csv << t << "," << r.deviations[t] << "," << r.bound << "," << (r.deviations[t] <= r.bound ? 1 : 0) << "\n";
    }
    write_output(dir, "coverage.csv", m, csv.str());
    m.write(dir);
    std::cout << "bound: " << mcs::csv::fmt(r.bound) << "\ncoverage: " << mcs::csv::fmt(r.coverage)
              << " (target >= " << mcs::csv::fmt(1.0 - g.delta) << ")\n";
    return 0;
  }
  throw InputError("--kind must be unbiasedness or coverage");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning from multiple corrupted sources and from label proportions."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed; every random step derives from it")->capture_default_str();
  app.add_option("--config", g.config, "Flat key = value config file (train, experiment)");
  app.add_option("--out-dir", g.out_dir, "Directory for output files and manifest.txt")->capture_default_str();
  app.add_option("--delta", g.delta, "Confidence parameter of the bounds")->capture_default_str();
  app.add_flag("--oracle", g.oracle, "pair: cross-check the matching by exhaustive search (at most 10 bags)");
  app.add_flag("--standardize", g.standardize, "experiment: standardize features on the training split");

  PairArgs pa;
  auto* pair = app.add_subcommand("pair", "Pair bags by maximum-weight perfect matching");
  pair->add_option("--bags", pa.bags, "CSV: bag_id,feature_1..feature_d")->required();
  pair->add_option("--proportions", pa.proportions, "CSV: bag_id,gamma,size")->required();
  pair->add_option("--size-policy", pa.size_policy, "strict or permissive")->capture_default_str();

  auto* train = app.add_subcommand("train", "Pair bags and train a kernel model");
  train->footer(
      "config keys:\n"
      "  bags, proportions          bag files (paths relative to the config file)\n"
      "  size_policy                strict (default) or permissive\n"
      "  loss                       logistic (default), squared or huber; huber_width\n"
      "  bandwidth                  Gaussian kernel exp(-bandwidth*|x-y|^2), default 1\n"
      "  lambda                     regularization, default 0.001\n"
      "  learning_rate, decay       step learning_rate/(1+decay*k), defaults 0.01, 0.001\n"
      "  iterations                 default 800\n"
      "  init                       zeros (default) or gaussian; init_scale\n"
      "  seed                       used when --seed is not given");

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Evaluate a generalization bound");
  bound->add_option("--setting", ba.setting, "common, varying-priors, llp, or master-<setting>")->capture_default_str();
  bound->add_option("--R", ba.R, "Radius of the function class")->capture_default_str();
  bound->add_option("--K", ba.K, "Kernel bound")->capture_default_str();
  bound->add_option("--loss", ba.loss, "Base loss")->capture_default_str();
  bound->add_option("--huber-width", ba.huber_width, "Width of the huber loss");
  bound->add_option("--n", ba.n, "Sample size per source")->delimiter(',')->required();
  bound->add_option("--rho-plus", ba.rho_plus, "Per-source rho+")->delimiter(',');
  bound->add_option("--rho-minus", ba.rho_minus, "Per-source rho-")->delimiter(',');
  bound->add_option("--pi", ba.pi, "Per-source class prior")->delimiter(',');
  bound->add_option("--gamma-plus", ba.gamma_plus, "Per-pair gamma+")->delimiter(',');
  bound->add_option("--gamma-minus", ba.gamma_minus, "Per-pair gamma-")->delimiter(',');
  bound->add_option("--weights", ba.weights, "Explicit source weights")->delimiter(',');
  bound->add_option("--weighting", ba.weighting, "optimal or uniform, when --weights is absent")
      ->capture_default_str();

  auto* experiment = app.add_subcommand("experiment", "Run the repeated bag-size experiment");
  experiment->footer(
      "config keys:\n"
      "  data, label_column, positive_class   CSV input (positive_class is required)\n"
      "  synthetic_dim, synthetic_separation, synthetic_per_class   Gaussian data instead\n"
      "  dataset_name\n"
      "  bag_sizes                  default 2,4,8,16,32,64\n"
      "  repetitions, cv_folds      defaults 5, 5\n"
      "  learning_rates             default 0.1,0.01,0.001\n"
      "  decays                     default 0.01,0.001,0.0001\n"
      "  iterations                 default 100,800,1600,3200\n"
      "  lambdas                    default 0.001,0\n"
      "  bandwidths                 default 0.001,0.1,1\n"
      "  train_fraction             default 0.8\n"
      "  standardize                true/false, default false\n"
      "  supervised_baseline        true/false, default false\n"
      "  loss, huber_width, seed");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo checks: unbiasedness or bound coverage");
  simulate->add_option("--kind", sa.kind, "unbiasedness or coverage")->capture_default_str();
  simulate->add_option("--loss", sa.loss, "Base loss")->capture_default_str();
  simulate->add_option("--huber-width", sa.huber_width, "Width of the huber loss");
  simulate->add_option("--rho-plus", sa.rho_plus, "unbiasedness: rho+")->capture_default_str();
  simulate->add_option("--rho-minus", sa.rho_minus, "unbiasedness: rho-")->capture_default_str();
  simulate->add_option("--samples", sa.samples, "unbiasedness: flips per (t, y)")->capture_default_str();
  simulate->add_option("--t", sa.t_values, "unbiasedness: scores")->delimiter(',');
  simulate->add_option("--separation", sa.separation, "coverage: distance between class means")
      ->capture_default_str();
  simulate->add_option("--dim", sa.dim, "coverage: dimension")->capture_default_str();
  simulate->add_option("--pairs", sa.pairs, "coverage: bag pairs per trial")->capture_default_str();
  simulate->add_option("--bag-size", sa.bag_size, "coverage: instances per bag")->capture_default_str();
  simulate->add_option("--R", sa.R, "coverage: radius")->capture_default_str();
  simulate->add_option("--trials", sa.trials, "coverage: trials")->capture_default_str();
  simulate->add_option("--probes", sa.probes, "coverage: probe functions")->capture_default_str();
  simulate->add_option("--holdout", sa.holdout, "coverage: holdout points per class")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto seed_for = [&](const std::string& cfg_path) -> std::uint64_t {
      if (app.count("--seed") > 0 || cfg_path.empty()) return g.seed;
      const FlatConfig c = FlatConfig::load(cfg_path);
      return static_cast<std::uint64_t>(c.integer("seed", static_cast<long>(g.seed)));
    };
    if (*pair) return cmd_pair(g, pa);
    if (*train) return cmd_train(g, seed_for(g.config));
    if (*bound) return cmd_bound(g, ba);
    if (*experiment) return cmd_experiment(g, seed_for(g.config));
    if (*simulate) return cmd_simulate(g, sa);
  } catch (const mcs::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mcs::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mcs::UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
