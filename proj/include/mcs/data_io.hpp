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

#ifndef MCS_DATA_IO_HPP_
#define MCS_DATA_IO_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcs/csv.hpp"
#include "mcs/error.hpp"
#include "mcs/kernel.hpp"
#include "mcs/llp_model.hpp"
#include "mcs/losses.hpp"
#include "mcs/rng.hpp"

namespace mcs {

struct Dataset {
  Points features;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;
  // Original label values in order of first appearance, and the one mapped to +1.
  std::vector<std::string> class_names;
  std::string positive_class;

  long size() const { return static_cast<long>(features.rows()); }
  long dim() const { return static_cast<long>(features.cols()); }

  const std::vector<int>& labels_or_throw() const {
    if (!labels) throw InputError("dataset has no labels");
    return *labels;
  }

  double prior() const {
    const auto& y = labels_or_throw();
    if (y.empty()) throw InputError("dataset is empty");
    return static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
  }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.features.row(i) = features.row(rows[i]);
    if (labels) {
      out.labels.emplace();
      for (std::size_t r : rows) out.labels->push_back((*labels)[r]);
    }
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.positive_class = positive_class;
    return out;
  }
};

inline Dataset load_csv(std::istream& is, const std::string& label_column, const std::string& positive_class) {
  const auto rows = csv::read_rows(is);
  if (rows.empty()) throw InputError("input file is empty");
  const std::vector<std::string>& header = rows.front().second;
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end()) throw InputError("label column '" + label_column + "' not found in header");
  const std::size_t label_idx = static_cast<std::size_t>(it - header.begin());
  if (rows.size() < 2) throw InputError("input file has a header but no data rows");

  Dataset d;
  d.positive_class = positive_class;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k != label_idx) d.feature_names.push_back(header[k]);
  }
  const long n = static_cast<long>(rows.size()) - 1;
  d.features.resize(n, static_cast<Eigen::Index>(header.size()) - 1);
  d.labels.emplace();
  bool saw_positive = false;
  for (long r = 0; r < n; ++r) {
    const auto& [lineno, cells] = rows[r + 1];
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "row " << (r + 1) << " (line " << lineno << ") has " << cells.size() << " cells, expected "
         << header.size();
      throw InputError(os.str());
    }
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k == label_idx) continue;
      try {
        d.features(r, col) = csv::parse_double(cells[k], "a number");
      } catch (const InputError&) {
        std::ostringstream os;
        os << "non-numeric feature at row " << (r + 1) << " (line " << lineno << "), column '" << header[k]
           << "': '" << cells[k] << "'";
        throw InputError(os.str());
      }
      if (!std::isfinite(d.features(r, col))) {
        std::ostringstream os;
        os << "non-finite feature at row " << (r + 1) << ", column '" << header[k] << "'";
        throw InputError(os.str());
      }
      ++col;
    }
    const std::string& label = cells[label_idx];
    if (std::find(d.class_names.begin(), d.class_names.end(), label) == d.class_names.end()) {
      d.class_names.push_back(label);
    }
    const bool pos = label == positive_class;
    saw_positive = saw_positive || pos;
    d.labels->push_back(pos ? 1 : -1);
  }
  if (!saw_positive) throw InputError("positive class '" + positive_class + "' does not occur in the label column");
  return d;
}

inline Dataset load_csv(const std::string& path, const std::string& label_column, const std::string& positive_class) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path);
  return load_csv(is, label_column, positive_class);
}

inline std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must lie in (0,1)");
  const long n = data.size();
  const long n_train = static_cast<long>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  if (n_train < 1 || n_train >= n) {
    std::ostringstream os;
    os << "split of " << n << " rows at fraction " << train_fraction << " leaves an empty side";
    throw InputError(os.str());
  }
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n));
  std::vector<std::size_t> tr(perm.begin(), perm.begin() + n_train);
  std::vector<std::size_t> te(perm.begin() + n_train, perm.end());
  return {data.subset(tr), data.subset(te)};
}

// Zero mean and unit variance per column, fitted on one dataset and applied
// to others.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Points& x) {
    if (x.rows() == 0) throw InputError("cannot standardize an empty dataset");
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale.resize(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double sd = std::sqrt((x.col(k).array() - s.mean[k]).square().mean());
      s.scale[k] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  Points apply(const Points& x) const {
    check_dims(x.cols(), mean.size());
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

inline std::vector<Bag> make_bags(const Dataset& train, long bag_size, std::uint64_t seed) {
  const auto& y = train.labels_or_throw();
  if (bag_size < 1) throw InputError("bag size must be at least 1");
  if (bag_size > train.size()) {
    std::ostringstream os;
    os << "bag size " << bag_size << " exceeds the " << train.size() << " training rows";
    throw InputError(os.str());
  }
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(train.size()));
  const long count = train.size() / bag_size;
  std::vector<Bag> bags;
  bags.reserve(count);
  for (long b = 0; b < count; ++b) {
    Bag bag;
    bag.id = "b" + std::to_string(b);
    bag.instances.resize(bag_size, train.dim());
    bag.hidden_labels.emplace();
    long pos = 0;
    for (long j = 0; j < bag_size; ++j) {
      const std::size_t r = perm[static_cast<std::size_t>(b * bag_size + j)];
      bag.instances.row(j) = train.features.row(r);
      bag.hidden_labels->push_back(y[r]);
      pos += (y[r] == 1);
    }
    bag.gamma = static_cast<double>(pos) / static_cast<double>(bag_size);
    bags.push_back(std::move(bag));
  }
  return bags;
}

struct NoisyLabels {
  std::vector<int> labels;
  std::vector<char> flipped;
};

inline NoisyLabels inject_noise(const std::vector<int>& clean, const NoiseRates& rho, std::uint64_t seed) {
  rho.validate();
  Rng rng(seed);
  NoisyLabels out;
  out.labels.reserve(clean.size());
  out.flipped.reserve(clean.size());
  for (int y : clean) {
    check_label(y);
    const bool flip = rng.uniform() < (y == 1 ? rho.plus : rho.minus);
    out.labels.push_back(flip ? -y : y);
    out.flipped.push_back(flip ? 1 : 0);
  }
  return out;
}

inline NoisyLabels inject_noise(const Dataset& data, const NoiseRates& rho, std::uint64_t seed) {
  return inject_noise(data.labels_or_throw(), rho, seed);
}

// N(center * e1, I) in `dim` dimensions.
inline Sampler gaussian_sampler(long dim, double center) {
  if (dim < 1) throw InputError("dimension must be at least 1");
  return [dim, center](Rng& rng) {
    Eigen::VectorXd x(dim);
    for (long k = 0; k < dim; ++k) x[k] = rng.normal();
    x[0] += center;
    return x;
  };
}

// Two unit-covariance Gaussians whose means are `separation` apart along e1.
struct GaussianPair {
  long dim = 2;
  double separation = 4.0;

  Sampler positive() const { return gaussian_sampler(dim, separation / 2.0); }
  Sampler negative() const { return gaussian_sampler(dim, -separation / 2.0); }
};

// Bayes balanced error of the pair: Phi(-separation / 2).
inline double bayes_ber(double separation) {
  if (!(separation >= 0.0)) throw InputError("separation must be nonnegative");
  return 0.5 * std::erfc(separation / 2.0 / std::sqrt(2.0));
}

inline Dataset synth_gaussians(long dim, double separation, long n_per_class, std::uint64_t seed) {
  if (!(separation >= 0.0)) throw InputError("separation must be nonnegative");
  if (n_per_class < 1) throw InputError("need at least one point per class");
  const GaussianPair g{dim, separation};
  const Sampler pos = g.positive();
  const Sampler neg = g.negative();
  Rng rng(seed);
  Dataset d;
  d.features.resize(2 * n_per_class, dim);
  d.labels.emplace();
  for (long i = 0; i < 2 * n_per_class; ++i) {
    const int y = i < n_per_class ? 1 : -1;
    d.features.row(i) = (y == 1 ? pos(rng) : neg(rng)).transpose();
    d.labels->push_back(y);
  }
  for (long k = 0; k < dim; ++k) d.feature_names.push_back("x" + std::to_string(k + 1));
  d.class_names = {"pos", "neg"};
  d.positive_class = "pos";
  std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(2 * n_per_class));
  return d.subset(perm);
}

// Bag files: instance rows `bag_id,feature_1..feature_d` and a proportions
// sidecar `bag_id,gamma,size`. Bags come back in sidecar order.
inline void write_bags(std::ostream& os, const std::vector<Bag>& bags) {
  if (bags.empty()) throw InputError("no bags to write");
  os << "bag_id";
  for (Eigen::Index k = 0; k < bags.front().instances.cols(); ++k) os << ",feature_" << (k + 1);
  os << "\n";
  os << std::setprecision(17);
  for (const Bag& b : bags) {
    for (Eigen::Index i = 0; i < b.instances.rows(); ++i) {
      os << b.id;
      for (Eigen::Index k = 0; k < b.instances.cols(); ++k) os << "," << b.instances(i, k);
      os << "\n";
    }
  }
}

inline void write_proportions(std::ostream& os, const std::vector<Bag>& bags) {
  os << "bag_id,gamma,size\n" << std::setprecision(17);
  for (const Bag& b : bags) os << b.id << "," << b.gamma << "," << b.size() << "\n";
}

inline std::vector<Bag> read_bags(std::istream& instances, std::istream& proportions) {
  const auto prow = csv::read_rows(proportions);
  if (prow.empty() || prow.front().second != std::vector<std::string>{"bag_id", "gamma", "size"}) {
    throw InputError("proportions file needs the header 'bag_id,gamma,size'");
  }
  std::vector<Bag> bags;
  std::map<std::string, std::size_t> index;
  std::vector<long> declared;
  for (std::size_t r = 1; r < prow.size(); ++r) {
    const auto& [lineno, cells] = prow[r];
    if (cells.size() != 3) throw InputError("proportions line " + std::to_string(lineno) + ": expected 3 cells");
    if (index.count(cells[0])) throw InputError("duplicate bag id '" + cells[0] + "' in proportions file");
    Bag b;
    b.id = cells[0];
    b.gamma = csv::parse_double(cells[1], "gamma for bag '" + b.id + "'");
    if (!(b.gamma >= 0.0 && b.gamma <= 1.0)) throw InputError("bag '" + b.id + "' has gamma outside [0,1]");
    declared.push_back(csv::parse_long(cells[2], "size for bag '" + b.id + "'"));
    index[b.id] = bags.size();
    bags.push_back(std::move(b));
  }
  if (bags.empty()) throw InputError("proportions file lists no bags");

  const auto irow = csv::read_rows(instances);
  if (irow.empty() || irow.front().second.empty() || irow.front().second[0] != "bag_id") {
    throw InputError("bag file needs a header starting with 'bag_id'");
  }
  const std::size_t width = irow.front().second.size();
  if (width < 2) throw InputError("bag file has no feature columns");
  std::vector<std::vector<std::vector<double>>> rows(bags.size());
  for (std::size_t r = 1; r < irow.size(); ++r) {
    const auto& [lineno, cells] = irow[r];
    if (cells.size() != width) {
      throw InputError("bag file line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " cells");
    }
    const auto it = index.find(cells[0]);
    if (it == index.end()) throw InputError("bag id '" + cells[0] + "' is missing from the proportions file");
    std::vector<double> x;
    for (std::size_t k = 1; k < width; ++k) {
      x.push_back(csv::parse_double(cells[k], "feature on bag file line " + std::to_string(lineno)));
    }
    rows[it->second].push_back(std::move(x));
  }
  for (std::size_t b = 0; b < bags.size(); ++b) {
    if (static_cast<long>(rows[b].size()) != declared[b]) {
      std::ostringstream os;
      os << "bag '" << bags[b].id << "' declares size " << declared[b] << " but has " << rows[b].size()
         << " instances";
      throw InputError(os.str());
    }
    bags[b].instances.resize(declared[b], static_cast<Eigen::Index>(width - 1));
    for (long i = 0; i < declared[b]; ++i) {
      for (std::size_t k = 0; k + 1 < width; ++k) bags[b].instances(i, k) = rows[b][i][k];
    }
    bags[b].validate();
  }
  return bags;
}

inline std::vector<Bag> read_bags(const std::string& instances_path, const std::string& proportions_path) {
  std::ifstream bi(instances_path);
  if (!bi) throw InputError("cannot open " + instances_path);
  std::ifstream pi(proportions_path);
  if (!pi) throw InputError("cannot open " + proportions_path);
  return read_bags(bi, pi);
}

inline void write_pairing(std::ostream& os, const Pairing& pairing, const std::vector<double>& weights) {
  if (weights.size() != pairing.pairs.size()) throw InputError("one weight per pair is required");
  os << "pair_id,pos_bag_id,neg_bag_id,gamma_plus,gamma_minus,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < pairing.pairs.size(); ++i) {
    const BagPair& p = pairing.pairs[i];
    os << i << "," << p.pos_bag.id << "," << p.neg_bag.id << "," << p.gamma_plus << "," << p.gamma_minus << ","
       << weights[i] << "\n";
  }
}

}  // namespace mcs

#endif  // MCS_DATA_IO_HPP_
