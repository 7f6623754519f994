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

#ifndef MCS_KERNEL_HPP_
#define MCS_KERNEL_HPP_

// Gaussian kernel k(x, x') = exp(-bandwidth * |x - x'|^2) and functions in
// representer form f(x) = sum_i c_i k(x, anchor_i). Point sets are Eigen
// matrices with one point per row.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcs/error.hpp"

namespace mcs {

using Points = Eigen::MatrixXd;

struct KernelSpec {
  double bandwidth = 1.0;

  // sup_x sqrt(k(x, x)); 1 for the Gaussian kernel.
  double bound() const { return 1.0; }

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw InputError("kernel bandwidth must be positive and finite");
    }
  }

  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    return std::exp(-bandwidth * (x - y).squaredNorm());
  }
};

inline void check_dims(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    std::ostringstream os;
    os << "feature dimension mismatch: " << a << " vs " << b;
    throw InputError(os.str());
  }
}

// Entry (i, j) = k(x.row(i), y.row(j)).
inline Eigen::MatrixXd gram(const Points& x, const Points& y, const KernelSpec& kernel) {
  kernel.validate();
  check_dims(x.cols(), y.cols());
  Eigen::MatrixXd g(x.rows(), y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      g(i, j) = kernel(x.row(i), y.row(j));
    }
  }
  return g;
}

// Symmetric Gram matrix of one point set; the diagonal is exactly 1.
inline Eigen::MatrixXd gram(const Points& x, const KernelSpec& kernel) {
  kernel.validate();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel(x.row(i), x.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

struct KernelModel {
  Points anchors;
  Eigen::VectorXd coefficients;
  KernelSpec kernel;

  void validate() const {
    if (anchors.rows() != coefficients.size()) {
      throw InputError("kernel model needs one coefficient per anchor");
    }
    kernel.validate();
  }
};

// f(x) for a single point given as a column vector.
inline double evaluate(const KernelModel& model, const Eigen::VectorXd& x) {
  model.validate();
  check_dims(x.size(), model.anchors.cols());
  double f = 0.0;
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    f += model.coefficients[i] * model.kernel(model.anchors.row(i), x.transpose());
  }
  return f;
}

// Decision values at every row of `points`.
inline Eigen::VectorXd evaluate_all(const KernelModel& model, const Points& points) {
  model.validate();
  return gram(points, model.anchors, model.kernel) * model.coefficients;
}

// c^T G c, clamped to 0 when rounding leaves it slightly negative.
inline double rkhs_norm_sq(const KernelModel& model, const Eigen::MatrixXd& anchor_gram) {
  const double v = model.coefficients.dot(anchor_gram * model.coefficients);
  const double tol = 1e-9 * std::max(1.0, model.coefficients.squaredNorm());
  return (v < 0.0 && v >= -tol) ? 0.0 : v;
}

inline double rkhs_norm_sq(const KernelModel& model) {
  model.validate();
  return rkhs_norm_sq(model, gram(model.anchors, model.kernel));
}

}  // namespace mcs

#endif  // MCS_KERNEL_HPP_
