// Copyright 2026 The Whyact Authors.
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

#include "whyact/pca.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "whyact/error.h"

namespace whyact {

PcaProjection PcaFit(const Matrix &rows, int k) {
  const int n = rows.rows;
  const int d = rows.cols;
  if (n < 2 || d < 1) {
    throw Error(ErrorCode::kDataError, "PCA needs at least two vectors");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "PCA dimension must be positive");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> x(rows.data.data(), n, d);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  if (centered.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kDataError, "PCA input has zero variance (all vectors identical)");
  }

  // Eigenvectors of the covariance, largest first. When there are fewer
  // samples than dimensions, go through the n x n Gram matrix instead.
  Eigen::MatrixXd vectors;  // d x r
  Eigen::VectorXd values;   // r
  const double denom = static_cast<double>(n - 1);
  if (n <= d) {
    const Eigen::MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    // Centring removes one degree of freedom.
    const int usable = std::min(n - 1, d);
    const double floor = std::max(1e-12 * ev(0), 0.0);
    int r = 0;
    while (r < usable && ev(r) > floor) ++r;
    vectors.resize(d, r);
    values.resize(r);
    for (int i = 0; i < r; ++i) {
      Eigen::VectorXd v = centered.transpose() * u.col(i);
      vectors.col(i) = v / v.norm();
      values(i) = ev(i);
    }
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    values = es.eigenvalues().reverse();
    vectors = es.eigenvectors().rowwise().reverse();
  }

  PcaProjection p;
  p.mean.assign(mean.data(), mean.data() + d);
  p.components = Matrix(k, d);
  p.explained_variance.assign(k, 0.0);
  const int real = std::min<int>(k, static_cast<int>(values.size()));
  for (int i = 0; i < real; ++i) {
    Eigen::VectorXd v = vectors.col(i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (int j = 0; j < d; ++j) p.components(i, j) = v(j);
    // Round-off can leave tiny negatives on rank-deficient data.
    p.explained_variance[i] = std::max(values(i), 0.0);
  }
  p.padded_components = k - real;
  return p;
}

std::vector<double> PcaApply(const PcaProjection &p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.input_dim()) {
    throw Error(ErrorCode::kInvalidArgument, "PCA input has dimension " + std::to_string(x.size()) +
                                                 ", expected " + std::to_string(p.input_dim()));
  }
  std::vector<double> centered(x.size());
  for (size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - p.mean[j];
  std::vector<double> out(p.output_dim());
  for (int i = 0; i < p.output_dim(); ++i) out[i] = Dot(p.components.row(i), centered);
  return out;
}

}  // namespace whyact
