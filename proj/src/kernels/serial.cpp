// Copyright 2026 The fedproto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "row_ops.hpp"

namespace fedproto::kernels {

double ordered_sum(const std::vector<double>& parts) {
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

double kmeans_loss(const Matrix& points, const Matrix& centers, Exec exec) {
  if (centers.rows() == 0) throw ParameterError("kmeans_loss: no centers");
  return ordered_sum(assign_nearest(points, centers, exec).sq_distance);
}

namespace serial {

Matrix pairwise_sq_distances(const Matrix& points, const Matrix& centers) {
  Matrix out(points.rows(), centers.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    detail::distance_row(points, centers, i, out.row(i).data());
  }
  return out;
}

Nearest assign_nearest(const Matrix& points, const Matrix& centers) {
  Nearest out;
  out.index.resize(static_cast<std::size_t>(points.rows()));
  out.sq_distance.resize(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    detail::nearest_row(points, centers, i, out.index[i], out.sq_distance[i]);
  }
  return out;
}

Matrix project_rows(const SparseRatings& x, const Matrix& gaussian_t, double scale) {
  Matrix out(static_cast<Eigen::Index>(x.n_rows()), gaussian_t.cols());
  for (std::size_t r = 0; r < x.n_rows(); ++r) {
    detail::project_row(x.row(r), gaussian_t, scale, out.row(static_cast<Eigen::Index>(r)).data());
  }
  return out;
}

std::vector<int> solve_nnls_rows(const SparseRatings& rows, const Matrix& fixed,
                                 const NnlsSettings& settings, Matrix& factors) {
  detail::check_nnls_shapes(rows, fixed, factors);
  Eigen::MatrixXd shared;
  const bool implicit = rows.semantics() == MaskSemantics::kImplicitZeros;
  if (implicit) shared = detail::full_gram(fixed, settings.reg);
  std::vector<int> sweeps(rows.n_rows());
  detail::NnlsWorkspace ws(fixed.cols());
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    sweeps[r] = detail::nnls_row(rows.row(r), fixed, implicit ? &shared : nullptr, settings,
                                 factors.row(static_cast<Eigen::Index>(r)).data(), ws);
  }
  return sweeps;
}

std::vector<double> row_sq_residuals(const SparseRatings& x, const Matrix& user,
                                     const Matrix& item) {
  std::vector<double> out(x.n_rows());
  for (std::size_t r = 0; r < x.n_rows(); ++r) out[r] = detail::row_residual(x, user, item, r);
  return out;
}

}  // namespace serial
}  // namespace fedproto::kernels
