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

namespace fedproto::kernels::omp {

Matrix pairwise_sq_distances(const Matrix& points, const Matrix& centers) {
  Matrix out(points.rows(), centers.rows());
  const Eigen::Index n = points.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::distance_row(points, centers, i, out.row(i).data());
  }
  return out;
}

Nearest assign_nearest(const Matrix& points, const Matrix& centers) {
  Nearest out;
  out.index.resize(static_cast<std::size_t>(points.rows()));
  out.sq_distance.resize(static_cast<std::size_t>(points.rows()));
  const Eigen::Index n = points.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::nearest_row(points, centers, i, out.index[i], out.sq_distance[i]);
  }
  return out;
}

Matrix project_rows(const SparseRatings& x, const Matrix& gaussian_t, double scale) {
  Matrix out(static_cast<Eigen::Index>(x.n_rows()), gaussian_t.cols());
  const auto n = static_cast<std::ptrdiff_t>(x.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    detail::project_row(x.row(static_cast<std::size_t>(r)), gaussian_t, scale,
                        out.row(static_cast<Eigen::Index>(r)).data());
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
  const auto n = static_cast<std::ptrdiff_t>(rows.n_rows());
#pragma omp parallel
  {
    detail::NnlsWorkspace ws(fixed.cols());
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      const auto row = static_cast<std::size_t>(r);
      sweeps[row] = detail::nnls_row(rows.row(row), fixed, implicit ? &shared : nullptr,
                                     settings, factors.row(static_cast<Eigen::Index>(r)).data(),
                                     ws);
    }
  }
  return sweeps;
}

std::vector<double> row_sq_residuals(const SparseRatings& x, const Matrix& user,
                                     const Matrix& item) {
  std::vector<double> out(x.n_rows());
  const auto n = static_cast<std::ptrdiff_t>(x.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    out[static_cast<std::size_t>(r)] =
        detail::row_residual(x, user, item, static_cast<std::size_t>(r));
  }
  return out;
}

}  // namespace fedproto::kernels::omp
