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

#include <algorithm>
#include <cmath>

#include "fedproto/clustering.hpp"

namespace fedproto::clustering {

double log_n(std::size_t n) { return std::log(static_cast<double>(std::max<std::size_t>(n, 2))); }

ProjectedData jl_project(const SparseRatings& x, std::size_t p, RngStream& rng,
                         kernels::Exec exec) {
  if (p < 1) throw ParameterError("jl_project: p must be at least 1");
  Matrix g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(x.n_cols()));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  return jl_project_with(x, std::move(g), exec);
}

ProjectedData jl_project_with(const SparseRatings& x, Matrix gaussian, kernels::Exec exec) {
  if (gaussian.rows() < 1) throw ParameterError("jl_project: p must be at least 1");
  if (static_cast<std::size_t>(gaussian.cols()) != x.n_cols()) {
    throw ParameterError("jl_project: projection has " + std::to_string(gaussian.cols()) +
                         " columns, data has " + std::to_string(x.n_cols()));
  }
  ProjectedData out;
  const Matrix gt = gaussian.transpose();
  out.points = kernels::project_rows(x, gt, 1.0 / std::sqrt(static_cast<double>(gaussian.rows())),
                                     exec);
  out.gaussian = std::move(gaussian);
  return out;
}

}  // namespace fedproto::clustering
