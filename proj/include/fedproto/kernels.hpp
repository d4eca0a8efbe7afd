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

#pragma once

// Data-parallel inner loops.
//
// Every kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::omp` with the same signature. Both call the same
// per-row routine and reduce partial results in row order on the calling
// thread, so they agree bitwise; tests hold them to that and bench/ compares
// their speed.

#include <cstddef>
#include <vector>

#include "fedproto/core.hpp"

namespace fedproto::kernels {

enum class Exec { kSerial, kParallel };

struct Nearest {
  std::vector<std::size_t> index;   // nearest center per point (first on ties)
  std::vector<double> sq_distance;  // squared distance to it
};

struct NnlsSettings {
  double reg = 0.0;        // ridge weight on the solved rows
  int max_sweeps = 50;     // coordinate-descent sweeps per row
  double tolerance = 1e-10;  // stop when max |step| <= tolerance * max |u|
};

#define FEDPROTO_KERNEL_DECLS                                                              \
  /* points n x p, centers c x p -> n x c squared Euclidean distances */                   \
  Matrix pairwise_sq_distances(const Matrix& points, const Matrix& centers);               \
  Nearest assign_nearest(const Matrix& points, const Matrix& centers);                     \
  /* scale * x * gaussian_t, gaussian_t is m x p */                                        \
  Matrix project_rows(const SparseRatings& x, const Matrix& gaussian_t, double scale);     \
  /* For each row i of `rows`, minimize sum over its training cells of                     \
     (x_ij - f_i . fixed_j)^2 + reg |f_i|^2 subject to f_i >= 0, warm-started from         \
     factors.row(i). Returns the per-row sweep counts. */                                  \
  std::vector<int> solve_nnls_rows(const SparseRatings& rows, const Matrix& fixed,         \
                                   const NnlsSettings& settings, Matrix& factors);         \
  /* Per-row sum of squared residuals over training cells. */                              \
  std::vector<double> row_sq_residuals(const SparseRatings& x, const Matrix& user,         \
                                       const Matrix& item);

namespace serial {
FEDPROTO_KERNEL_DECLS
}  // namespace serial

namespace omp {
FEDPROTO_KERNEL_DECLS
}  // namespace omp

#undef FEDPROTO_KERNEL_DECLS

inline Matrix pairwise_sq_distances(const Matrix& points, const Matrix& centers, Exec exec) {
  return exec == Exec::kSerial ? serial::pairwise_sq_distances(points, centers)
                               : omp::pairwise_sq_distances(points, centers);
}

inline Nearest assign_nearest(const Matrix& points, const Matrix& centers, Exec exec) {
  return exec == Exec::kSerial ? serial::assign_nearest(points, centers)
                               : omp::assign_nearest(points, centers);
}

inline Matrix project_rows(const SparseRatings& x, const Matrix& gaussian_t, double scale,
                           Exec exec) {
  return exec == Exec::kSerial ? serial::project_rows(x, gaussian_t, scale)
                               : omp::project_rows(x, gaussian_t, scale);
}

inline std::vector<int> solve_nnls_rows(const SparseRatings& rows, const Matrix& fixed,
                                        const NnlsSettings& settings, Matrix& factors,
                                        Exec exec) {
  return exec == Exec::kSerial ? serial::solve_nnls_rows(rows, fixed, settings, factors)
                               : omp::solve_nnls_rows(rows, fixed, settings, factors);
}

inline std::vector<double> row_sq_residuals(const SparseRatings& x, const Matrix& user,
                                            const Matrix& item, Exec exec) {
  return exec == Exec::kSerial ? serial::row_sq_residuals(x, user, item)
                               : omp::row_sq_residuals(x, user, item);
}

// Sum in row order; shared by both backends so totals match bitwise.
double ordered_sum(const std::vector<double>& parts);

// Sum over points of the squared distance to the nearest center.
double kmeans_loss(const Matrix& points, const Matrix& centers, Exec exec);

}  // namespace fedproto::kernels
