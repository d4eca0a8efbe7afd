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

// Per-row bodies shared by the serial and OpenMP kernel drivers.

#include <algorithm>
#include <cmath>
#include <span>

#include "fedproto/kernels.hpp"

namespace fedproto::kernels::detail {

inline double sq_distance(const double* a, const double* b, Eigen::Index dim) {
  double acc = 0.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

inline void distance_row(const Matrix& points, const Matrix& centers, Eigen::Index i,
                         double* out) {
  const Eigen::Index dim = points.cols();
  const double* p = points.row(i).data();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    out[c] = sq_distance(p, centers.row(c).data(), dim);
  }
}

inline void nearest_row(const Matrix& points, const Matrix& centers, Eigen::Index i,
                        std::size_t& index, double& distance) {
  const Eigen::Index dim = points.cols();
  const double* p = points.row(i).data();
  index = 0;
  distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = sq_distance(p, centers.row(c).data(), dim);
    if (d < distance) {
      distance = d;
      index = static_cast<std::size_t>(c);
    }
  }
}

inline void project_row(std::span<const Entry> row, const Matrix& gaussian_t, double scale,
                        double* out) {
  const Eigen::Index dim = gaussian_t.cols();
  std::fill(out, out + dim, 0.0);
  for (const Entry& e : row) {
    const double* g = gaussian_t.row(static_cast<Eigen::Index>(e.col)).data();
    for (Eigen::Index d = 0; d < dim; ++d) out[d] += e.value * g[d];
  }
  for (Eigen::Index d = 0; d < dim; ++d) out[d] *= scale;
}

struct NnlsWorkspace {
  explicit NnlsWorkspace(Eigen::Index rank)
      : gram(rank, rank), rhs(rank), gram_u(rank) {}
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  Eigen::VectorXd gram_u;
};

// Gram matrix of all rows of `fixed` plus reg * I; shared by every row when
// absent cells are zeros.
inline Eigen::MatrixXd full_gram(const Matrix& fixed, double reg) {
  Eigen::MatrixXd gram = fixed.transpose() * fixed;
  gram.diagonal().array() += reg;
  return gram;
}

// Projected coordinate descent on 0.5 u'Gu - b'u, u >= 0. Each coordinate
// step is an exact line minimization, so the objective never increases.
inline int nnls_row(std::span<const Entry> row, const Matrix& fixed,
                    const Eigen::MatrixXd* shared_gram, const NnlsSettings& settings,
                    double* u_data, NnlsWorkspace& ws) {
  const Eigen::Index rank = fixed.cols();
  Eigen::Map<Eigen::VectorXd> u(u_data, rank);

  ws.rhs.setZero();
  for (const Entry& e : row) {
    ws.rhs += e.value * fixed.row(static_cast<Eigen::Index>(e.col)).transpose();
  }
  const Eigen::MatrixXd* gram = shared_gram;
  if (gram == nullptr) {
    ws.gram.setZero();
    for (const Entry& e : row) {
      const auto f = fixed.row(static_cast<Eigen::Index>(e.col));
      ws.gram.noalias() += f.transpose() * f;
    }
    ws.gram.diagonal().array() += settings.reg;
    gram = &ws.gram;
  }
  ws.gram_u.noalias() = (*gram) * u;

  int sweep = 0;
  while (sweep < settings.max_sweeps) {
    ++sweep;
    double max_step = 0.0;
    for (Eigen::Index l = 0; l < rank; ++l) {
      const double curvature = (*gram)(l, l);
      if (!(curvature > 0.0)) continue;
      const double grad = ws.gram_u(l) - ws.rhs(l);
      const double next = std::max(0.0, u(l) - grad / curvature);
      const double step = next - u(l);
      if (step != 0.0) {
        ws.gram_u.noalias() += step * gram->col(l);
        u(l) = next;
        max_step = std::max(max_step, std::abs(step));
      }
    }
    const double scale = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    if (max_step <= settings.tolerance * scale || max_step == 0.0) break;
  }
  return sweep;
}

inline double row_residual(const SparseRatings& x, const Matrix& user, const Matrix& item,
                           std::size_t r) {
  const auto u = user.row(static_cast<Eigen::Index>(r));
  const auto cells = x.row(r);
  double acc = 0.0;
  if (x.semantics() == MaskSemantics::kImplicitZeros) {
    auto it = cells.begin();
    for (std::size_t c = 0; c < x.n_cols(); ++c) {
      double truth = 0.0;
      if (it != cells.end() && it->col == c) {
        truth = it->value;
        ++it;
      }
      const double diff = truth - u.dot(item.row(static_cast<Eigen::Index>(c)));
      acc += diff * diff;
    }
  } else {
    for (const Entry& e : cells) {
      const double diff = e.value - u.dot(item.row(static_cast<Eigen::Index>(e.col)));
      acc += diff * diff;
    }
  }
  return acc;
}

inline void check_nnls_shapes(const SparseRatings& rows, const Matrix& fixed,
                              const Matrix& factors) {
  if (static_cast<std::size_t>(fixed.rows()) != rows.n_cols() ||
      static_cast<std::size_t>(factors.rows()) != rows.n_rows() ||
      factors.cols() != fixed.cols()) {
    throw ParameterError("solve_nnls_rows: dimension mismatch");
  }
}

}  // namespace fedproto::kernels::detail
