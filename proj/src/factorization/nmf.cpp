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
#include <sstream>

#include "fedproto/factorization.hpp"

namespace fedproto::factorization {
namespace {

Matrix random_factor(std::size_t rows, std::size_t rank, double upper, RngStream& rng) {
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = rng.uniform() * upper;
  }
  return out;
}

double mean_training_value(const SparseRatings& x) {
  const std::size_t cells = x.observed_cell_count();
  if (cells == 0) return 0.0;
  double total = 0.0;
  for (const Entry& e : x.entries()) total += e.value;
  return total / static_cast<double>(cells);
}

}  // namespace

void TrainConfig::validate() const {
  if (rank < 1) throw ParameterError("rank must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  if (max_outer_iters < 1 || inner_sweeps < 1 || user_fit_sweeps < 1) {
    throw ParameterError("iteration caps must be positive");
  }
}

double objective(const SparseRatings& x, const FactorModel& model, kernels::Exec exec) {
  const std::size_t cells = x.observed_cell_count();
  if (cells == 0) throw ParameterError("objective: no training cells");
  const double sse =
      kernels::ordered_sum(kernels::row_sq_residuals(x, model.user_factors, model.item_factors, exec));
  const double reg = model.lambda * (model.user_factors.squaredNorm() +
                                     model.item_factors.squaredNorm());
  return (sse + reg) / static_cast<double>(cells);
}

Matrix objective_user_gradient(const SparseRatings& x, const FactorModel& model) {
  const double scale = 2.0 / static_cast<double>(x.observed_cell_count());
  const Matrix& u = model.user_factors;
  const Matrix& v = model.item_factors;
  Matrix grad = model.lambda * scale * u;
  auto accumulate = [&](std::size_t r, std::size_t c, double truth) {
    const auto i = static_cast<Eigen::Index>(r);
    const auto j = static_cast<Eigen::Index>(c);
    grad.row(i) -= scale * (truth - u.row(i).dot(v.row(j))) * v.row(j);
  };
  for (std::size_t r = 0; r < x.n_rows(); ++r) {
    if (x.semantics() == MaskSemantics::kImplicitZeros) {
      for (std::size_t c = 0; c < x.n_cols(); ++c) accumulate(r, c, x.value_at(r, c));
    } else {
      for (const Entry& e : x.row(r)) accumulate(r, e.col, e.value);
    }
  }
  return grad;
}

FitResult joint_factorize(const SparseRatings& x, const TrainConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (x.observed_cell_count() == 0) throw ParameterError("joint_factorize: empty data");
  if (cfg.rank > std::min(x.n_rows(), x.n_cols())) {
    std::ostringstream msg;
    msg << "rank " << cfg.rank << " exceeds min(n, m) = " << std::min(x.n_rows(), x.n_cols());
    throw ParameterError(msg.str());
  }

  const double upper = std::sqrt(mean_training_value(x) / static_cast<double>(cfg.rank));
  FitResult fit;
  fit.model.lambda = cfg.lambda;
  fit.model.user_factors = random_factor(x.n_rows(), cfg.rank, upper, rng);
  fit.model.item_factors = random_factor(x.n_cols(), cfg.rank, upper, rng);

  const SparseRatings xt = x.transposed();
  const kernels::NnlsSettings settings{cfg.lambda, cfg.inner_sweeps, 1e-10};

  double previous = objective(x, fit.model, cfg.exec);
  fit.objective_history.push_back(previous);
  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    kernels::solve_nnls_rows(x, fit.model.item_factors, settings, fit.model.user_factors,
                             cfg.exec);
    kernels::solve_nnls_rows(xt, fit.model.user_factors, settings, fit.model.item_factors,
                             cfg.exec);
    const double current = objective(x, fit.model, cfg.exec);
    fit.objective_history.push_back(current);
    fit.iterations = it + 1;
    const double change = std::abs(previous - current);
    previous = current;
    if (change <= cfg.tolerance * std::max(std::abs(current), 1e-300)) break;
  }
  return fit;
}

Matrix fit_item_factors(const Matrix& prototypes, const TrainConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (static_cast<std::size_t>(prototypes.rows()) < cfg.rank) {
    throw ParameterError("insufficient prototypes for rank");
  }
  const SparseRatings pooled =
      SparseRatings::from_dense(prototypes, MaskSemantics::kImplicitZeros);
  return joint_factorize(pooled, cfg, rng).model.item_factors;
}

Matrix fit_user_factors(const SparseRatings& x, const Matrix& item_factors,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(item_factors.rows()) != x.n_cols() ||
      static_cast<std::size_t>(item_factors.cols()) != cfg.rank) {
    throw ParameterError("fit_user_factors: item factors are " +
                         std::to_string(item_factors.rows()) + " x " +
                         std::to_string(item_factors.cols()) + ", expected " +
                         std::to_string(x.n_cols()) + " x " + std::to_string(cfg.rank));
  }
  Matrix users = Matrix::Zero(static_cast<Eigen::Index>(x.n_rows()), item_factors.cols());
  const kernels::NnlsSettings settings{cfg.lambda, cfg.user_fit_sweeps, 1e-13};
  kernels::solve_nnls_rows(x, item_factors, settings, users, cfg.exec);
  return users;
}

Matrix predict(const FactorModel& model) {
  if (model.user_factors.cols() != model.item_factors.cols()) {
    throw ParameterError("predict: rank mismatch");
  }
  return model.user_factors * model.item_factors.transpose();
}

}  // namespace fedproto::factorization
