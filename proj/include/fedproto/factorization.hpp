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

#include <filesystem>
#include <vector>

#include "fedproto/core.hpp"
#include "fedproto/kernels.hpp"
#include "fedproto/rng.hpp"

namespace fedproto::factorization {

struct TrainConfig {
  std::size_t rank = 10;
  double lambda = 0.1;
  int max_outer_iters = 200;
  double tolerance = 1e-6;  // relative objective change that ends the alternation
  int inner_sweeps = 50;    // coordinate sweeps per row per half-step
  int user_fit_sweeps = 5000;
  kernels::Exec exec = kernels::Exec::kParallel;

  // Throws ParameterError on rank 0, negative lambda, non-positive tolerance
  // or sweep counts.
  void validate() const;
};

struct FitResult {
  FactorModel model;
  // Objective at initialization followed by one value per outer iteration.
  std::vector<double> objective_history;
  int iterations = 0;
};

// Regularized NMF objective
//   (1/N) [ sum over training cells (x_ij - u_i . v_j)^2 + lambda (|U|^2 + |V|^2) ]
// where N is the number of training cells (all n*m cells under implicit-zero
// semantics, the stored cells otherwise).
double objective(const SparseRatings& x, const FactorModel& model,
                 kernels::Exec exec = kernels::Exec::kParallel);

// Gradient of `objective` with respect to the user factors.
Matrix objective_user_gradient(const SparseRatings& x, const FactorModel& model);

// Alternating non-negative least squares from a random non-negative start.
// The objective is non-increasing across outer iterations.
FitResult joint_factorize(const SparseRatings& x, const TrainConfig& cfg, RngStream& rng);

// Item factors (m x rank) learned from a fully observed prototype matrix.
// Throws ParameterError("insufficient prototypes for rank") when the matrix
// has fewer rows than the rank.
Matrix fit_item_factors(const Matrix& prototypes, const TrainConfig& cfg, RngStream& rng);

// Per-user non-negative ridge regression against fixed item factors, solved
// to convergence. Rows are independent.
Matrix fit_user_factors(const SparseRatings& x, const Matrix& item_factors,
                        const TrainConfig& cfg);

// Dense U V^T.
Matrix predict(const FactorModel& model);

// U.csv, V.csv and model.meta (rank, lambda, iterations, objective) in `dir`.
void write_model(const std::filesystem::path& dir, const FactorModel& model, int iterations,
                 double objective_value);
FactorModel read_model(const std::filesystem::path& dir);

}  // namespace fedproto::factorization
