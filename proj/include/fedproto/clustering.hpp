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

// Differentially private k-means prototypes and their non-private baselines.
//
// The private pipeline per trial is: random Gaussian projection to p
// dimensions, a private candidate set of cube centers from shifted recursive
// partitions, private local-swap selection of k candidates, a nearest-center
// partition of the rows, and a sparse noisy mean per cell. One trial's
// prototypes are then picked by the exponential mechanism on clustering loss.
//
// Two radii appear. `lambda_bound` (Λ) caps individual entries and drives the
// sparse-recovery noise. The l2 radius Λ * sqrt(s) bounds whole rows (and,
// up to projection distortion, projected rows); it sizes the cubes and the
// loss sensitivity in the swap and trial-selection steps.

#include <cstddef>
#include <optional>
#include <vector>

#include "fedproto/core.hpp"
#include "fedproto/kernels.hpp"
#include "fedproto/ledger.hpp"
#include "fedproto/rng.hpp"

namespace fedproto::clustering {

struct ProjectedData {
  Matrix points;    // n x p, equal to (1/sqrt(p)) X G^T
  Matrix gaussian;  // p x m
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

struct CubeNode {
  Vector center;
  double half_width = 0.0;
  std::size_t depth = 0;
  std::size_t member_count = 0;
};

struct CandidateSet {
  Matrix centers;  // one candidate per row
  double epsilon_spent = 0.0;
  double delta = 0.0;
  std::size_t size() const { return static_cast<std::size_t>(centers.rows()); }
};

struct Clustering {
  Matrix centers;
  std::vector<std::size_t> assignment;  // row -> nearest center
  double loss = 0.0;
};

// How the Gumbel noise for coordinate selection in sparse recovery is scaled.
enum class GumbelScaleRule {
  // 2 s Δ / ε, Δ = Λ / n_cluster: equivalent to s sequential exponential
  // mechanisms.
  kSequentialEquivalent,
  // (ε / (2 s Λ)) |μ_i| per coordinate, proportional to the utility itself.
  // Kept for comparison only.
  kUtilityProportional,
};

struct PartitionOptions {
  double r_min = 1e-3;  // cubes narrower than this are not subdivided
  std::optional<std::size_t> max_depth;
};

struct CandidateOptions {
  std::size_t k = 1;
  std::optional<std::size_t> trials;  // default ceil(25 k ln(n / δ))
  bool zero_shift = false;            // test hook: unshifted root cube
  std::size_t max_candidates = 4096;  // uniform subsample above this; 0 = no cap
  PartitionOptions partition;
};

struct SwapOptions {
  std::optional<std::size_t> iterations;  // default ceil(k ln(n / δ))
  kernels::Exec exec = kernels::Exec::kParallel;
};

struct PrototypeOptions {
  std::optional<std::size_t> latent_dim;        // default ceil(8 ln n)
  std::optional<std::size_t> trials;            // default ceil(2 ln(1 / δ))
  std::optional<std::size_t> candidate_trials;  // default ceil(25 k ln(n / δ))
  std::optional<std::size_t> swap_iterations;   // default ceil(k ln(n / δ))
  double r_min = 1e-3;
  std::size_t max_candidates = 4096;
  GumbelScaleRule gumbel_rule = GumbelScaleRule::kSequentialEquivalent;
  kernels::Exec exec = kernels::Exec::kParallel;
};

// Natural log with n floored at 2, so constants stay finite for n <= 1.
double log_n(std::size_t n);

// Random Gaussian projection to p dimensions.
ProjectedData jl_project(const SparseRatings& x, std::size_t p, RngStream& rng,
                         kernels::Exec exec = kernels::Exec::kParallel);
// Projection with a caller-supplied p x m matrix (test hook).
ProjectedData jl_project_with(const SparseRatings& x, Matrix gaussian,
                              kernels::Exec exec = kernels::Exec::kParallel);

// Survival probability of a child cube holding `count` points.
double survival_probability(double count, double epsilon_prime, double gamma);

// Recursive private subdivision of `root`. Each occupied child cube survives
// with survival_probability(count); empty children are dropped. Returns every
// cube that was ever active, root first. Points outside `root` are ignored.
std::vector<CubeNode> private_partition(const Matrix& points, double epsilon, double delta,
                                        const CubeNode& root, RngStream& rng,
                                        const PartitionOptions& options = {});

// Union of private_partition centers over randomly shifted root cubes
// [-2R, 2R]^p + v, v ~ U([-R, R]^p), each at (ε/T, δ/T). The doubled width
// keeps the whole ball of radius R inside every shifted cube. Charges T
// events. When fewer than options.k centers remain, the set is topped up
// with data-independent uniform points of [-R, R]^p.
CandidateSet candidate_set(const Matrix& points, double epsilon, double delta, double radius,
                           RngStream& rng, PrivacyLedger& ledger,
                           const CandidateOptions& options);

// Private local search for k centers among the candidates. Each of the T
// steps is an exponential mechanism over "keep the current centers" and every
// single swap, with utility -loss and sensitivity 4 R^2; the returned
// iterate is picked from the trajectory by one more exponential mechanism.
// Budget ε/(T+1) per draw. Throws ParameterError when |C| < k.
Clustering local_swap(const Matrix& points, const CandidateSet& candidates, std::size_t k,
                      double epsilon, double delta, double radius, RngStream& rng,
                      PrivacyLedger& ledger, const SwapOptions& options = {});

// Noisy sparse mean of one cluster's rows (dense, n_cluster x m): top-s
// coordinates by Gumbel-noised mean (ε/2), Laplace(2 Λ s / (ε n_cluster)) on
// the selected coordinates (ε/2), zeros elsewhere, clamped to [0, Λ]. Charges
// two events.
// Throws ParameterError("empty cluster") when there are no rows.
Vector sparse_recovery(const Matrix& rows, double epsilon, std::size_t s, double lambda_bound,
                       RngStream& rng, PrivacyLedger& ledger,
                       GumbelScaleRule rule = GumbelScaleRule::kSequentialEquivalent);

// ε-DP prototypes of one entity's rows. Every sub-mechanism is charged to
// `ledger`; the charges sum to ε.
PrototypeSet private_prototypes(const SparseRatings& x, std::size_t k, double epsilon,
                                double delta, RngStream& rng, PrivacyLedger& ledger,
                                const PrototypeOptions& options = {});

// Sum over rows of the squared distance to the nearest center.
double kmeans_loss(const Matrix& centers, const Matrix& rows);

// Lloyd iterations from k-means++ seeding until the assignment stops changing
// or `max_iters`.
Clustering kmeans_baseline(const SparseRatings& x, std::size_t k, RngStream& rng,
                           int max_iters = 300);

// k distinct rows sampled uniformly without replacement.
PrototypeSet krandom_baseline(const SparseRatings& x, std::size_t k, RngStream& rng);

}  // namespace fedproto::clustering
