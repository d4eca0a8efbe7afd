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
#include <exception>

#include "fedproto/clustering.hpp"
#include "fedproto/dp.hpp"

namespace fedproto::clustering {
namespace {

struct TrialResult {
  Matrix centers;
  double loss = 0.0;
  PrivacyLedger ledger;
};

std::size_t default_count(double value) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(value)));
}

Matrix dense_rows(const SparseRatings& x, const std::vector<std::size_t>& rows) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(x.n_cols()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : x.row(rows[i])) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = e.value;
    }
  }
  return out;
}

}  // namespace

PrototypeSet private_prototypes(const SparseRatings& x, std::size_t k, double epsilon,
                                double delta, RngStream& rng, PrivacyLedger& ledger,
                                const PrototypeOptions& options) {
  const std::size_t n = x.n_rows();
  if (k < 1) throw ParameterError("private_prototypes: k must be at least 1");
  if (k > n) {
    throw ParameterError("private_prototypes: k = " + std::to_string(k) + " exceeds " +
                         std::to_string(n) + " rows");
  }
  if (!(epsilon > 0.0)) throw ParameterError("private_prototypes: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("private_prototypes: delta must be in (0, 1)");
  }
  if (!(x.lambda_bound() > 0.0) || x.sparsity() == 0) {
    throw ParameterError("private_prototypes: data has no positive entries to bound");
  }

  const double lambda = x.lambda_bound();
  const std::size_t s = x.sparsity();
  const double radius = lambda * std::sqrt(static_cast<double>(s));
  const std::size_t p = options.latent_dim.value_or(default_count(8.0 * log_n(n)));
  const std::size_t trials = options.trials.value_or(default_count(2.0 * std::log(1.0 / delta)));
  if (p < 1 || trials < 1) throw ParameterError("private_prototypes: p and trials must be >= 1");

  const double per_trial = epsilon / static_cast<double>(trials);
  const double eps_candidates = per_trial / 6.0;
  const double eps_swap = per_trial / 6.0;
  const double eps_recovery = per_trial / 3.0;
  const double eps_select = epsilon / 3.0;

  CandidateOptions cand_opts;
  cand_opts.k = k;
  cand_opts.trials = options.candidate_trials;
  cand_opts.max_candidates = options.max_candidates;
  cand_opts.partition.r_min = options.r_min;
  SwapOptions swap_opts;
  swap_opts.iterations = options.swap_iterations;
  swap_opts.exec = options.exec;

  const Matrix full = x.to_dense();
  std::vector<TrialResult> results(trials);
  std::vector<std::exception_ptr> failures(trials);
  const bool parallel = options.exec == kernels::Exec::kParallel;
  const auto n_trials = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t t = 0; t < n_trials; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    try {
      RngStream trial_rng = rng.child(ti);
      RngStream project_rng = trial_rng.child("project");
      RngStream candidate_rng = trial_rng.child("candidates");
      RngStream swap_rng = trial_rng.child("swap");
      RngStream recovery_rng = trial_rng.child("recovery");
      TrialResult& out = results[ti];
      out.ledger = PrivacyLedger(ledger.entity_id());

      const ProjectedData proj = jl_project(x, p, project_rng, options.exec);
      const CandidateSet cands = candidate_set(proj.points, eps_candidates, delta, radius,
                                               candidate_rng, out.ledger, cand_opts);
      const Clustering z = local_swap(proj.points, cands, k, eps_swap, delta, radius, swap_rng,
                                      out.ledger, swap_opts);

      std::vector<std::vector<std::size_t>> members(k);
      for (std::size_t i = 0; i < n; ++i) members[z.assignment[i]].push_back(i);
      out.centers = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(x.n_cols()));
      // Clusters hold disjoint rows, so their recoveries compose in parallel:
      // the trial is charged one recovery budget, not k of them.
      for (std::size_t j = 0; j < k; ++j) {
        if (members[j].empty()) continue;  // zero prototype, the domain floor
        PrivacyLedger scratch;
        RngStream cluster_rng = recovery_rng.child(j);
        out.centers.row(static_cast<Eigen::Index>(j)) =
            sparse_recovery(dense_rows(x, members[j]), eps_recovery, s, lambda, cluster_rng,
                            scratch, options.gumbel_rule)
                .transpose();
      }
      out.ledger.charge("sparse_recovery_top_s", eps_recovery / 2.0);
      out.ledger.charge("sparse_recovery_laplace", eps_recovery / 2.0);

      out.loss = kernels::kmeans_loss(full, out.centers, options.exec);
    } catch (...) {
      failures[ti] = std::current_exception();
    }
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> utility(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    ledger.absorb(results[t].ledger);
    utility[t] = -results[t].loss;
  }
  RngStream select_rng = rng.child("select");
  const std::size_t chosen =
      dp::exp_mechanism_sample(utility, 4.0 * radius * radius, eps_select, select_rng).value;
  ledger.charge("prototype_selection", eps_select);

  PrototypeSet out;
  out.entity_id = ledger.entity_id();
  out.prototypes = std::move(results[chosen].centers);
  out.epsilon_spent = epsilon;
  out.delta = delta;
  return out;
}

}  // namespace fedproto::clustering
