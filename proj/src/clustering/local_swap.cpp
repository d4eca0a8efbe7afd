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
#include <limits>

#include "fedproto/clustering.hpp"
#include "fedproto/dp.hpp"

namespace fedproto::clustering {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per point: the slot of the nearest selected center, its distance and the
// distance to the second nearest (infinite when k = 1).
struct Coverage {
  std::vector<std::size_t> owner;
  std::vector<double> best;
  std::vector<double> second;
};

// dist is candidate-major: dist(y, i) is the squared distance from candidate y
// to point i, so the swap scan reads each candidate's row contiguously.
Coverage coverage(const Matrix& dist, const std::vector<std::size_t>& z) {
  const auto n = static_cast<std::size_t>(dist.cols());
  Coverage cov{std::vector<std::size_t>(n, 0), std::vector<double>(n, kInf),
               std::vector<double>(n, kInf)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t slot = 0; slot < z.size(); ++slot) {
      const double d = dist(static_cast<Eigen::Index>(z[slot]), static_cast<Eigen::Index>(i));
      if (d < cov.best[i]) {
        cov.second[i] = cov.best[i];
        cov.best[i] = d;
        cov.owner[i] = slot;
      } else if (d < cov.second[i]) {
        cov.second[i] = d;
      }
    }
  }
  return cov;
}

}  // namespace

Clustering local_swap(const Matrix& points, const CandidateSet& candidates, std::size_t k,
                      double epsilon, double delta, double radius, RngStream& rng,
                      PrivacyLedger& ledger, const SwapOptions& options) {
  if (k < 1) throw ParameterError("local_swap: k must be at least 1");
  if (candidates.size() < k) {
    throw ParameterError("local_swap: " + std::to_string(candidates.size()) +
                         " candidates for k = " + std::to_string(k));
  }
  if (candidates.centers.cols() != points.cols()) {
    throw ParameterError("local_swap: candidate dimension does not match data");
  }
  if (!(epsilon > 0.0)) throw ParameterError("local_swap: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("local_swap: delta must be in (0, 1)");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("local_swap: radius must be positive");
  }

  const auto n = static_cast<std::size_t>(points.rows());
  const std::size_t c = candidates.size();
  const std::size_t steps = options.iterations.value_or(static_cast<std::size_t>(
      std::ceil(static_cast<double>(k) * (log_n(n) - std::log(delta)))));
  if (steps < 1) throw ParameterError("local_swap: at least one iteration required");
  const double eps_draw = epsilon / static_cast<double>(steps + 1);
  const double sensitivity = 4.0 * radius * radius;

  const Matrix dist = kernels::pairwise_sq_distances(candidates.centers, points, options.exec);

  // Z(0): k distinct candidates, uniformly.
  std::vector<std::size_t> order(c);
  for (std::size_t i = 0; i < c; ++i) order[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.index(c - i)]);
  std::vector<std::size_t> z(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

  std::vector<std::vector<std::size_t>> trajectory;
  std::vector<double> losses;
  std::vector<char> selected(c, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(selected.begin(), selected.end(), 0);
    for (std::size_t idx : z) selected[idx] = 1;
    std::vector<std::size_t> outside;
    outside.reserve(c - k);
    for (std::size_t y = 0; y < c; ++y) {
      if (!selected[y]) outside.push_back(y);
    }

    const Coverage cov = coverage(dist, z);
    const double current = kernels::ordered_sum(cov.best);

    // loss(Z - z[slot] + y) = sum_i min(best_i, d_iy)
    //   + sum over points owned by slot of [min(second_i, d_iy) - min(best_i, d_iy)].
    // Points are regrouped by owning slot so each slot's share is a contiguous
    // reduction instead of a scatter.
    std::vector<std::size_t> start(k + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++start[cov.owner[i] + 1];
    for (std::size_t slot = 0; slot < k; ++slot) start[slot + 1] += start[slot];
    std::vector<std::size_t> perm(n);
    std::vector<double> best(n);
    std::vector<double> second(n);
    {
      std::vector<std::size_t> fill(start.begin(), start.end() - 1);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = fill[cov.owner[i]]++;
        perm[a] = i;
        best[a] = cov.best[i];
        second[a] = cov.second[i];
      }
    }

    // Outcome 0 keeps Z; outcome 1 + slot * |outside| + o swaps z[slot] for outside[o].
    const auto n_out = static_cast<std::ptrdiff_t>(outside.size());
    std::vector<double> utility(1 + k * outside.size());
    utility[0] = -current;
    const bool parallel = options.exec == kernels::Exec::kParallel;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t o = 0; o < n_out; ++o) {
      const double* row = dist.row(static_cast<Eigen::Index>(outside[static_cast<std::size_t>(o)])).data();
      std::vector<double> correction(k, 0.0);
      double base = 0.0;
      for (std::size_t slot = 0; slot < k; ++slot) {
        double kept_sum = 0.0;
        double fallback_sum = 0.0;
        for (std::size_t a = start[slot]; a < start[slot + 1]; ++a) {
          const double d = row[perm[a]];
          kept_sum += std::min(best[a], d);
          fallback_sum += std::min(second[a], d);
        }
        base += kept_sum;
        correction[slot] = fallback_sum - kept_sum;
      }
      for (std::size_t slot = 0; slot < k; ++slot) {
        utility[1 + slot * outside.size() + static_cast<std::size_t>(o)] = -(base + correction[slot]);
      }
    }
    const std::size_t pick = dp::exp_mechanism_sample(utility, sensitivity, eps_draw, rng).value;
    ledger.charge("local_swap_step", eps_draw);
    if (pick > 0) {
      const std::size_t slot = (pick - 1) / outside.size();
      z[slot] = outside[(pick - 1) % outside.size()];
    }
    trajectory.push_back(z);
    losses.push_back(-utility[pick]);
  }

  std::vector<double> final_utility(losses.size());
  for (std::size_t t = 0; t < losses.size(); ++t) final_utility[t] = -losses[t];
  const std::size_t chosen =
      dp::exp_mechanism_sample(final_utility, sensitivity, eps_draw, rng).value;
  ledger.charge("local_swap_select", eps_draw);

  Clustering out;
  out.centers.resize(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t slot = 0; slot < k; ++slot) {
    out.centers.row(static_cast<Eigen::Index>(slot)) =
        candidates.centers.row(static_cast<Eigen::Index>(trajectory[chosen][slot]));
  }
  kernels::Nearest nearest = kernels::assign_nearest(points, out.centers, options.exec);
  out.assignment = std::move(nearest.index);
  out.loss = kernels::ordered_sum(nearest.sq_distance);
  return out;
}

}  // namespace fedproto::clustering
