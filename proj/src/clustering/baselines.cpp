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
#include <numeric>

#include "fedproto/clustering.hpp"

namespace fedproto::clustering {
namespace {

void check_k(std::size_t k, std::size_t n, const char* who) {
  if (k < 1) throw ParameterError(std::string(who) + ": k must be at least 1");
  if (k > n) {
    throw ParameterError(std::string(who) + ": k = " + std::to_string(k) + " exceeds " +
                         std::to_string(n) + " rows");
  }
}

}  // namespace

double kmeans_loss(const Matrix& centers, const Matrix& rows) {
  return kernels::kmeans_loss(rows, centers, kernels::Exec::kParallel);
}

Clustering kmeans_baseline(const SparseRatings& x, std::size_t k, RngStream& rng,
                           int max_iters) {
  const std::size_t n = x.n_rows();
  check_k(k, n, "kmeans_baseline");
  if (max_iters < 1) throw ParameterError("kmeans_baseline: max_iters must be positive");
  const Matrix data = x.to_dense();
  const auto m = data.cols();

  // k-means++ seeding.
  std::vector<std::size_t> seeds{rng.index(n)};
  std::vector<char> taken(n, 0);
  taken[seeds[0]] = 1;
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = (data.row(static_cast<Eigen::Index>(i)) -
                  data.row(static_cast<Eigen::Index>(seeds[0])))
                     .squaredNorm();
  }
  while (seeds.size() < k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t next = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += nearest[i];
        if (nearest[i] > 0.0 && target < running) {
          next = i;
          break;
        }
      }
      if (next == n) {  // rounding at the tail: take the last positive weight
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a seed; any untaken row will do.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      next = free[rng.index(free.size())];
    }
    seeds.push_back(next);
    taken[next] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (data.row(static_cast<Eigen::Index>(i)) -
                                         data.row(static_cast<Eigen::Index>(next)))
                                            .squaredNorm());
    }
  }

  Clustering out;
  out.centers.resize(static_cast<Eigen::Index>(k), m);
  for (std::size_t j = 0; j < k; ++j) {
    out.centers.row(static_cast<Eigen::Index>(j)) = data.row(static_cast<Eigen::Index>(seeds[j]));
  }

  // Lloyd iterations; an empty cluster keeps its previous center.
  kernels::Nearest assign = kernels::assign_nearest(data, out.centers, kernels::Exec::kParallel);
  for (int it = 0; it < max_iters; ++it) {
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), m);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(assign.index[i])) += data.row(static_cast<Eigen::Index>(i));
      ++counts[assign.index[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        out.centers.row(static_cast<Eigen::Index>(j)) =
            sums.row(static_cast<Eigen::Index>(j)) / static_cast<double>(counts[j]);
      }
    }
    kernels::Nearest next = kernels::assign_nearest(data, out.centers, kernels::Exec::kParallel);
    const bool fixed = next.index == assign.index;
    assign = std::move(next);
    if (fixed) break;
  }
  out.assignment = std::move(assign.index);
  out.loss = kernels::ordered_sum(assign.sq_distance);
  return out;
}

PrototypeSet krandom_baseline(const SparseRatings& x, std::size_t k, RngStream& rng) {
  const std::size_t n = x.n_rows();
  check_k(k, n, "krandom_baseline");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.index(n - i)]);
  order.resize(k);

  PrototypeSet out;
  out.prototypes = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(x.n_cols()));
  for (std::size_t i = 0; i < k; ++i) {
    for (const Entry& e : x.row(order[i])) {
      out.prototypes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = e.value;
    }
  }
  return out;
}

}  // namespace fedproto::clustering
