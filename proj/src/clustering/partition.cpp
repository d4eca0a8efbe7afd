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
#include <cstdint>

#include "fedproto/clustering.hpp"
#include "fedproto/dp.hpp"

namespace fedproto::clustering {
namespace {

struct ActiveCube {
  CubeNode node;
  std::vector<std::size_t> members;
};

bool inside(const Matrix& points, Eigen::Index i, const CubeNode& cube) {
  const double* row = points.row(i).data();
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (std::abs(row[j] - cube.center(j)) > cube.half_width) return false;
  }
  return true;
}

// One bit per dimension: set when the point lies in the upper half. Writes
// words_per_key(p) words at out.
std::size_t words_per_key(Eigen::Index p) { return (static_cast<std::size_t>(p) + 63) / 64; }

void child_key(const Matrix& points, Eigen::Index i, const Vector& center, std::uint64_t* out) {
  const auto p = static_cast<std::size_t>(points.cols());
  std::fill(out, out + words_per_key(points.cols()), 0);
  const double* row = points.row(i).data();
  for (std::size_t j = 0; j < p; ++j) {
    if (row[j] >= center(static_cast<Eigen::Index>(j))) out[j / 64] |= std::uint64_t{1} << (j % 64);
  }
}

CubeNode child_cube(const CubeNode& parent, const std::uint64_t* key) {
  CubeNode child;
  child.half_width = parent.half_width / 2.0;
  child.depth = parent.depth + 1;
  child.center = parent.center;
  for (Eigen::Index j = 0; j < child.center.size(); ++j) {
    const auto bit = static_cast<std::size_t>(j);
    const bool upper = (key[bit / 64] >> (bit % 64)) & 1U;
    child.center(j) += upper ? child.half_width : -child.half_width;
  }
  return child;
}

}  // namespace

double survival_probability(double count, double epsilon_prime, double gamma) {
  if (count <= gamma) return 0.5 * std::exp(-epsilon_prime * (gamma - count));
  return 1.0 - 0.5 * std::exp(epsilon_prime * (gamma - count));
}

std::vector<CubeNode> private_partition(const Matrix& points, double epsilon, double delta,
                                        const CubeNode& root, RngStream& rng,
                                        const PartitionOptions& options) {
  if (!(epsilon > 0.0)) throw ParameterError("private_partition: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("private_partition: delta must be in (0, 1)");
  if (!(root.half_width > 0.0) || !std::isfinite(root.half_width)) {
    throw ParameterError("private_partition: root half-width must be positive");
  }
  if (root.center.size() != points.cols()) {
    throw ParameterError("private_partition: root dimension does not match data");
  }
  const auto finite = [](const auto& m) {
    return std::all_of(m.data(), m.data() + m.size(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(points) || !finite(root.center)) {
    throw ParameterError("private_partition: non-finite data");
  }
  if (!(options.r_min > 0.0)) throw ParameterError("private_partition: r_min must be positive");

  const auto n = static_cast<std::size_t>(points.rows());
  const bool noiseless = dp::is_noiseless(epsilon);
  const double eps_prime = epsilon / (2.0 * log_n(n));
  const double gamma = noiseless ? 0.0 : 20.0 / eps_prime * (log_n(n) - std::log(delta));
  const double diagonal = 2.0 * root.half_width * std::sqrt(static_cast<double>(points.cols()));
  const std::size_t max_depth = options.max_depth.value_or(
      static_cast<std::size_t>(std::max(0.0, std::ceil(std::log2(diagonal / options.r_min)))));

  ActiveCube start{root, {}};
  start.node.depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inside(points, static_cast<Eigen::Index>(i), root)) start.members.push_back(i);
  }
  start.node.member_count = start.members.size();

  std::vector<CubeNode> emitted{start.node};
  if (n == 0) return emitted;

  std::vector<ActiveCube> active;
  active.push_back(std::move(start));
  for (std::size_t depth = 0; depth < max_depth && !active.empty(); ++depth) {
    std::vector<ActiveCube> next;
    for (const ActiveCube& cube : active) {
      // Only occupied children are materialized; an empty child would survive
      // with probability f(0), which is negligible for any useful γ.
      // Children are visited in lexicographic key order so the survival draws
      // consume the stream in a fixed order.
      const std::size_t m = cube.members.size();
      const std::size_t words = words_per_key(points.cols());
      std::vector<std::uint64_t> keys(m * words);
      for (std::size_t a = 0; a < m; ++a) {
        child_key(points, static_cast<Eigen::Index>(cube.members[a]), cube.node.center,
                  keys.data() + a * words);
      }
      const auto key_of = [&](std::size_t a) { return keys.data() + a * words; };
      // -1, 0 or 1 as key a sorts before, with or after key b.
      const auto key_cmp = [&](std::size_t a, std::size_t b) {
        const std::uint64_t* ka = key_of(a);
        const std::uint64_t* kb = key_of(b);
        for (std::size_t w = 0; w < words; ++w) {
          if (ka[w] != kb[w]) return ka[w] < kb[w] ? -1 : 1;
        }
        return 0;
      };
      std::vector<std::size_t> order(m);
      for (std::size_t a = 0; a < m; ++a) order[a] = a;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int c = key_cmp(a, b);
        return c != 0 ? c < 0 : cube.members[a] < cube.members[b];
      });
      for (std::size_t lo = 0; lo < m;) {
        std::size_t hi = lo + 1;
        while (hi < m && key_cmp(order[hi], order[lo]) == 0) ++hi;
        const std::uint64_t* key = key_of(order[lo]);
        const std::size_t first = lo;
        lo = hi;
        const double count = static_cast<double>(hi - first);
        const bool survives =
            noiseless ? true : rng.uniform() < survival_probability(count, eps_prime, gamma);
        if (!survives) continue;
        std::vector<std::size_t> members;
        members.reserve(hi - first);
        for (std::size_t a = first; a < hi; ++a) members.push_back(cube.members[order[a]]);
        ActiveCube child{child_cube(cube.node, key), std::move(members)};
        child.node.member_count = child.members.size();
        emitted.push_back(child.node);
        next.push_back(std::move(child));
      }
    }
    active = std::move(next);
  }
  return emitted;
}

CandidateSet candidate_set(const Matrix& points, double epsilon, double delta, double radius,
                           RngStream& rng, PrivacyLedger& ledger,
                           const CandidateOptions& options) {
  if (!(epsilon > 0.0)) throw ParameterError("candidate_set: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("candidate_set: delta must be in (0, 1)");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("candidate_set: radius must be positive");
  }
  if (options.k < 1) throw ParameterError("candidate_set: k must be at least 1");

  const auto n = static_cast<std::size_t>(points.rows());
  const std::size_t trials = options.trials.value_or(static_cast<std::size_t>(
      std::ceil(25.0 * static_cast<double>(options.k) * (log_n(n) - std::log(delta)))));
  if (trials < 1) throw ParameterError("candidate_set: at least one trial required");
  const double eps_t = epsilon / static_cast<double>(trials);
  const double delta_t = delta / static_cast<double>(trials);

  std::vector<Vector> centers;
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream trial_rng = rng.child(t);
    CubeNode root;
    root.half_width = 2.0 * radius;
    root.center = Vector::Zero(points.cols());
    if (!options.zero_shift) {
      for (Eigen::Index j = 0; j < root.center.size(); ++j) {
        root.center(j) = trial_rng.uniform(-radius, radius);
      }
    }
    for (CubeNode& node :
         private_partition(points, eps_t, delta_t, root, trial_rng, options.partition)) {
      centers.push_back(std::move(node.center));
    }
    ledger.charge("candidate_partition", eps_t, delta_t);
  }

  // Keeping a uniform subset is post-processing and costs no budget.
  std::vector<std::size_t> keep(centers.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (options.max_candidates > 0 && keep.size() > options.max_candidates) {
    RngStream pick = rng.child("subsample");
    for (std::size_t i = 0; i < options.max_candidates; ++i) {
      std::swap(keep[i], keep[i + pick.index(keep.size() - i)]);
    }
    keep.resize(options.max_candidates);
    std::sort(keep.begin(), keep.end());
  }

  // Fewer than k survivors (only possible with a trial count below k or a
  // tight cap): top up with uniform points of [-R, R]^p. They never look at
  // the data, so they cost nothing.
  const std::size_t pad = keep.size() < options.k ? options.k - keep.size() : 0;
  CandidateSet out;
  out.centers.resize(static_cast<Eigen::Index>(keep.size() + pad), points.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.centers.row(static_cast<Eigen::Index>(i)) = centers[keep[i]].transpose();
  }
  RngStream pad_rng = rng.child("pad");
  for (std::size_t i = keep.size(); i < keep.size() + pad; ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      out.centers(static_cast<Eigen::Index>(i), j) = pad_rng.uniform(-radius, radius);
    }
  }
  out.epsilon_spent = epsilon;
  out.delta = delta;
  return out;
}

}  // namespace fedproto::clustering
