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
#include <numeric>

#include "fedproto/data.hpp"

namespace fedproto::data {

void SyntheticConfig::validate() const {
  if (n < 1 || m < 1) throw ParameterError("synthetic data needs n >= 1 and m >= 1");
  if (rank < 1) throw ParameterError("synthetic rank must be at least 1");
  if (entities < 1) throw ParameterError("at least one entity is required");
  if (entities > n) {
    throw ParameterError("cannot split " + std::to_string(n) + " users into " +
                         std::to_string(entities) + " entities");
  }
  if (!(rate_cap > 0.0) || !std::isfinite(rate_cap)) throw ParameterError("rate_cap must be positive");
}

std::size_t poisson(double rate, RngStream& rng) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw ParameterError("poisson: bad rate");
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::size_t k = 0;
  // The tail beyond a few thousand terms is below double resolution for any
  // rate this generator allows.
  while (u >= cdf && k < 10000) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && static_cast<double>(k) > rate) break;
  }
  return k;
}

SyntheticData gen_synthetic(const SyntheticConfig& cfg, RngStream& rng) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto m = static_cast<Eigen::Index>(cfg.m);
  const auto l = static_cast<Eigen::Index>(cfg.rank);

  SyntheticData out;
  out.user_factors.resize(n, l);
  out.item_factors.resize(m, l);
  RngStream u_rng = rng.child("U");
  RngStream v_rng = rng.child("V");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < l; ++j) out.user_factors(i, j) = u_rng.normal();
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < l; ++j) out.item_factors(i, j) = v_rng.normal();
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.rank));
  out.rates.resize(n, m);
  std::vector<std::vector<Entry>> row_entries(cfg.n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    RngStream row_rng = rng.child(static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < m; ++j) {
      const double log_rate =
          cfg.zero_rate ? 0.0 : scale * out.user_factors.row(i).dot(out.item_factors.row(j));
      const double rate = std::min(std::exp(log_rate), cfg.rate_cap);
      out.rates(i, j) = rate;
      const std::size_t draw = poisson(rate, row_rng);
      if (draw > 0) {
        row_entries[static_cast<std::size_t>(i)].push_back(
            {static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<double>(draw)});
      }
    }
  }

  std::vector<std::size_t> perm(cfg.n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream split_rng = rng.child("split");
  for (std::size_t i = cfg.n; i > 1; --i) std::swap(perm[i - 1], perm[split_rng.index(i)]);

  const std::size_t width = std::to_string(cfg.entities - 1).size();
  for (std::size_t h = 0; h < cfg.entities; ++h) {
    const std::size_t begin = h * cfg.n / cfg.entities;
    const std::size_t end = (h + 1) * cfg.n / cfg.entities;
    std::vector<std::size_t> rows(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                  perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(rows.begin(), rows.end());
    std::vector<Entry> entries;
    for (std::size_t local = 0; local < rows.size(); ++local) {
      for (const Entry& e : row_entries[rows[local]]) entries.push_back({local, e.col, e.value});
    }
    std::string id = std::to_string(h);
    id.insert(0, width - id.size(), '0');
    out.entity_ids.push_back("entity-" + id);
    out.entities.push_back(SparseRatings::from_entries(rows.size(), cfg.m, std::move(entries),
                                                       MaskSemantics::kImplicitZeros));
    out.rows.push_back(std::move(rows));
  }
  return out;
}

}  // namespace fedproto::data
