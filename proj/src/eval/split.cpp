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

#include "fedproto/eval.hpp"

namespace fedproto::eval {

TestSplit make_test_split(const SparseRatings& x, RngStream& rng, double user_fraction,
                          std::size_t per_user, const std::string& entity_id) {
  if (x.empty()) throw ParameterError("make_test_split: empty data");
  if (!(user_fraction >= 0.0 && user_fraction <= 1.0)) {
    throw ParameterError("make_test_split: user fraction must be in [0, 1]");
  }
  if (per_user < 1) throw ParameterError("make_test_split: per_user must be at least 1");

  std::vector<std::size_t> eligible;
  for (std::size_t r = 0; r < x.n_rows(); ++r) {
    if (x.row_nnz(r) >= per_user) eligible.push_back(r);
  }
  const auto wanted =
      static_cast<std::size_t>(std::llround(user_fraction * static_cast<double>(x.n_rows())));
  const std::size_t n_users = std::min(wanted, eligible.size());
  for (std::size_t i = 0; i < n_users; ++i) {
    std::swap(eligible[i], eligible[i + rng.index(eligible.size() - i)]);
  }
  eligible.resize(n_users);
  std::sort(eligible.begin(), eligible.end());

  TestSplit split;
  split.user_fraction = user_fraction;
  split.per_user = per_user;
  std::vector<char> held(x.nnz(), 0);
  const Entry* base = x.entries().data();
  for (std::size_t r : eligible) {
    const std::span<const Entry> row = x.row(r);
    std::vector<std::size_t> pos(row.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    for (std::size_t i = 0; i < per_user; ++i) {
      std::swap(pos[i], pos[i + rng.index(pos.size() - i)]);
    }
    pos.resize(per_user);
    std::sort(pos.begin(), pos.end());
    for (std::size_t p : pos) {
      const Entry& e = row[p];
      held[static_cast<std::size_t>(&e - base)] = 1;
      split.test.push_back({entity_id, e.row, e.col, e.value});
    }
  }

  std::vector<Entry> kept;
  kept.reserve(x.nnz() - split.test.size());
  for (std::size_t i = 0; i < x.nnz(); ++i) {
    if (!held[i]) kept.push_back(x.entries()[i]);
  }
  split.train = SparseRatings::from_entries(x.n_rows(), x.n_cols(), std::move(kept),
                                            x.semantics(), {x.lambda_bound(), std::nullopt});
  return split;
}

SquaredErrorSum test_error(const FactorModel& model, std::span<const TestEntry> test) {
  SquaredErrorSum out;
  for (const TestEntry& t : test) {
    if (t.row >= static_cast<std::size_t>(model.user_factors.rows()) ||
        t.col >= static_cast<std::size_t>(model.item_factors.rows())) {
      throw ParameterError("test entry outside the model's shape");
    }
    const double pred = model.user_factors.row(static_cast<Eigen::Index>(t.row))
                            .dot(model.item_factors.row(static_cast<Eigen::Index>(t.col)));
    out.sum += (t.value - pred) * (t.value - pred);
    ++out.count;
  }
  return out;
}

SquaredErrorSum train_error(const FactorModel& model, const SparseRatings& train) {
  const std::vector<Cell> cells = training_cells(train);
  return squared_error(model, train, cells);
}

}  // namespace fedproto::eval
