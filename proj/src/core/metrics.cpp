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

#include <cmath>

#include "fedproto/core.hpp"

namespace fedproto {

double SquaredErrorSum::rmse() const {
  if (count == 0) throw ParameterError("empty evaluation set");
  return std::sqrt(sum / static_cast<double>(count));
}

SquaredErrorSum squared_error(const FactorModel& model, const SparseRatings& target,
                              std::span<const Cell> cells) {
  if (static_cast<std::size_t>(model.user_factors.rows()) != target.n_rows() ||
      static_cast<std::size_t>(model.item_factors.rows()) != target.n_cols()) {
    throw ParameterError("model shape does not match target");
  }
  SquaredErrorSum acc;
  for (const Cell& c : cells) {
    const double truth = target.value_at(c.row, c.col);
    const double pred = model.user_factors.row(static_cast<Eigen::Index>(c.row))
                            .dot(model.item_factors.row(static_cast<Eigen::Index>(c.col)));
    acc.sum += (truth - pred) * (truth - pred);
    ++acc.count;
  }
  return acc;
}

double masked_rmse(const FactorModel& model, const SparseRatings& target,
                   std::span<const Cell> cells) {
  if (cells.empty()) throw ParameterError("empty evaluation set");
  return squared_error(model, target, cells).rmse();
}

std::vector<Cell> training_cells(const SparseRatings& x) {
  std::vector<Cell> cells;
  if (x.semantics() == MaskSemantics::kImplicitZeros) {
    cells.reserve(x.n_rows() * x.n_cols());
    for (std::size_t r = 0; r < x.n_rows(); ++r) {
      for (std::size_t c = 0; c < x.n_cols(); ++c) cells.push_back({r, c});
    }
  } else {
    cells.reserve(x.nnz());
    for (const Entry& e : x.entries()) cells.push_back({e.row, e.col});
  }
  return cells;
}

}  // namespace fedproto
