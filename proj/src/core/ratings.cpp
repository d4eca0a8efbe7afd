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

#include "fedproto/core.hpp"

namespace fedproto {

std::string to_string(MaskSemantics semantics) {
  return semantics == MaskSemantics::kImplicitZeros ? "implicit-zeros" : "explicit-missing";
}

MaskSemantics parse_mask_semantics(const std::string& text) {
  if (text == "implicit-zeros") return MaskSemantics::kImplicitZeros;
  if (text == "explicit-missing") return MaskSemantics::kExplicitMissing;
  throw DataError("unknown mask semantics '" + text + "'");
}

SparseRatings SparseRatings::from_entries(std::size_t n_rows, std::size_t n_cols,
                                          std::vector<Entry> entries, MaskSemantics semantics,
                                          Overrides overrides) {
  for (const Entry& e : entries) {
    if (e.row >= n_rows || e.col >= n_cols) {
      std::ostringstream msg;
      msg << "entry (" << e.row << ", " << e.col << ") outside " << n_rows << " x " << n_cols;
      throw DataError(msg.str());
    }
    if (!std::isfinite(e.value) || e.value < 0.0) {
      std::ostringstream msg;
      msg << "entry (" << e.row << ", " << e.col << ") has invalid value " << e.value;
      throw DataError(msg.str());
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseRatings out;
  out.n_rows_ = n_rows;
  out.n_cols_ = n_cols;
  out.semantics_ = semantics;
  out.row_ptr_.assign(n_rows + 1, 0);

  double max_value = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col) {
      std::ostringstream msg;
      msg << "duplicate entry (" << entries[i].row << ", " << entries[i].col << ")";
      throw DataError(msg.str());
    }
    max_value = std::max(max_value, entries[i].value);
    ++out.row_ptr_[entries[i].row + 1];
  }
  std::size_t max_row_nnz = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    max_row_nnz = std::max(max_row_nnz, out.row_ptr_[r + 1]);
    out.row_ptr_[r + 1] += out.row_ptr_[r];
  }

  if (overrides.lambda_bound) {
    if (!(*overrides.lambda_bound >= max_value) || !std::isfinite(*overrides.lambda_bound)) {
      std::ostringstream msg;
      msg << "lambda_bound " << *overrides.lambda_bound << " below max entry " << max_value;
      throw DataError(msg.str());
    }
    out.lambda_bound_ = *overrides.lambda_bound;
  } else {
    out.lambda_bound_ = max_value;
  }
  if (!entries.empty() && !(out.lambda_bound_ > 0.0)) {
    throw DataError("lambda_bound must be positive for a nonempty matrix");
  }

  if (overrides.sparsity) {
    if (*overrides.sparsity < max_row_nnz) {
      std::ostringstream msg;
      msg << "sparsity " << *overrides.sparsity << " below max row nonzeros " << max_row_nnz;
      throw DataError(msg.str());
    }
    out.sparsity_ = *overrides.sparsity;
  } else {
    out.sparsity_ = max_row_nnz;
  }

  out.entries_ = std::move(entries);
  return out;
}

SparseRatings SparseRatings::from_dense(const Matrix& dense, MaskSemantics semantics,
                                        Overrides overrides) {
  std::vector<Entry> entries;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      const double v = dense(r, c);
      if (v != 0.0 || semantics == MaskSemantics::kExplicitMissing) {
        entries.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), v});
      }
    }
  }
  return from_entries(static_cast<std::size_t>(dense.rows()),
                      static_cast<std::size_t>(dense.cols()), std::move(entries), semantics,
                      overrides);
}

std::span<const Entry> SparseRatings::row(std::size_t r) const {
  if (r >= n_rows_) {
    throw IndexError("row " + std::to_string(r) + " out of range for " +
                     std::to_string(n_rows_) + " rows");
  }
  return std::span<const Entry>(entries_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
}

std::optional<double> SparseRatings::find(std::size_t r, std::size_t c) const {
  if (c >= n_cols_) {
    throw IndexError("column " + std::to_string(c) + " out of range for " +
                     std::to_string(n_cols_) + " columns");
  }
  const auto cells = row(r);
  const auto it = std::lower_bound(cells.begin(), cells.end(), c,
                                   [](const Entry& e, std::size_t col) { return e.col < col; });
  if (it != cells.end() && it->col == c) return it->value;
  return std::nullopt;
}

double SparseRatings::value_at(std::size_t r, std::size_t c) const {
  if (auto v = find(r, c)) return *v;
  if (semantics_ == MaskSemantics::kImplicitZeros) return 0.0;
  throw ParameterError("cell (" + std::to_string(r) + ", " + std::to_string(c) +
                       ") is not observed");
}

SparseRatings SparseRatings::transposed() const {
  std::vector<Entry> flipped;
  flipped.reserve(entries_.size());
  for (const Entry& e : entries_) flipped.push_back({e.col, e.row, e.value});
  // Keep the bound; sparsity of the transpose is its own max row count.
  return from_entries(n_cols_, n_rows_, std::move(flipped), semantics_,
                      {.lambda_bound = lambda_bound_, .sparsity = std::nullopt});
}

SparseRatings SparseRatings::slice_rows(std::span<const std::size_t> rows) const {
  std::vector<Entry> picked;
  for (std::size_t out_row = 0; out_row < rows.size(); ++out_row) {
    for (const Entry& e : row(rows[out_row])) picked.push_back({out_row, e.col, e.value});
  }
  return from_entries(rows.size(), n_cols_, std::move(picked), semantics_);
}

std::size_t SparseRatings::observed_cell_count() const {
  return semantics_ == MaskSemantics::kImplicitZeros ? n_rows_ * n_cols_ : entries_.size();
}

Matrix SparseRatings::to_dense() const {
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(n_rows_),
                              static_cast<Eigen::Index>(n_cols_));
  for (const Entry& e : entries_) {
    dense(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
  }
  return dense;
}

SparseRatings stack_rows(std::span<const SparseRatings> blocks) {
  if (blocks.empty()) throw ParameterError("stack_rows needs at least one block");
  const std::size_t n_cols = blocks.front().n_cols();
  const MaskSemantics semantics = blocks.front().semantics();
  std::vector<Entry> entries;
  std::size_t offset = 0;
  for (const SparseRatings& block : blocks) {
    if (block.n_cols() != n_cols) throw ParameterError("stack_rows: column count mismatch");
    if (block.semantics() != semantics) throw ParameterError("stack_rows: mask semantics mismatch");
    for (const Entry& e : block.entries()) entries.push_back({e.row + offset, e.col, e.value});
    offset += block.n_rows();
  }
  return SparseRatings::from_entries(offset, n_cols, std::move(entries), semantics);
}

void FactorModel::validate() const {
  if (user_factors.cols() != item_factors.cols()) {
    throw ParameterError("user and item factors have different rank");
  }
  auto ok = [](const Matrix& m) {
    return m.allFinite() && (m.size() == 0 || m.minCoeff() >= 0.0);
  };
  if (!ok(user_factors) || !ok(item_factors)) {
    throw ParameterError("factor entries must be finite and non-negative");
  }
}

Vector dense_row(const SparseRatings& x, std::size_t row) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(x.n_cols()));
  for (const Entry& e : x.row(row)) out(static_cast<Eigen::Index>(e.col)) = e.value;
  return out;
}

}  // namespace fedproto
