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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedproto/errors.hpp"

namespace fedproto {

// Row-major so that a "row" (a user, a prototype, a projected point) is
// contiguous in memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// How cells that are not stored in a SparseRatings should be read.
enum class MaskSemantics {
  kImplicitZeros,    // count data: an absent cell is a true zero
  kExplicitMissing,  // rating data: an absent cell is unobserved
};

std::string to_string(MaskSemantics semantics);
MaskSemantics parse_mask_semantics(const std::string& text);

struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// A partially observed, non-negative user x item matrix.
//
// Entries are kept sorted by (row, col) with a CSR row index. The bound
// `lambda_bound` caps every value and `sparsity` caps per-row nonzeros; both
// are derived from the data unless overridden at construction.
class SparseRatings {
 public:
  struct Overrides {
    std::optional<double> lambda_bound;
    std::optional<std::size_t> sparsity;
  };

  SparseRatings() : row_ptr_(1, 0) {}

  // Validates and sorts `entries`. Throws DataError on negative, non-finite,
  // duplicate, or out-of-range entries, or when an override is violated.
  static SparseRatings from_entries(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Entry> entries, MaskSemantics semantics,
                                    Overrides overrides = {});

  static SparseRatings from_dense(const Matrix& dense, MaskSemantics semantics,
                                  Overrides overrides = {});

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return entries_.size(); }
  double lambda_bound() const { return lambda_bound_; }
  std::size_t sparsity() const { return sparsity_; }
  MaskSemantics semantics() const { return semantics_; }
  bool empty() const { return entries_.empty(); }

  std::span<const Entry> entries() const { return entries_; }
  std::span<const Entry> row(std::size_t r) const;
  std::size_t row_nnz(std::size_t r) const { return row(r).size(); }

  // Stored value, or nullopt when the cell is absent.
  std::optional<double> find(std::size_t r, std::size_t c) const;
  // Value under the mask semantics: absent cells read as 0 for implicit zeros
  // and throw ParameterError for explicit missing.
  double value_at(std::size_t r, std::size_t c) const;

  // Column-major view as a new matrix with rows and columns swapped.
  SparseRatings transposed() const;

  // The listed rows, in order, as a new matrix; Λ and s recomputed.
  SparseRatings slice_rows(std::span<const std::size_t> rows) const;

  // Number of cells entering a fit: n*m for implicit zeros, nnz otherwise.
  std::size_t observed_cell_count() const;

  Matrix to_dense() const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  double lambda_bound_ = 0.0;
  std::size_t sparsity_ = 0;
  MaskSemantics semantics_ = MaskSemantics::kImplicitZeros;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_ptr_;
};

// Stack row blocks that share a column space.
SparseRatings stack_rows(std::span<const SparseRatings> blocks);

// Non-negative rank-l factorization X ~ U V^T.
struct FactorModel {
  Matrix user_factors;  // n_rows x rank
  Matrix item_factors;  // n_cols x rank
  double lambda = 0.0;

  std::size_t rank() const { return static_cast<std::size_t>(item_factors.cols()); }
  // Throws ParameterError unless both factors share the rank and are finite
  // and non-negative.
  void validate() const;
};

// k privatized (or baseline) row prototypes of one entity.
struct PrototypeSet {
  std::string entity_id;
  Matrix prototypes;  // k x m, entries in [0, Λ]
  double epsilon_spent = 0.0;
  double delta = 0.0;

  std::size_t k() const { return static_cast<std::size_t>(prototypes.rows()); }
};

// sqrt(mean over cells of (x_ij - u_i . v_j)^2).
double masked_rmse(const FactorModel& model, const SparseRatings& target,
                   std::span<const Cell> cells);

// Running sums so RMSE can be pooled across entities.
struct SquaredErrorSum {
  double sum = 0.0;
  std::size_t count = 0;

  SquaredErrorSum& operator+=(const SquaredErrorSum& other) {
    sum += other.sum;
    count += other.count;
    return *this;
  }
  double rmse() const;
};

SquaredErrorSum squared_error(const FactorModel& model, const SparseRatings& target,
                              std::span<const Cell> cells);

// Cells a fit trains on: every cell for implicit zeros, stored cells
// otherwise.
std::vector<Cell> training_cells(const SparseRatings& x);

// Zero-filled dense copy of one row.
Vector dense_row(const SparseRatings& x, std::size_t row);

}  // namespace fedproto
