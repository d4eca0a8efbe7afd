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

#include <span>
#include <string>
#include <vector>

#include "fedproto/core.hpp"
#include "fedproto/rng.hpp"

namespace fedproto::eval {

struct TestEntry {
  std::string entity_id;
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

struct TestSplit {
  SparseRatings train;
  std::vector<TestEntry> test;
  double user_fraction = 0.2;
  std::size_t per_user = 5;
};

// Picks round(user_fraction * n_rows) users uniformly among those with at
// least `per_user` stored entries (fewer if not enough qualify) and moves
// `per_user` random stored entries of each into the test set. The training
// matrix keeps the original shape, semantics and Λ. Throws ParameterError on
// empty data or a fraction outside [0, 1].
TestSplit make_test_split(const SparseRatings& x, RngStream& rng, double user_fraction = 0.2,
                          std::size_t per_user = 5, const std::string& entity_id = {});

// Squared error of `model` over the test entries.
SquaredErrorSum test_error(const FactorModel& model, std::span<const TestEntry> test);
// Squared error over the training cells of `train`.
SquaredErrorSum train_error(const FactorModel& model, const SparseRatings& train);

enum class EligibleItems {
  kExcludeTrained,  // every item the user has no training entry for
  kAll,
};

// Value-weighted percentile ranks, kept as sums so entities can be pooled.
struct RankSum {
  double weighted_rank = 0.0;
  double weight = 0.0;

  RankSum& operator+=(const RankSum& other) {
    weighted_rank += other.weighted_rank;
    weight += other.weight;
    return *this;
  }
  // Throws ParameterError("degenerate weights") when the weight is zero.
  double mean() const;
};

// Percentile of test item i in user u's predicted ranking over eligible
// items: (#items scored strictly higher + half the other ties) / (#eligible - 1),
// so 0 is the top. Test values are the weights and must be non-negative.
RankSum rank_sums(const Matrix& scores, std::span<const TestEntry> test,
                  const SparseRatings& train, EligibleItems mode = EligibleItems::kExcludeTrained);

double mean_average_rank(const Matrix& scores, std::span<const TestEntry> test,
                         const SparseRatings& train,
                         EligibleItems mode = EligibleItems::kExcludeTrained);

}  // namespace fedproto::eval
