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

#include <filesystem>
#include <string>
#include <vector>

#include "fedproto/core.hpp"
#include "fedproto/rng.hpp"

namespace fedproto::data {

struct SyntheticConfig {
  std::size_t n = 1000;      // users
  std::size_t m = 50;        // items
  std::size_t rank = 10;     // generator rank
  std::size_t entities = 5;  // H
  double rate_cap = 50.0;
  bool zero_rate = false;    // test hook: every log-rate is 0, so every rate is 1

  void validate() const;
};

struct SyntheticData {
  std::vector<std::string> entity_ids;  // sorted, zero-padded
  std::vector<SparseRatings> entities;  // implicit zeros
  std::vector<std::vector<std::size_t>> rows;  // global row indices per entity
  Matrix user_factors;  // n x rank generator U
  Matrix item_factors;  // m x rank generator V
  Matrix rates;         // n x m Poisson means
};

// X ~ Poisson(min(exp(U V^T / sqrt(rank)), rate_cap)) with standard-normal U
// and V, rows dealt to H entities of near-equal size after a random shuffle.
SyntheticData gen_synthetic(const SyntheticConfig& cfg, RngStream& rng);

// One Poisson draw by sequential inversion.
std::size_t poisson(double rate, RngStream& rng);

struct MovieLensData {
  SparseRatings ratings;             // users x movies, explicit missing, Λ = 5
  std::vector<std::string> keys;     // first ZIP character per user row
  std::vector<long> user_ids;        // row -> UserID
  std::vector<long> movie_ids;       // col -> MovieID
};

// `::`-delimited ratings.dat (UserID::MovieID::Rating::Timestamp) and
// users.dat (UserID::Gender::Age::Occupation::Zip-code). Rows are the users of
// users.dat in id order; columns the rated movies in id order. Throws
// DataError naming file and line on malformed input.
MovieLensData load_movielens(const std::filesystem::path& ratings_path,
                             const std::filesystem::path& users_path);

// `row,col,value` CSV plus key=value metadata; implicit zeros unless the
// metadata says otherwise.
SparseRatings load_counts_csv(const std::filesystem::path& path,
                              const std::filesystem::path& metadata_path);

struct KeyPartition {
  std::vector<std::string> keys;  // sorted
  std::vector<SparseRatings> parts;
  std::vector<std::vector<std::size_t>> rows;
};

// Rows grouped by key; Λ and s recomputed per part. Throws DataError when a
// key is missing (empty) or the key count differs from the row count.
KeyPartition partition_by_key(const SparseRatings& x, const std::vector<std::string>& keys);

}  // namespace fedproto::data
