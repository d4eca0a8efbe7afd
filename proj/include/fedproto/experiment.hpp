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

// One end-to-end evaluation: hold out test entries per entity, train under a
// regime, and report RMSE, mean percentile rank and the privacy spend.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedproto/clustering.hpp"
#include "fedproto/eval.hpp"
#include "fedproto/factorization.hpp"
#include "fedproto/federation.hpp"

namespace fedproto::experiment {

enum class Regime {
  kFederated,   // per-entity private prototypes, shared item matrix
  kIndividual,  // each entity factorizes alone
  kCentral,     // all rows pooled, plain NMF (not private)
  kMfKMeans,    // pooled rows, item matrix from k-means centers
  kMfKRandom,   // pooled rows, item matrix from k random rows
  kMfPrivate,   // pooled rows, item matrix from private prototypes
};

std::string to_string(Regime regime);
// Accepts federated, individual, central, mf+kmeans, mf+krandom, mf+private.
Regime parse_regime(const std::string& text);

struct NamedMatrix {
  std::string id;
  SparseRatings data;
};

struct Config {
  Regime regime = Regime::kFederated;
  std::size_t k = 10;
  double epsilon = 0.1;
  double delta = 0.01;
  bool allow_noiseless = false;
  factorization::TrainConfig train;
  clustering::PrototypeOptions prototypes;
  double test_fraction = 0.2;
  std::size_t test_per_user = 5;
  eval::EligibleItems eligible = eval::EligibleItems::kExcludeTrained;
  std::uint64_t seed = 0;
};

struct EntitySummary {
  std::string id;
  std::size_t rows = 0;
  std::size_t test_entries = 0;
  double epsilon = 0.0;
};

struct Report {
  Regime regime = Regime::kFederated;
  double rmse_train = 0.0;
  std::optional<double> rmse_test;  // absent when no entry was held out
  std::optional<double> mean_rank;
  std::optional<double> total_epsilon;  // absent for non-private regimes
  std::optional<federation::RoundLog> round_log;  // protocol regimes only
  PrivacyLedger ledger{"", Composition::kParallel};
  std::vector<EntitySummary> entities;
};

// Entities are processed in id order. All randomness derives from cfg.seed.
Report run(const std::vector<NamedMatrix>& entities, const Config& cfg);

}  // namespace fedproto::experiment
