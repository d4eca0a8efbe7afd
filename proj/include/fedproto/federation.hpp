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

// Simulated two-round federated protocol.
//
// Round one: every entity uploads k_h prototypes of its rows. The server
// stacks them, learns the item matrix V from the stack, and in round two
// broadcasts V back. Entities then fit their own user factors locally. Only
// prototype and item matrices ever cross the in-process bus, and every
// message is recorded in a RoundLog that can be audited afterwards.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedproto/clustering.hpp"
#include "fedproto/core.hpp"
#include "fedproto/factorization.hpp"
#include "fedproto/ledger.hpp"
#include "fedproto/rng.hpp"

namespace fedproto::federation {

struct Entity {
  std::string entity_id;
  SparseRatings data;  // stays with the entity; never serialized
  PrivacyLedger ledger;
  std::optional<FactorModel> model;

  Entity(std::string id, SparseRatings x)
      : entity_id(std::move(id)), data(std::move(x)), ledger(entity_id) {}
};

enum class Direction { kUp, kDown };
enum class PayloadKind { kPrototypeUpload, kItemMatrixBroadcast };

std::string to_string(Direction direction);
std::string to_string(PayloadKind kind);

// Matrix payload wire format: "FPM1", one kind byte, rows and cols as
// little-endian u64, then rows * cols little-endian IEEE doubles, row-major.
std::vector<std::uint8_t> encode_matrix(PayloadKind kind, const Matrix& matrix);
// Throws DataError on a truncated buffer, bad magic or a kind other than
// `expected`.
Matrix decode_matrix(std::span<const std::uint8_t> bytes, PayloadKind expected);

struct Message {
  Direction direction = Direction::kUp;
  std::string entity_id;
  PayloadKind kind = PayloadKind::kPrototypeUpload;
  std::vector<std::uint8_t> payload;
};

struct MessageRecord {
  Direction direction = Direction::kUp;
  std::string entity_id;
  PayloadKind kind = PayloadKind::kPrototypeUpload;
  std::size_t byte_count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

class RoundLog {
 public:
  void record(const Message& message);
  const std::vector<MessageRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Throws ProtocolError unless the log holds exactly one upload followed by
  // one broadcast per listed entity, all uploads precede all broadcasts,
  // uploads are k_h x m and broadcasts m x rank, and byte counts match the
  // wire format.
  void verify(const std::map<std::string, std::size_t>& k_per_entity, std::size_t n_items,
              std::size_t rank) const;

  // One `direction,entity_id,payload_kind,byte_count` line per message.
  std::string export_lines() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<MessageRecord> records_;
};

// In-process message bus. Every send is logged before delivery.
class Transport {
 public:
  void send(Message message);
  // Next queued message for `entity_id` travelling in `direction`; throws
  // ProtocolError when there is none.
  Message receive(const std::string& entity_id, Direction direction);
  const RoundLog& log() const { return log_; }

 private:
  RoundLog log_;
  std::map<std::pair<std::string, Direction>, std::deque<Message>> queues_;
};

struct ServerState {
  Matrix pooled;  // stacked prototypes, entity_id order
  std::optional<Matrix> item_factors;
  int round = 0;
};

enum class PrototypeSource {
  kPrivate,  // ε-DP prototypes
  kKMeans,   // Lloyd centers, not private
  kKRandom,  // sampled rows, not private
};

std::string to_string(PrototypeSource source);

struct FederatedConfig {
  std::size_t k = 10;
  std::map<std::string, std::size_t> k_per_entity;  // overrides k for listed entities
  double epsilon = 0.1;
  double delta = 0.01;
  PrototypeSource source = PrototypeSource::kPrivate;
  clustering::PrototypeOptions prototype_options;
  factorization::TrainConfig train;
  bool allow_noiseless = false;  // gate for epsilon = infinity

  std::size_t k_for(const std::string& entity_id) const;
};

struct FederatedResult {
  std::vector<std::string> entity_ids;  // sorted; indexes `models`
  std::vector<FactorModel> models;
  RoundLog log;
  PrivacyLedger ledger{"", Composition::kParallel};
  ServerState server;
};

// Row-stack of the sets in the given order. Throws ParameterError on a
// width mismatch or an empty list.
Matrix compose_prototypes(std::span<const PrototypeSet> sets);

// The full protocol. Entities are processed in entity_id order; each
// entity's ledger receives its own charges and the returned ledger composes
// them in parallel. The log is verified before returning.
FederatedResult run_federated(std::vector<Entity>& entities, const FederatedConfig& cfg,
                              RngStream& rng);

// joint_factorize on each entity alone, in entity_id order.
std::vector<FactorModel> run_individual_baseline(const std::vector<Entity>& entities,
                                                 const factorization::TrainConfig& cfg,
                                                 RngStream& rng);

// joint_factorize on all entities' rows stacked in entity_id order.
FactorModel run_central_baseline(const std::vector<Entity>& entities,
                                 const factorization::TrainConfig& cfg, RngStream& rng);

// Indices of `entities` sorted by entity_id; throws ParameterError on
// duplicate ids.
std::vector<std::size_t> entity_order(const std::vector<Entity>& entities);

}  // namespace fedproto::federation
