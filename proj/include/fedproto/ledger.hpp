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

#include <string>
#include <vector>

namespace fedproto {

enum class Composition {
  kSequential,  // mechanisms run on the same data: budgets add
  kParallel,    // mechanisms run on disjoint entities: the max entity total
};

struct PrivacyEvent {
  std::string entity_id;
  std::string mechanism;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Record of every mechanism invocation and the budget it consumed.
//
// Events are attributed to an entity. Within an entity budgets compose
// sequentially; across entities the global total is the largest entity total.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(std::string entity_id = {},
                         Composition rule = Composition::kSequential)
      : entity_id_(std::move(entity_id)), rule_(rule) {}

  const std::string& entity_id() const { return entity_id_; }
  Composition composition() const { return rule_; }
  const std::vector<PrivacyEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  // Throws ParameterError unless epsilon > 0 (infinity is allowed and marks a
  // noiseless debug run).
  void charge(std::string mechanism, double epsilon, double delta = 0.0);

  // Appends another ledger's events, keeping their entity attribution.
  void absorb(const PrivacyLedger& other);

  double sequential_total() const;
  // Max over entities of each entity's sequential total.
  double parallel_total() const;
  double total() const;

  double entity_total(const std::string& entity_id) const;
  std::vector<std::string> entities() const;

 private:
  std::string entity_id_;
  Composition rule_;
  std::vector<PrivacyEvent> events_;
};

}  // namespace fedproto
