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

#include "fedproto/ledger.hpp"

#include <algorithm>
#include <map>

#include "fedproto/errors.hpp"

namespace fedproto {

void PrivacyLedger::charge(std::string mechanism, double epsilon, double delta) {
  if (!(epsilon > 0.0)) {
    throw ParameterError("mechanism '" + mechanism + "' charged non-positive epsilon");
  }
  if (!(delta >= 0.0)) throw ParameterError("negative delta charged");
  events_.push_back({entity_id_, std::move(mechanism), epsilon, delta});
}

void PrivacyLedger::absorb(const PrivacyLedger& other) {
  events_.insert(events_.end(), other.events_.begin(), other.events_.end());
}

double PrivacyLedger::sequential_total() const {
  double total = 0.0;
  for (const auto& e : events_) total += e.epsilon;
  return total;
}

double PrivacyLedger::parallel_total() const {
  std::map<std::string, double> per_entity;
  for (const auto& e : events_) per_entity[e.entity_id] += e.epsilon;
  double best = 0.0;
  for (const auto& [id, eps] : per_entity) best = std::max(best, eps);
  return best;
}

double PrivacyLedger::total() const {
  return rule_ == Composition::kSequential ? sequential_total() : parallel_total();
}

double PrivacyLedger::entity_total(const std::string& entity_id) const {
  double total = 0.0;
  for (const auto& e : events_) {
    if (e.entity_id == entity_id) total += e.epsilon;
  }
  return total;
}

std::vector<std::string> PrivacyLedger::entities() const {
  std::vector<std::string> ids;
  for (const auto& e : events_) {
    if (std::find(ids.begin(), ids.end(), e.entity_id) == ids.end()) ids.push_back(e.entity_id);
  }
  return ids;
}

}  // namespace fedproto
