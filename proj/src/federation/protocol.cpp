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
#include <numeric>

#include "fedproto/dp.hpp"
#include "fedproto/federation.hpp"

namespace fedproto::federation {
namespace {

PrototypeSet make_prototypes(Entity& entity, std::size_t k, const FederatedConfig& cfg,
                             RngStream& rng) {
  switch (cfg.source) {
    case PrototypeSource::kPrivate:
      return clustering::private_prototypes(entity.data, k, cfg.epsilon, cfg.delta, rng,
                                            entity.ledger, cfg.prototype_options);
    case PrototypeSource::kKMeans: {
      PrototypeSet out;
      out.prototypes = clustering::kmeans_baseline(entity.data, k, rng).centers;
      out.entity_id = entity.entity_id;
      return out;
    }
    case PrototypeSource::kKRandom: {
      PrototypeSet out = clustering::krandom_baseline(entity.data, k, rng);
      out.entity_id = entity.entity_id;
      return out;
    }
  }
  throw ParameterError("unknown prototype source");
}

}  // namespace

std::string to_string(PrototypeSource source) {
  switch (source) {
    case PrototypeSource::kPrivate: return "private";
    case PrototypeSource::kKMeans: return "kmeans";
    case PrototypeSource::kKRandom: return "krandom";
  }
  return "unknown";
}

std::size_t FederatedConfig::k_for(const std::string& entity_id) const {
  auto it = k_per_entity.find(entity_id);
  return it == k_per_entity.end() ? k : it->second;
}

Matrix compose_prototypes(std::span<const PrototypeSet> sets) {
  if (sets.empty()) throw ParameterError("compose_prototypes: no prototype sets");
  const Eigen::Index width = sets.front().prototypes.cols();
  Eigen::Index rows = 0;
  for (const PrototypeSet& set : sets) {
    if (set.prototypes.cols() != width) {
      throw ParameterError("compose_prototypes: set from '" + set.entity_id + "' has " +
                           std::to_string(set.prototypes.cols()) + " columns, expected " +
                           std::to_string(width));
    }
    rows += set.prototypes.rows();
  }
  Matrix pooled(rows, width);
  Eigen::Index at = 0;
  for (const PrototypeSet& set : sets) {
    pooled.middleRows(at, set.prototypes.rows()) = set.prototypes;
    at += set.prototypes.rows();
  }
  return pooled;
}

std::vector<std::size_t> entity_order(const std::vector<Entity>& entities) {
  std::vector<std::size_t> order(entities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entities[a].entity_id < entities[b].entity_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (entities[order[i]].entity_id == entities[order[i - 1]].entity_id) {
      throw ParameterError("duplicate entity id '" + entities[order[i]].entity_id + "'");
    }
  }
  return order;
}

FederatedResult run_federated(std::vector<Entity>& entities, const FederatedConfig& cfg,
                              RngStream& rng) {
  if (entities.empty()) throw ParameterError("run_federated: no entities");
  cfg.train.validate();
  if (cfg.source == PrototypeSource::kPrivate) {
    if (!(cfg.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (dp::is_noiseless(cfg.epsilon) && !cfg.allow_noiseless) {
      throw ParameterError("infinite epsilon is a test mode and must be enabled explicitly");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ParameterError("delta must be in (0, 1)");
  }
  const std::vector<std::size_t> order = entity_order(entities);
  const std::size_t n_items = entities[order.front()].data.n_cols();
  std::map<std::string, std::size_t> k_map;
  for (std::size_t idx : order) {
    const Entity& e = entities[idx];
    if (e.data.n_cols() != n_items) {
      throw ParameterError("entity '" + e.entity_id + "' has " + std::to_string(e.data.n_cols()) +
                           " items, expected " + std::to_string(n_items));
    }
    const std::size_t k = cfg.k_for(e.entity_id);
    if (k < 1) throw ParameterError("entity '" + e.entity_id + "': k must be at least 1");
    if (e.data.n_rows() < k) {
      throw ParameterError("entity '" + e.entity_id + "' has " + std::to_string(e.data.n_rows()) +
                           " users, fewer than k = " + std::to_string(k));
    }
    k_map[e.entity_id] = k;
  }

  Transport bus;
  FederatedResult result;

  // Round one: entities upload prototypes.
  for (std::size_t idx : order) {
    Entity& e = entities[idx];
    RngStream entity_rng = rng.child("entity:" + e.entity_id);
    const PrototypeSet set = make_prototypes(e, k_map[e.entity_id], cfg, entity_rng);
    bus.send({Direction::kUp, e.entity_id, PayloadKind::kPrototypeUpload,
              encode_matrix(PayloadKind::kPrototypeUpload, set.prototypes)});
  }

  // Server: pool in entity_id order, learn V, broadcast.
  std::vector<PrototypeSet> received;
  for (std::size_t idx : order) {
    const Message msg = bus.receive(entities[idx].entity_id, Direction::kUp);
    PrototypeSet set;
    set.entity_id = msg.entity_id;
    set.prototypes = decode_matrix(msg.payload, PayloadKind::kPrototypeUpload);
    received.push_back(std::move(set));
  }
  result.server.pooled = compose_prototypes(received);
  result.server.round = 1;
  RngStream server_rng = rng.child("server");
  result.server.item_factors =
      factorization::fit_item_factors(result.server.pooled, cfg.train, server_rng);
  const std::vector<std::uint8_t> broadcast =
      encode_matrix(PayloadKind::kItemMatrixBroadcast, *result.server.item_factors);
  for (std::size_t idx : order) {
    bus.send({Direction::kDown, entities[idx].entity_id, PayloadKind::kItemMatrixBroadcast,
              broadcast});
  }
  result.server.round = 2;

  // Round two: local user factors against the shared item matrix.
  for (std::size_t idx : order) {
    Entity& e = entities[idx];
    const Message msg = bus.receive(e.entity_id, Direction::kDown);
    FactorModel model;
    model.item_factors = decode_matrix(msg.payload, PayloadKind::kItemMatrixBroadcast);
    model.user_factors = factorization::fit_user_factors(e.data, model.item_factors, cfg.train);
    model.lambda = cfg.train.lambda;
    e.model = model;
    result.entity_ids.push_back(e.entity_id);
    result.models.push_back(std::move(model));
    result.ledger.absorb(e.ledger);
  }

  result.log = bus.log();
  result.log.verify(k_map, n_items, cfg.train.rank);
  return result;
}

std::vector<FactorModel> run_individual_baseline(const std::vector<Entity>& entities,
                                                 const factorization::TrainConfig& cfg,
                                                 RngStream& rng) {
  std::vector<FactorModel> models;
  for (std::size_t idx : entity_order(entities)) {
    RngStream entity_rng = rng.child("individual:" + entities[idx].entity_id);
    models.push_back(factorization::joint_factorize(entities[idx].data, cfg, entity_rng).model);
  }
  return models;
}

FactorModel run_central_baseline(const std::vector<Entity>& entities,
                                 const factorization::TrainConfig& cfg, RngStream& rng) {
  if (entities.empty()) throw ParameterError("run_central_baseline: no entities");
  std::vector<SparseRatings> blocks;
  for (std::size_t idx : entity_order(entities)) blocks.push_back(entities[idx].data);
  RngStream central_rng = rng.child("central");
  return factorization::joint_factorize(stack_rows(blocks), cfg, central_rng).model;
}

}  // namespace fedproto::federation
