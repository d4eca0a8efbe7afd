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
#include <map>

#include "fedproto/experiment.hpp"

namespace fedproto::experiment {
namespace {

struct Unit {
  FactorModel model;
  SparseRatings train;
  std::vector<eval::TestEntry> test;
};

const std::map<std::string, Regime>& regime_names() {
  static const std::map<std::string, Regime> names{
      {"federated", Regime::kFederated}, {"individual", Regime::kIndividual},
      {"central", Regime::kCentral},     {"mf+kmeans", Regime::kMfKMeans},
      {"mf+krandom", Regime::kMfKRandom}, {"mf+private", Regime::kMfPrivate},
  };
  return names;
}

federation::FederatedConfig protocol_config(const Config& cfg, federation::PrototypeSource source) {
  federation::FederatedConfig fc;
  fc.k = cfg.k;
  fc.epsilon = cfg.epsilon;
  fc.delta = cfg.delta;
  fc.source = source;
  fc.prototype_options = cfg.prototypes;
  fc.train = cfg.train;
  fc.allow_noiseless = cfg.allow_noiseless;
  return fc;
}

}  // namespace

std::string to_string(Regime regime) {
  for (const auto& [name, value] : regime_names()) {
    if (value == regime) return name;
  }
  return "unknown";
}

Regime parse_regime(const std::string& text) {
  auto it = regime_names().find(text);
  if (it == regime_names().end()) {
    throw ParameterError("unknown regime '" + text +
                         "' (federated, individual, central, mf+kmeans, mf+krandom, mf+private)");
  }
  return it->second;
}

Report run(const std::vector<NamedMatrix>& entities, const Config& cfg) {
  if (entities.empty()) throw ParameterError("no entities to evaluate");
  cfg.train.validate();
  std::vector<std::size_t> order(entities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return entities[a].id < entities[b].id; });

  RngStream master(cfg.seed);
  std::vector<std::string> ids;
  std::vector<eval::TestSplit> splits;
  Report report;
  report.regime = cfg.regime;
  for (std::size_t idx : order) {
    const NamedMatrix& e = entities[idx];
    if (!ids.empty() && ids.back() == e.id) throw ParameterError("duplicate entity id '" + e.id + "'");
    RngStream split_rng = master.child("split:" + e.id);
    splits.push_back(
        eval::make_test_split(e.data, split_rng, cfg.test_fraction, cfg.test_per_user, e.id));
    ids.push_back(e.id);
    report.entities.push_back({e.id, e.data.n_rows(), splits.back().test.size(), 0.0});
  }

  auto make_entities = [&] {
    std::vector<federation::Entity> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out.emplace_back(ids[i], splits[i].train);
    return out;
  };
  // All rows in id order, with test rows shifted to match.
  auto pooled_unit = [&] {
    Unit unit;
    std::vector<SparseRatings> blocks;
    std::size_t offset = 0;
    for (const eval::TestSplit& split : splits) {
      blocks.push_back(split.train);
      for (eval::TestEntry t : split.test) {
        t.row += offset;
        unit.test.push_back(t);
      }
      offset += split.train.n_rows();
    }
    unit.train = stack_rows(blocks);
    return unit;
  };

  RngStream regime_rng = master.child("regime");
  std::vector<Unit> units;
  switch (cfg.regime) {
    case Regime::kFederated: {
      std::vector<federation::Entity> ents = make_entities();
      federation::FederatedResult res = federation::run_federated(
          ents, protocol_config(cfg, federation::PrototypeSource::kPrivate), regime_rng);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        units.push_back({res.models[i], splits[i].train, splits[i].test});
        report.entities[i].epsilon = res.ledger.entity_total(ids[i]);
      }
      report.total_epsilon = res.ledger.total();
      report.ledger = res.ledger;
      report.round_log = res.log;
      break;
    }
    case Regime::kIndividual: {
      const std::vector<FactorModel> models =
          federation::run_individual_baseline(make_entities(), cfg.train, regime_rng);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        units.push_back({models[i], splits[i].train, splits[i].test});
      }
      break;
    }
    case Regime::kCentral: {
      Unit unit = pooled_unit();
      unit.model = federation::run_central_baseline(make_entities(), cfg.train, regime_rng);
      units.push_back(std::move(unit));
      break;
    }
    case Regime::kMfKMeans:
    case Regime::kMfKRandom:
    case Regime::kMfPrivate: {
      const auto source = cfg.regime == Regime::kMfKMeans    ? federation::PrototypeSource::kKMeans
                          : cfg.regime == Regime::kMfKRandom ? federation::PrototypeSource::kKRandom
                                                             : federation::PrototypeSource::kPrivate;
      Unit unit = pooled_unit();
      std::vector<federation::Entity> pooled;
      pooled.emplace_back("pooled", unit.train);
      federation::FederatedResult res =
          federation::run_federated(pooled, protocol_config(cfg, source), regime_rng);
      unit.model = res.models.front();
      if (source == federation::PrototypeSource::kPrivate) {
        report.total_epsilon = res.ledger.total();
        report.ledger = res.ledger;
        for (EntitySummary& s : report.entities) s.epsilon = *report.total_epsilon;
      }
      report.round_log = res.log;
      units.push_back(std::move(unit));
      break;
    }
  }

  SquaredErrorSum train_err;
  SquaredErrorSum test_err;
  eval::RankSum ranks;
  for (const Unit& unit : units) {
    train_err += eval::train_error(unit.model, unit.train);
    if (unit.test.empty()) continue;
    test_err += eval::test_error(unit.model, unit.test);
    ranks += eval::rank_sums(factorization::predict(unit.model), unit.test, unit.train,
                             cfg.eligible);
  }
  report.rmse_train = train_err.rmse();
  if (test_err.count > 0) report.rmse_test = test_err.rmse();
  if (ranks.weight > 0.0) report.mean_rank = ranks.mean();
  return report;
}

}  // namespace fedproto::experiment
