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

#include "fedproto/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "fedproto/data.hpp"
#include "fedproto/dp.hpp"
#include "fedproto/experiment.hpp"
#include "fedproto/io.hpp"

namespace fedproto::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct SynthOptions {
  std::size_t n = 1000;
  std::size_t m = 50;
  std::size_t rank = 10;
  std::size_t entities = 5;
  double rate_cap = 50.0;
  std::uint64_t seed = 0;
  std::string out_dir = "fedproto-data";
  std::string config;  // consumed by expand_config before parsing
};

struct RunOptions {
  std::string dataset;
  std::string regime = "federated";
  std::size_t k = 10;
  double epsilon = 0.1;
  double delta = 0.01;
  std::size_t rank = 10;
  double lambda = 0.1;
  std::size_t entities = 0;  // 0 keeps the dataset's own partition
  std::uint64_t seed = 0;
  std::string out_dir = "fedproto-out";
  bool infinite_epsilon = false;
  int max_iters = 200;
  double tolerance = 1e-6;
  std::size_t prototype_trials = 0;  // 0 = default for each count below
  std::size_t candidate_trials = 0;
  std::size_t swap_iterations = 0;
  std::size_t max_candidates = 4096;
  double test_fraction = 0.2;
  std::size_t test_per_user = 5;
  std::string eligible = "exclude-trained";
  std::string config;  // consumed by expand_config before parsing
};

struct SweepOptions {
  RunOptions base;
  std::vector<std::string> regimes{"federated"};
  std::vector<std::size_t> ks;
  std::vector<double> epsilons;
  std::vector<std::size_t> ranks;
  std::size_t seeds = 1;
};

json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

std::string csv_number(double v) { return std::isfinite(v) ? io::format_double(v) : "inf"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string padded_id(std::size_t h, std::size_t count) {
  std::string id = std::to_string(h);
  id.insert(0, std::to_string(count - 1).size() - id.size(), '0');
  return "entity-" + id;
}

// Directory with ratings.dat + users.dat (MovieLens, split by ZIP digit),
// directory with dataset.meta (one CSV pair per entity), or a single CSV
// whose metadata sits next to it with a .meta extension.
std::vector<experiment::NamedMatrix> load_dataset(const fs::path& path) {
  std::vector<experiment::NamedMatrix> out;
  if (fs::is_directory(path) && fs::exists(path / "ratings.dat")) {
    const data::MovieLensData ml = data::load_movielens(path / "ratings.dat", path / "users.dat");
    data::KeyPartition parts = data::partition_by_key(ml.ratings, ml.keys);
    for (std::size_t i = 0; i < parts.keys.size(); ++i) {
      out.push_back({"zip-" + parts.keys[i], std::move(parts.parts[i])});
    }
    return out;
  }
  if (fs::is_directory(path)) {
    const io::Metadata meta = io::read_metadata(path / "dataset.meta");
    auto it = meta.find("entities");
    if (it == meta.end()) throw DataError((path / "dataset.meta").string() + ": missing entities");
    for (const std::string& id : split_list(it->second)) {
      out.push_back({id, data::load_counts_csv(path / (id + ".csv"), path / (id + ".meta"))});
    }
    if (out.empty()) throw DataError((path / "dataset.meta").string() + ": no entities listed");
    return out;
  }
  if (!fs::exists(path)) throw DataError("dataset not found: " + path.string());
  fs::path meta = path;
  meta.replace_extension(".meta");
  out.push_back({"entity-0", data::load_counts_csv(path, meta)});
  return out;
}

// Pool every row and deal them at random into `count` near-equal entities.
std::vector<experiment::NamedMatrix> resplit(const std::vector<experiment::NamedMatrix>& in,
                                             std::size_t count, std::uint64_t seed) {
  std::vector<SparseRatings> blocks;
  for (const auto& e : in) blocks.push_back(e.data);
  const SparseRatings all = stack_rows(blocks);
  if (count > all.n_rows()) {
    throw ParameterError("cannot split " + std::to_string(all.n_rows()) + " users into " +
                         std::to_string(count) + " entities");
  }
  std::vector<std::size_t> perm(all.n_rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng = RngStream(seed).child("resplit");
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  std::vector<experiment::NamedMatrix> out;
  for (std::size_t h = 0; h < count; ++h) {
    std::vector<std::size_t> rows(perm.begin() + static_cast<std::ptrdiff_t>(h * perm.size() / count),
                                  perm.begin() + static_cast<std::ptrdiff_t>((h + 1) * perm.size() / count));
    std::sort(rows.begin(), rows.end());
    out.push_back({padded_id(h, count), all.slice_rows(rows)});
  }
  return out;
}

void validate(const RunOptions& o) {
  if (o.dataset.empty()) throw ParameterError("--dataset is required");
  if (o.k < 1) throw ParameterError("--k must be at least 1");
  if (std::isinf(o.epsilon) && !o.infinite_epsilon) {
    throw ParameterError("infinite --epsilon requires --test-mode-infinite-epsilon");
  }
  if (!(o.epsilon > 0.0)) throw ParameterError("--epsilon must be positive");
  if (!(o.delta > 0.0 && o.delta < 1.0)) throw ParameterError("--delta must be in (0, 1)");
  if (o.rank < 1) throw ParameterError("--rank must be at least 1");
  if (!(o.lambda >= 0.0)) throw ParameterError("--lambda must be non-negative");
  if (!(o.test_fraction >= 0.0 && o.test_fraction <= 1.0)) {
    throw ParameterError("--test-fraction must be in [0, 1]");
  }
  if (o.eligible != "exclude-trained" && o.eligible != "all") {
    throw ParameterError("--eligible must be exclude-trained or all");
  }
}

experiment::Config to_config(const RunOptions& o) {
  experiment::Config cfg;
  cfg.regime = experiment::parse_regime(o.regime);
  cfg.k = o.k;
  cfg.epsilon = o.infinite_epsilon ? dp::kNoiseless : o.epsilon;
  cfg.allow_noiseless = o.infinite_epsilon;
  cfg.delta = o.delta;
  cfg.train.rank = o.rank;
  cfg.train.lambda = o.lambda;
  cfg.train.max_outer_iters = o.max_iters;
  cfg.train.tolerance = o.tolerance;
  if (o.prototype_trials > 0) cfg.prototypes.trials = o.prototype_trials;
  if (o.candidate_trials > 0) cfg.prototypes.candidate_trials = o.candidate_trials;
  if (o.swap_iterations > 0) cfg.prototypes.swap_iterations = o.swap_iterations;
  cfg.prototypes.max_candidates = o.max_candidates;
  cfg.test_fraction = o.test_fraction;
  cfg.test_per_user = o.test_per_user;
  cfg.eligible =
      o.eligible == "all" ? eval::EligibleItems::kAll : eval::EligibleItems::kExcludeTrained;
  cfg.seed = o.seed;
  return cfg;
}

json config_echo(const RunOptions& o) {
  return json{{"dataset", o.dataset},
              {"regime", o.regime},
              {"k", o.k},
              {"epsilon", number_or_inf(o.infinite_epsilon ? dp::kNoiseless : o.epsilon)},
              {"delta", o.delta},
              {"rank", o.rank},
              {"lambda", o.lambda},
              {"entities", o.entities},
              {"seed", o.seed},
              {"out_dir", o.out_dir},
              {"test_mode_infinite_epsilon", o.infinite_epsilon},
              {"max_iters", o.max_iters},
              {"tolerance", o.tolerance},
              {"prototype_trials", o.prototype_trials},
              {"candidate_trials", o.candidate_trials},
              {"swap_iterations", o.swap_iterations},
              {"max_candidates", o.max_candidates},
              {"test_fraction", o.test_fraction},
              {"test_per_user", o.test_per_user},
              {"eligible", o.eligible}};
}

json report_json(const experiment::Report& r, const RunOptions& o) {
  json j;
  j["regime"] = experiment::to_string(r.regime);
  j["rmse_train"] = r.rmse_train;
  j["rmse_test"] = r.rmse_test ? json(*r.rmse_test) : json(nullptr);
  j["mean_rank"] = r.mean_rank ? json(*r.mean_rank) : json(nullptr);
  j["total_epsilon"] = r.total_epsilon ? number_or_inf(*r.total_epsilon) : json(nullptr);
  j["seed"] = o.seed;
  j["config"] = config_echo(o);
  json ents = json::array();
  for (const auto& e : r.entities) {
    ents.push_back({{"id", e.id},
                    {"rows", e.rows},
                    {"test_entries", e.test_entries},
                    {"epsilon", number_or_inf(e.epsilon)}});
  }
  j["entities"] = ents;
  if (r.round_log) j["round_log_messages"] = r.round_log->size();
  return j;
}

void add_run_flags(CLI::App* cmd, RunOptions& o, bool single_run) {
  cmd->add_option("--dataset", o.dataset, "dataset directory or counts CSV")->required();
  if (single_run) {
    cmd->add_option("--regime", o.regime,
                    "federated | individual | central | mf+kmeans | mf+krandom | mf+private");
    cmd->add_option("--k", o.k, "prototypes per entity");
    cmd->add_option("--epsilon", o.epsilon, "privacy budget per entity");
    cmd->add_option("--rank", o.rank, "latent factors");
  }
  cmd->add_option("--delta", o.delta, "failure probability of the private clustering");
  cmd->add_option("--lambda", o.lambda, "ridge weight");
  cmd->add_option("--entities", o.entities, "re-deal all users into this many entities");
  cmd->add_option("--seed", o.seed, "master seed")->envname("FEDPROTO_SEED");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_flag("--test-mode-infinite-epsilon", o.infinite_epsilon,
                "disable all noise (testing only)");
  cmd->add_option("--max-iters", o.max_iters, "outer ALS iterations");
  cmd->add_option("--tolerance", o.tolerance, "relative objective change to stop ALS");
  cmd->add_option("--prototype-trials", o.prototype_trials, "independent clustering trials");
  cmd->add_option("--candidate-trials", o.candidate_trials, "shifted partitions per trial");
  cmd->add_option("--swap-iterations", o.swap_iterations, "local swap steps");
  cmd->add_option("--max-candidates", o.max_candidates, "candidate centers kept (0 = all)");
  cmd->add_option("--test-fraction", o.test_fraction, "fraction of users with held-out entries");
  cmd->add_option("--test-per-user", o.test_per_user, "held-out entries per selected user");
  cmd->add_option("--eligible", o.eligible, "ranked items: exclude-trained | all");
  cmd->add_option("--config", o.config, "key=value configuration file; flags take precedence");
}

std::vector<experiment::NamedMatrix> prepare(const RunOptions& o) {
  std::vector<experiment::NamedMatrix> entities = load_dataset(o.dataset);
  if (o.entities > 0) entities = resplit(entities, o.entities, o.seed);
  return entities;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.entities < 1) throw ParameterError("--entities must be at least 1");
  data::SyntheticConfig cfg;
  cfg.n = o.n;
  cfg.m = o.m;
  cfg.rank = o.rank;
  cfg.entities = o.entities;
  cfg.rate_cap = o.rate_cap;
  RngStream rng(o.seed);
  const data::SyntheticData synth = data::gen_synthetic(cfg, rng);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::string ids;
  for (std::size_t h = 0; h < synth.entities.size(); ++h) {
    const std::string& id = synth.entity_ids[h];
    io::write_ratings(synth.entities[h], dir / (id + ".csv"), dir / (id + ".meta"));
    ids += (h ? "," : "") + id;
  }
  io::write_matrix_csv(synth.user_factors, dir / "generator_U.csv");
  io::write_matrix_csv(synth.item_factors, dir / "generator_V.csv");
  io::write_metadata(dir / "dataset.meta", {{"kind", "synthetic"},
                                            {"entities", ids},
                                            {"n", std::to_string(o.n)},
                                            {"m", std::to_string(o.m)},
                                            {"rank", std::to_string(o.rank)},
                                            {"rate_cap", io::format_double(o.rate_cap)},
                                            {"seed", std::to_string(o.seed)}});
  out << "wrote " << synth.entities.size() << " entities to " << dir.string() << '\n';
  return kOk;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  validate(o);
  const experiment::Config cfg = to_config(o);
  const experiment::Report report = experiment::run(prepare(o), cfg);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const json j = report_json(report, o);
  write_text(dir / "report.json", j.dump(2) + "\n");
  if (report.round_log) report.round_log->write(dir / "roundlog.csv");
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_sweep(SweepOptions o, std::ostream& out) {
  if (o.ks.empty()) o.ks = {o.base.k};
  if (o.epsilons.empty()) o.epsilons = {o.base.epsilon};
  if (o.ranks.empty()) o.ranks = {o.base.rank};
  if (o.regimes.empty() || o.seeds < 1) throw ParameterError("empty sweep grid");

  struct Cell {
    RunOptions opts;
  };
  std::vector<Cell> cells;
  for (const std::string& regime : o.regimes) {
    experiment::parse_regime(regime);
    for (std::size_t k : o.ks) {
      for (std::size_t rank : o.ranks) {
        for (double eps : o.epsilons) {
          for (std::size_t s = 0; s < o.seeds; ++s) {
            RunOptions cell = o.base;
            cell.regime = regime;
            cell.k = k;
            cell.rank = rank;
            cell.epsilon = eps;
            cell.seed = o.base.seed + s;
            validate(cell);
            cells.push_back({cell});
          }
        }
      }
    }
  }

  const std::vector<experiment::NamedMatrix> raw = load_dataset(o.base.dataset);
  std::vector<std::string> rows(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
  const auto n_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    try {
      const RunOptions& cell = cells[ci].opts;
      const experiment::Report r = experiment::run(
          cell.entities > 0 ? resplit(raw, cell.entities, cell.seed) : raw, to_config(cell));
      std::ostringstream line;
      line << cell.regime << ',' << cell.k << ',' << cell.rank << ','
           << csv_number(cell.infinite_epsilon ? dp::kNoiseless : cell.epsilon) << ','
           << cell.seed << ',' << io::format_double(r.rmse_train) << ','
           << (r.rmse_test ? io::format_double(*r.rmse_test) : "") << ','
           << (r.mean_rank ? io::format_double(*r.mean_rank) : "") << ','
           << (r.total_epsilon ? csv_number(*r.total_epsilon) : "");
      rows[ci] = line.str();
    } catch (...) {
      failures[ci] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::string table = "regime,k,rank,epsilon,seed,rmse_train,rmse_test,mean_rank,total_epsilon\n";
  for (const std::string& row : rows) table += row + "\n";
  const fs::path dir(o.base.out_dir);
  fs::create_directories(dir);
  write_text(dir / "sweep.csv", table);
  json echo = config_echo(o.base);
  echo["regimes"] = o.regimes;
  echo["k_values"] = o.ks;
  json eps = json::array();
  for (double e : o.epsilons) eps.push_back(number_or_inf(e));
  echo["epsilons"] = eps;
  echo["ranks"] = o.ranks;
  echo["seeds"] = o.seeds;
  write_text(dir / "sweep_config.json", echo.dump(2) + "\n");
  out << table;
  return kOk;
}

// Replaces `--config FILE` with one `--key=value` argument per line of the
// file whose flag is not already on the command line, so flags take
// precedence. CLI11 only reads config files attached to the root app, hence
// the expansion here.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string file;
    std::size_t span = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      span = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      span = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + span));
    io::Metadata meta;
    try {
      meta = io::read_metadata(file);
    } catch (const DataError& e) {
      throw ParameterError(std::string("config file: ") + e.what());
    }
    std::vector<std::string> injected;
    for (const auto& [key, value] : meta) {
      const std::string flag = "--" + key;
      const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
      });
      if (!given) injected.push_back(flag + "=" + value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), injected.begin(), injected.end());
    break;
  }
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated recommendation from differentially private prototypes", "fedproto"};
  app.require_subcommand(1);

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic federated count dataset");
  synth_cmd->add_option("--n", synth.n, "users");
  synth_cmd->add_option("--m", synth.m, "items");
  synth_cmd->add_option("--rank", synth.rank, "generator rank");
  synth_cmd->add_option("--entities", synth.entities, "entities to deal users into");
  synth_cmd->add_option("--rate-cap", synth.rate_cap, "upper bound on Poisson rates");
  synth_cmd->add_option("--seed", synth.seed, "master seed")->envname("FEDPROTO_SEED");
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory");
  synth_cmd->add_option("--config", synth.config,
                        "key=value configuration file; flags take precedence");

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "train and evaluate one regime");
  add_run_flags(run_cmd, run, true);

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate a grid of regimes and parameters");
  add_run_flags(sweep_cmd, sweep.base, false);
  sweep_cmd->add_option("--regimes", sweep.regimes, "comma-separated regimes")->delimiter(',');
  sweep_cmd->add_option("--k", sweep.ks, "comma-separated k values")->delimiter(',');
  sweep_cmd->add_option("--epsilon", sweep.epsilons, "comma-separated budgets")->delimiter(',');
  sweep_cmd->add_option("--rank", sweep.ranks, "comma-separated ranks")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds per cell, counting up from --seed");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  // CLI11 takes arguments in reverse order when given a vector.
  std::reverse(args.begin() + 1, args.end());
  args.erase(args.begin());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*run_cmd) return cmd_run(run, out);
    return cmd_sweep(sweep, out);
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const IndexError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace fedproto::cli
