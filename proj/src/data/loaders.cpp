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
#include <charconv>
#include <fstream>
#include <map>
#include <string_view>

#include "fedproto/data.hpp"
#include "fedproto/io.hpp"

namespace fedproto::data {
namespace {

std::vector<std::string_view> split_double_colon(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = line.find("::", start);
    if (at == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, at - start));
    start = at + 2;
  }
}

long parse_id(std::string_view text, const std::string& where) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DataError(where + ": bad integer '" + std::string(text) + "'");
  }
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::string_view chomp(const std::string& line) {
  std::string_view view(line);
  if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
  return view;
}

}  // namespace

MovieLensData load_movielens(const std::filesystem::path& ratings_path,
                             const std::filesystem::path& users_path) {
  std::map<long, std::string> zip_key;
  {
    std::ifstream in = open_or_throw(users_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view view = chomp(line);
      if (view.empty()) continue;
      const std::string where = users_path.string() + ":" + std::to_string(line_no);
      const auto fields = split_double_colon(view);
      if (fields.size() != 5) {
        throw DataError(where + ": expected 5 '::'-separated fields, got " +
                        std::to_string(fields.size()));
      }
      const long id = parse_id(fields[0], where);
      if (fields[4].empty()) throw DataError(where + ": empty ZIP code");
      if (!zip_key.emplace(id, std::string(1, fields[4].front())).second) {
        throw DataError(where + ": duplicate user " + std::to_string(id));
      }
    }
  }

  struct Raw {
    long user;
    long movie;
    double value;
  };
  std::vector<Raw> raw;
  std::map<long, std::size_t> movie_col;
  {
    std::ifstream in = open_or_throw(ratings_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view view = chomp(line);
      if (view.empty()) continue;
      const std::string where = ratings_path.string() + ":" + std::to_string(line_no);
      const auto fields = split_double_colon(view);
      if (fields.size() != 4) {
        throw DataError(where + ": expected 4 '::'-separated fields, got " +
                        std::to_string(fields.size()));
      }
      const long user = parse_id(fields[0], where);
      const long movie = parse_id(fields[1], where);
      parse_id(fields[3], where);
      double value = 0.0;
      try {
        value = io::parse_double(std::string(fields[2]));
      } catch (const std::exception&) {
        throw DataError(where + ": bad rating '" + std::string(fields[2]) + "'");
      }
      if (!(value >= 0.0 && value <= 5.0)) {
        throw DataError(where + ": rating " + std::string(fields[2]) + " outside [0, 5]");
      }
      if (!zip_key.count(user)) throw DataError(where + ": unknown user " + std::to_string(user));
      movie_col.emplace(movie, 0);
      raw.push_back({user, movie, value});
    }
  }

  MovieLensData out;
  std::map<long, std::size_t> user_row;
  for (const auto& [id, key] : zip_key) {
    user_row[id] = out.user_ids.size();
    out.user_ids.push_back(id);
    out.keys.push_back(key);
  }
  for (auto& [id, col] : movie_col) {
    col = out.movie_ids.size();
    out.movie_ids.push_back(id);
  }
  std::vector<Entry> entries;
  entries.reserve(raw.size());
  for (const Raw& r : raw) entries.push_back({user_row[r.user], movie_col[r.movie], r.value});
  SparseRatings::Overrides overrides;
  overrides.lambda_bound = 5.0;
  out.ratings = SparseRatings::from_entries(out.user_ids.size(), out.movie_ids.size(),
                                            std::move(entries), MaskSemantics::kExplicitMissing,
                                            overrides);
  return out;
}

SparseRatings load_counts_csv(const std::filesystem::path& path,
                              const std::filesystem::path& metadata_path) {
  return io::read_ratings(path, metadata_path, MaskSemantics::kImplicitZeros);
}

KeyPartition partition_by_key(const SparseRatings& x, const std::vector<std::string>& keys) {
  if (keys.size() != x.n_rows()) {
    throw DataError("partition_by_key: " + std::to_string(keys.size()) + " keys for " +
                    std::to_string(x.n_rows()) + " rows");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < keys.size(); ++r) {
    if (keys[r].empty()) throw DataError("partition_by_key: missing key for row " + std::to_string(r));
    groups[keys[r]].push_back(r);
  }
  KeyPartition out;
  for (auto& [key, rows] : groups) {
    out.keys.push_back(key);
    out.parts.push_back(x.slice_rows(rows));
    out.rows.push_back(std::move(rows));
  }
  return out;
}

}  // namespace fedproto::data
