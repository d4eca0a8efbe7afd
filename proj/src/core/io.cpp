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

#include "fedproto/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace fedproto::io {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

std::size_t parse_count(const std::string& text, const std::string& context) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError(context + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

const std::string& require(const Metadata& meta, const std::string& key,
                           const std::filesystem::path& path) {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError(path.string() + ": missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError("expected a number, got '" + text + "'");
  }
  return value;
}

Metadata read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Metadata meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(where(path, line_no) + ": expected key=value");
    }
    meta[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return meta;
}

void write_metadata(const std::filesystem::path& path, const Metadata& meta) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [key, value] : meta) out << key << '=' << value << '\n';
}

void write_ratings(const SparseRatings& x, const std::filesystem::path& csv_path,
                   const std::filesystem::path& meta_path) {
  std::ofstream out(csv_path);
  if (!out) throw DataError("cannot write " + csv_path.string());
  out << "row,col,value\n";
  for (const Entry& e : x.entries()) {
    out << e.row << ',' << e.col << ',' << format_double(e.value) << '\n';
  }
  write_metadata(meta_path, {{"n_rows", std::to_string(x.n_rows())},
                             {"n_cols", std::to_string(x.n_cols())},
                             {"lambda_bound", format_double(x.lambda_bound())},
                             {"sparsity", std::to_string(x.sparsity())},
                             {"mask_semantics", to_string(x.semantics())}});
}

SparseRatings read_ratings(const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path,
                           MaskSemantics default_semantics) {
  const Metadata meta = read_metadata(meta_path);
  const std::size_t n_rows = parse_count(require(meta, "n_rows", meta_path), meta_path.string());
  const std::size_t n_cols = parse_count(require(meta, "n_cols", meta_path), meta_path.string());
  SparseRatings::Overrides overrides;
  if (auto it = meta.find("lambda_bound"); it != meta.end()) {
    overrides.lambda_bound = parse_double(it->second);
  }
  if (auto it = meta.find("sparsity"); it != meta.end()) {
    overrides.sparsity = parse_count(it->second, meta_path.string());
  }
  MaskSemantics semantics = default_semantics;
  if (auto it = meta.find("mask_semantics"); it != meta.end()) {
    semantics = parse_mask_semantics(it->second);
  }

  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open " + csv_path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1) {
      if (trim(line) != "row,col,value") {
        throw DataError(where(csv_path, line_no) + ": expected header row,col,value");
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw DataError(where(csv_path, line_no) + ": expected 3 fields");
    }
    Entry e;
    try {
      e.row = parse_count(fields[0], "row");
      e.col = parse_count(fields[1], "col");
      e.value = parse_double(fields[2]);
    } catch (const DataError& err) {
      throw DataError(where(csv_path, line_no) + ": " + err.what());
    }
    if (!std::isfinite(e.value) || e.value < 0.0) {
      throw DataError(where(csv_path, line_no) + ": value must be finite and non-negative");
    }
    if (e.row >= n_rows || e.col >= n_cols) {
      throw DataError(where(csv_path, line_no) + ": index outside declared shape");
    }
    entries.push_back(e);
  }
  try {
    return SparseRatings::from_entries(n_rows, n_cols, std::move(entries), semantics, overrides);
  } catch (const DataError& err) {
    throw DataError(csv_path.string() + ": " + err.what());
  }
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& field : split(line, ',')) {
      try {
        row.push_back(parse_double(field));
      } catch (const DataError& err) {
        throw DataError(where(path, line_no) + ": " + err.what());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(where(path, line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index m = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = rows[r][c];
  }
  return out;
}

}  // namespace fedproto::io
