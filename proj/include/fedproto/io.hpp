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
#include <map>
#include <string>

#include "fedproto/core.hpp"

namespace fedproto::io {

using Metadata = std::map<std::string, std::string>;

// key=value lines; blank lines and lines starting with '#' are ignored.
Metadata read_metadata(const std::filesystem::path& path);
void write_metadata(const std::filesystem::path& path, const Metadata& meta);

// Ratings CSV (header `row,col,value`) plus a metadata sidecar carrying
// n_rows, n_cols, lambda_bound, sparsity and mask_semantics. Values are
// written with round-trip precision.
void write_ratings(const SparseRatings& x, const std::filesystem::path& csv_path,
                   const std::filesystem::path& meta_path);

// Throws DataError with file and line on malformed rows, negative or
// non-finite values and shape violations. When the sidecar omits
// mask_semantics, `default_semantics` is used.
SparseRatings read_ratings(const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path,
                           MaskSemantics default_semantics = MaskSemantics::kImplicitZeros);

// Plain numeric CSV, one matrix row per line.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

}  // namespace fedproto::io
