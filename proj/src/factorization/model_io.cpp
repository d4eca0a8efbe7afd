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

#include <filesystem>

#include "fedproto/factorization.hpp"
#include "fedproto/io.hpp"

namespace fedproto::factorization {

void write_model(const std::filesystem::path& dir, const FactorModel& model, int iterations,
                 double objective_value) {
  std::filesystem::create_directories(dir);
  io::write_matrix_csv(model.user_factors, dir / "U.csv");
  io::write_matrix_csv(model.item_factors, dir / "V.csv");
  io::write_metadata(dir / "model.meta",
                     {{"rank", std::to_string(model.rank())},
                      {"lambda", io::format_double(model.lambda)},
                      {"iterations", std::to_string(iterations)},
                      {"objective", io::format_double(objective_value)}});
}

FactorModel read_model(const std::filesystem::path& dir) {
  const io::Metadata meta = io::read_metadata(dir / "model.meta");
  FactorModel model;
  model.user_factors = io::read_matrix_csv(dir / "U.csv");
  model.item_factors = io::read_matrix_csv(dir / "V.csv");
  auto it = meta.find("lambda");
  if (it == meta.end()) throw DataError((dir / "model.meta").string() + ": missing lambda");
  model.lambda = io::parse_double(it->second);
  it = meta.find("rank");
  if (it == meta.end() || std::to_string(model.rank()) != it->second) {
    throw DataError((dir / "model.meta").string() + ": rank does not match factor files");
  }
  model.validate();
  return model;
}

}  // namespace fedproto::factorization
