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

#include "fedproto/eval.hpp"

namespace fedproto::eval {

double RankSum::mean() const {
  if (!(weight > 0.0)) throw ParameterError("degenerate weights");
  return weighted_rank / weight;
}

RankSum rank_sums(const Matrix& scores, std::span<const TestEntry> test,
                  const SparseRatings& train, EligibleItems mode) {
  if (static_cast<std::size_t>(scores.rows()) != train.n_rows() ||
      static_cast<std::size_t>(scores.cols()) != train.n_cols()) {
    throw ParameterError("rank: score matrix shape does not match the training matrix");
  }
  const auto m = static_cast<std::size_t>(scores.cols());
  std::vector<char> eligible(m);
  RankSum out;
  for (const TestEntry& t : test) {
    if (t.row >= train.n_rows() || t.col >= m) throw ParameterError("rank: test entry out of range");
    if (!(t.value >= 0.0)) throw ParameterError("rank: test weights must be non-negative");
    std::fill(eligible.begin(), eligible.end(), 1);
    if (mode == EligibleItems::kExcludeTrained) {
      for (const Entry& e : train.row(t.row)) eligible[e.col] = 0;
    }
    eligible[t.col] = 1;

    const auto r = static_cast<Eigen::Index>(t.row);
    const double own = scores(r, static_cast<Eigen::Index>(t.col));
    double above = 0.0;
    double ties = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!eligible[j]) continue;
      ++count;
      if (j == t.col) continue;
      const double s = scores(r, static_cast<Eigen::Index>(j));
      if (s > own) {
        above += 1.0;
      } else if (s == own) {
        ties += 1.0;
      }
    }
    const double rank = count > 1 ? (above + 0.5 * ties) / static_cast<double>(count - 1) : 0.0;
    out.weighted_rank += t.value * rank;
    out.weight += t.value;
  }
  return out;
}

double mean_average_rank(const Matrix& scores, std::span<const TestEntry> test,
                         const SparseRatings& train, EligibleItems mode) {
  if (test.empty()) throw ParameterError("rank: empty test set");
  return rank_sums(scores, test, train, mode).mean();
}

}  // namespace fedproto::eval
