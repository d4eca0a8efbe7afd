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
#include <cmath>

#include "fedproto/clustering.hpp"
#include "fedproto/dp.hpp"

namespace fedproto::clustering {

Vector sparse_recovery(const Matrix& rows, double epsilon, std::size_t s, double lambda_bound,
                       RngStream& rng, PrivacyLedger& ledger, GumbelScaleRule rule) {
  if (rows.rows() == 0) throw ParameterError("empty cluster");
  if (!(epsilon > 0.0)) throw ParameterError("sparse_recovery: epsilon must be positive");
  if (s < 1) throw ParameterError("sparse_recovery: s must be at least 1");
  if (!(lambda_bound > 0.0) || !std::isfinite(lambda_bound)) {
    throw ParameterError("sparse_recovery: lambda bound must be positive");
  }
  if (!rows.allFinite() || rows.cwiseAbs().maxCoeff() > lambda_bound) {
    throw ParameterError("sparse_recovery: entries must be finite and within the lambda bound");
  }

  const auto n_c = static_cast<double>(rows.rows());
  const auto m = static_cast<std::size_t>(rows.cols());
  const std::size_t top = std::min(s, m);
  const bool noiseless = dp::is_noiseless(epsilon);
  const double half = epsilon / 2.0;

  std::vector<double> mean(m, 0.0);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) mean[j] += rows(i, static_cast<Eigen::Index>(j));
  }
  for (double& v : mean) v /= n_c;

  std::vector<std::size_t> support;
  if (rule == GumbelScaleRule::kSequentialEquivalent) {
    support = dp::exp_mechanism_top_k(mean, lambda_bound / n_c, half, top, rng).value;
  } else {
    std::vector<double> scales(m, 0.0);
    if (!noiseless) {
      for (std::size_t j = 0; j < m; ++j) {
        scales[j] = epsilon / (2.0 * static_cast<double>(s) * lambda_bound) * std::abs(mean[j]);
      }
    }
    support = dp::noisy_top_k(mean, scales, top, rng);
  }
  ledger.charge("sparse_recovery_top_s", half);

  const double scale = noiseless ? 0.0 : 2.0 * lambda_bound * static_cast<double>(s) / (epsilon * n_c);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t j : support) {
    const double noisy = scale > 0.0 ? mean[j] + dp::laplace(scale, rng) : mean[j];
    out(static_cast<Eigen::Index>(j)) = std::clamp(noisy, 0.0, lambda_bound);
  }
  ledger.charge("sparse_recovery_laplace", half);
  return out;
}

}  // namespace fedproto::clustering
