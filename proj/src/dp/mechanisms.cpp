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
#include <numeric>
#include <sstream>

#include "fedproto/dp.hpp"
#include "fedproto/errors.hpp"

namespace fedproto::dp {
namespace {

void check_scale(double scale, const char* what) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    std::ostringstream msg;
    msg << what << " scale must be positive and finite, got " << scale;
    throw ParameterError(msg.str());
  }
}

void check_mechanism_args(std::span<const double> utilities, double sensitivity, double epsilon) {
  if (utilities.empty()) throw ParameterError("exponential mechanism: empty utilities");
  for (double q : utilities) {
    if (!std::isfinite(q)) throw ParameterError("exponential mechanism: non-finite utility");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw ParameterError("exponential mechanism: sensitivity must be positive");
  }
  if (!(epsilon > 0.0)) throw ParameterError("exponential mechanism: epsilon must be positive");
}

std::size_t first_argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

double laplace(double scale, RngStream& rng) {
  check_scale(scale, "laplace");
  const double u = rng.uniform_open() - 0.5;  // (-0.5, 0.5)
  const double mag = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -mag : mag;
}

double gumbel(double scale, RngStream& rng) {
  check_scale(scale, "gumbel");
  return -scale * std::log(-std::log(rng.uniform_open()));
}

MechanismResult<std::size_t> exp_mechanism_sample(std::span<const double> utilities,
                                                  double sensitivity, double epsilon,
                                                  RngStream& rng) {
  check_mechanism_args(utilities, sensitivity, epsilon);
  MechanismResult<std::size_t> result{0, epsilon, "exponential"};
  if (is_noiseless(epsilon)) {
    result.value = first_argmax(utilities);
    return result;
  }
  const double top = *std::max_element(utilities.begin(), utilities.end());
  const double factor = epsilon / (2.0 * sensitivity);
  std::vector<double> cumulative(utilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    total += std::exp(factor * (utilities[i] - top));
    cumulative[i] = total;
  }
  const double target = rng.uniform() * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  result.value = static_cast<std::size_t>(it - cumulative.begin());
  return result;
}

std::vector<std::size_t> noisy_top_k(std::span<const double> utilities,
                                     std::span<const double> gumbel_scales, std::size_t k,
                                     RngStream& rng) {
  if (gumbel_scales.size() != utilities.size()) {
    throw ParameterError("noisy_top_k: one scale per utility required");
  }
  if (k > utilities.size()) throw ParameterError("top-k: k exceeds domain size");
  std::vector<double> noisy(utilities.begin(), utilities.end());
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (gumbel_scales[i] > 0.0) noisy[i] += gumbel(gumbel_scales[i], rng);
  }
  std::vector<std::size_t> order(noisy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return noisy[a] != noisy[b] ? noisy[a] > noisy[b] : a < b;
                    });
  order.resize(k);
  return order;
}

MechanismResult<std::vector<std::size_t>> exp_mechanism_top_k(std::span<const double> utilities,
                                                              double sensitivity, double epsilon,
                                                              std::size_t k, RngStream& rng) {
  check_mechanism_args(utilities, sensitivity, epsilon);
  if (k > utilities.size()) throw ParameterError("top-k: k exceeds domain size");
  const double scale = is_noiseless(epsilon)
                           ? 0.0
                           : 2.0 * static_cast<double>(k) * sensitivity / epsilon;
  std::vector<double> scales(utilities.size(), scale);
  return {noisy_top_k(utilities, scales, k, rng), epsilon, "gumbel_top_k"};
}

}  // namespace fedproto::dp
