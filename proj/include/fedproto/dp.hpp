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

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fedproto/rng.hpp"

namespace fedproto::dp {

// Passing this as epsilon selects the noiseless limit of a mechanism: noise
// is disabled and selections become argmax. It exists for oracle tests and is
// refused by the federation layer unless explicitly allowed.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

inline bool is_noiseless(double epsilon) { return epsilon == kNoiseless; }

// One draw from the zero-mean Laplace distribution, by inverse CDF.
double laplace(double scale, RngStream& rng);

// One draw with density (1/b) exp(-(y/b + exp(-y/b))), by inverse CDF.
double gumbel(double scale, RngStream& rng);

template <typename T>
struct MechanismResult {
  T value;
  double epsilon_charged = 0.0;
  std::string mechanism_name;
};

// Exponential mechanism: returns index i with probability proportional to
// exp(epsilon * q_i / (2 * sensitivity)). In the noiseless limit returns the
// first argmax.
MechanismResult<std::size_t> exp_mechanism_sample(std::span<const double> utilities,
                                                  double sensitivity, double epsilon,
                                                  RngStream& rng);

// One-shot top-k: adds Gumbel(2 k sensitivity / epsilon) noise to every
// utility and returns the k best indices ordered by noisy utility. This is
// distributed as k sequential draws without replacement of the exponential
// mechanism at epsilon / k each.
MechanismResult<std::vector<std::size_t>> exp_mechanism_top_k(std::span<const double> utilities,
                                                              double sensitivity, double epsilon,
                                                              std::size_t k, RngStream& rng);

// Lower-level top-k with a per-utility Gumbel scale; a zero scale adds no
// noise to that utility. Ties are broken by lower index.
std::vector<std::size_t> noisy_top_k(std::span<const double> utilities,
                                     std::span<const double> gumbel_scales, std::size_t k,
                                     RngStream& rng);

}  // namespace fedproto::dp
