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
#include <cstdint>
#include <random>
#include <string_view>

namespace fedproto {

// A seeded, reproducible source of randomness.
//
// Streams are identified by (seed, stream_id). Two streams with equal
// identifiers produce bit-identical sequences. Child streams are derived from
// the identifier only, never from the parent's consumed state, so a parent can
// hand out children to parallel workers in any order.
//
// All continuous draws go through `uniform()` built from raw 64-bit engine
// output; std::*_distribution is avoided because its output is not specified
// across standard library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream child(std::uint64_t tag) const;
  RngStream child(std::string_view label) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1); never returns 0 so it is safe under log().
  double uniform_open();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller.
  double normal();
  // Unbiased integer in [0, n). Requires n > 0.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// SplitMix64 finalizer; used to combine identifiers into engine seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace fedproto
