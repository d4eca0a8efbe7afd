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

#include "fedproto/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fedproto/errors.hpp"

namespace fedproto {
namespace {

TEST(RngStreamTest, SameIdentifiersGiveSameSequence) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStreamTest, DifferentStreamsDiffer) {
  RngStream a(42, 0);
  RngStream b(42, 1);
  RngStream c(43, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStreamTest, ChildIgnoresParentConsumption) {
  RngStream parent(5);
  RngStream fresh_child = parent.child(3);
  for (int i = 0; i < 10; ++i) parent.next_u64();
  RngStream later_child = parent.child(3);
  EXPECT_EQ(fresh_child.next_u64(), later_child.next_u64());
  EXPECT_NE(parent.child(3).next_u64(), parent.child(4).next_u64());
  EXPECT_NE(parent.child("a").next_u64(), parent.child("b").next_u64());
}

TEST(RngStreamTest, UniformRanges) {
  RngStream rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform_open();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(RngStreamTest, NormalMoments) {
  RngStream rng(2);
  const int n = 400000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(RngStreamTest, IndexIsUniformAndBounded) {
  RngStream rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = rng.index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
  EXPECT_THROW(rng.index(0), ParameterError);
}

}  // namespace
}  // namespace fedproto
