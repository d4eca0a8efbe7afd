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

// Randomized invariants. Each test draws many small instances from a seeded
// generator and checks a property that must hold for every one of them.

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fedproto/clustering.hpp"
#include "fedproto/eval.hpp"
#include "fedproto/factorization.hpp"
#include "fedproto/io.hpp"
#include "fedproto/ledger.hpp"
#include "test_support.hpp"

namespace fedproto {
namespace {

namespace fs = std::filesystem;

constexpr int kCases = 40;

struct Shape {
  std::size_t n;
  std::size_t m;
};

Shape draw_shape(RngStream& rng, std::size_t max_n = 30, std::size_t max_m = 12) {
  return {1 + rng.index(max_n), 1 + rng.index(max_m)};
}

MaskSemantics draw_semantics(RngStream& rng) {
  return rng.index(2) ? MaskSemantics::kExplicitMissing : MaskSemantics::kImplicitZeros;
}

// Values spanning 24 orders of magnitude, both signs, and exact zeros.
Matrix wild_matrix(RngStream& rng, std::size_t rows, std::size_t cols) {
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double mag = std::pow(10.0, rng.uniform(-12.0, 12.0));
      out(i, j) = rng.index(5) == 0 ? 0.0 : (rng.index(2) ? mag : -mag) * rng.uniform();
    }
  }
  return out;
}

TEST(PropertyTest, MatrixCsvRoundTripIsExact) {
  const fs::path dir = fs::temp_directory_path() / "fedproto_property_csv";
  fs::create_directories(dir);
  RngStream rng(901);
  for (int c = 0; c < kCases; ++c) {
    const Shape s = draw_shape(rng, 8, 8);
    const Matrix m = wild_matrix(rng, s.n, s.m);
    io::write_matrix_csv(m, dir / "m.csv");
    EXPECT_EQ(io::read_matrix_csv(dir / "m.csv"), m) << "case " << c;
  }
  fs::remove_all(dir);
}

TEST(PropertyTest, RatingsRoundTripIsExact) {
  const fs::path dir = fs::temp_directory_path() / "fedproto_property_ratings";
  fs::create_directories(dir);
  RngStream rng(902);
  for (int c = 0; c < kCases; ++c) {
    const Shape s = draw_shape(rng);
    const SparseRatings x =
        testing::random_ratings(rng, s.n, s.m, rng.uniform(), 1.0 + 9.0 * rng.uniform(),
                                draw_semantics(rng));
    io::write_ratings(x, dir / "x.csv", dir / "x.meta");
    const SparseRatings y = io::read_ratings(dir / "x.csv", dir / "x.meta");
    EXPECT_EQ(y.to_dense(), x.to_dense()) << "case " << c;
    EXPECT_EQ(y.semantics(), x.semantics());
    EXPECT_EQ(y.nnz(), x.nnz());
    EXPECT_EQ(y.lambda_bound(), x.lambda_bound());
  }
  fs::remove_all(dir);
}

TEST(PropertyTest, ParallelTotalNeverExceedsSequential) {
  RngStream rng(903);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t entities = 1 + rng.index(4);
    PrivacyLedger combined("", Composition::kParallel);
    for (std::size_t h = 0; h < entities; ++h) {
      PrivacyLedger own("e" + std::to_string(h));
      const std::size_t events = 1 + rng.index(5);
      for (std::size_t e = 0; e < events; ++e) own.charge("m", 0.01 + rng.uniform());
      combined.absorb(own);
    }
    EXPECT_LE(combined.parallel_total(), combined.sequential_total() + 1e-12);
    if (entities == 1) {
      EXPECT_DOUBLE_EQ(combined.parallel_total(), combined.sequential_total());
    } else {
      EXPECT_LT(combined.parallel_total(), combined.sequential_total());
    }
  }
}

TEST(PropertyTest, SparseRecoveryIsSparseAndBoxed) {
  RngStream rng(904);
  for (int c = 0; c < kCases; ++c) {
    const Shape shape = draw_shape(rng, 20, 15);
    const double lambda = 1.0 + 9.0 * rng.uniform();
    const Matrix rows = testing::random_matrix(rng, shape.n, shape.m, 0.0, lambda);
    const std::size_t s = 1 + rng.index(shape.m);
    const double eps = std::pow(10.0, rng.uniform(-2.0, 1.0));
    PrivacyLedger ledger("e");
    const Vector out = clustering::sparse_recovery(rows, eps, s, lambda, rng, ledger);
    ASSERT_EQ(out.size(), static_cast<Eigen::Index>(shape.m));
    EXPECT_LE(static_cast<std::size_t>((out.array() != 0.0).count()), s) << "case " << c;
    EXPECT_GE(out.minCoeff(), 0.0);
    EXPECT_LE(out.maxCoeff(), lambda);
    EXPECT_NEAR(ledger.total(), eps, 1e-12);
  }
}

TEST(PropertyTest, RankStaysInUnitIntervalAndIgnoresMonotoneMaps) {
  RngStream rng(905);
  for (int c = 0; c < kCases; ++c) {
    const Shape s = draw_shape(rng, 15, 10);
    if (s.m < 2) continue;
    const SparseRatings train = testing::random_ratings(rng, s.n, s.m, 0.3);
    Matrix scores = testing::random_matrix(rng, s.n, s.m, -2.0, 2.0);
    // Coarse rounding creates ties.
    if (rng.index(2)) scores = (scores.array() * 2.0).round().matrix();
    std::vector<eval::TestEntry> test;
    for (std::size_t r = 0; r < s.n; ++r) {
      for (std::size_t col = 0; col < s.m; ++col) {
        if (!train.find(r, col) && rng.uniform() < 0.4) test.push_back({"", r, col, 0.5 + rng.uniform()});
      }
    }
    if (test.empty()) continue;
    const double base = eval::mean_average_rank(scores, test, train);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    const Matrix mapped = (scores.array() * 0.5).tanh().matrix() * 3.0;
    EXPECT_NEAR(eval::mean_average_rank(mapped, test, train), base, 1e-12) << "case " << c;
    const Matrix reversed = -scores;
    // Reversing the order mirrors every rank: r -> 1 - r.
    EXPECT_NEAR(eval::mean_average_rank(reversed, test, train, eval::EligibleItems::kAll),
                1.0 - eval::mean_average_rank(scores, test, train, eval::EligibleItems::kAll), 1e-12);
  }
}

TEST(PropertyTest, TestSplitPartitionsTheEntries) {
  using Key = std::tuple<std::size_t, std::size_t, double>;
  RngStream rng(906);
  for (int c = 0; c < kCases; ++c) {
    const Shape s = draw_shape(rng, 30, 20);
    const SparseRatings x = testing::random_ratings(rng, s.n, s.m, 0.2 + 0.8 * rng.uniform(), 5.0,
                                                    draw_semantics(rng));
    if (x.empty()) continue;
    const std::size_t per_user = 1 + rng.index(5);
    const eval::TestSplit split = eval::make_test_split(x, rng, rng.uniform(), per_user);
    std::set<Key> train;
    for (const Entry& e : split.train.entries()) train.insert({e.row, e.col, e.value});
    std::set<Key> all = train;
    std::map<std::size_t, std::size_t> per_row;
    for (const eval::TestEntry& t : split.test) {
      EXPECT_TRUE(all.insert({t.row, t.col, t.value}).second) << "duplicate test cell";
      ++per_row[t.row];
    }
    std::set<Key> original;
    for (const Entry& e : x.entries()) original.insert({e.row, e.col, e.value});
    EXPECT_EQ(all, original) << "case " << c;
    for (const auto& [row, count] : per_row) EXPECT_EQ(count, per_user);
    EXPECT_EQ(split.train.n_rows(), x.n_rows());
    EXPECT_EQ(split.train.semantics(), x.semantics());
  }
}

TEST(PropertyTest, AlternatingFitIsMonotoneAndNonNegative) {
  RngStream rng(907);
  for (int c = 0; c < kCases / 2; ++c) {
    const Shape s = draw_shape(rng, 25, 12);
    const std::size_t rank = 1 + rng.index(std::min(s.n, s.m));
    const SparseRatings x = testing::random_ratings(rng, s.n, s.m, 0.2 + 0.8 * rng.uniform(), 5.0,
                                                    draw_semantics(rng));
    factorization::TrainConfig cfg;
    cfg.rank = rank;
    cfg.lambda = rng.uniform();
    cfg.max_outer_iters = 25;
    const factorization::FitResult fit = factorization::joint_factorize(x, cfg, rng);
    for (std::size_t i = 1; i < fit.objective_history.size(); ++i) {
      EXPECT_LE(fit.objective_history[i], fit.objective_history[i - 1] * (1 + 1e-12) + 1e-15)
          << "case " << c << " step " << i;
    }
    EXPECT_GE(fit.model.user_factors.minCoeff(), 0.0);
    EXPECT_GE(fit.model.item_factors.minCoeff(), 0.0);
  }
}

TEST(PropertyTest, UserFitIsSeparableAcrossRows) {
  RngStream rng(908);
  for (int c = 0; c < kCases / 2; ++c) {
    const Shape s = draw_shape(rng, 12, 10);
    const std::size_t rank = 1 + rng.index(s.m);
    const SparseRatings x = testing::random_ratings(rng, s.n, s.m, 0.6, 5.0, draw_semantics(rng));
    const Matrix v = testing::random_matrix(rng, s.m, rank, 0.0, 2.0);
    factorization::TrainConfig cfg;
    cfg.rank = rank;
    cfg.lambda = 0.05 + rng.uniform();
    const Matrix joint = factorization::fit_user_factors(x, v, cfg);
    std::vector<std::size_t> rows(s.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
    rows.resize(1 + rng.index(s.n));
    const Matrix part = factorization::fit_user_factors(x.slice_rows(rows), v, cfg);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_LE((part.row(static_cast<Eigen::Index>(i)) -
                 joint.row(static_cast<Eigen::Index>(rows[i])))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12)
          << "case " << c;
    }
  }
}

TEST(PropertyTest, StreamsReproduceUnderSeed) {
  RngStream meta(909);
  for (int c = 0; c < kCases; ++c) {
    const std::uint64_t seed = meta.next_u64();
    const std::uint64_t stream = meta.next_u64();
    RngStream a(seed, stream);
    RngStream b(seed, stream);
    for (int i = 0; i < 50; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.child("x").next_u64(), b.child("x").next_u64());
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(PropertyTest, KMeansLossIgnoresCenterOrder) {
  RngStream rng(910);
  for (int c = 0; c < kCases; ++c) {
    const Shape s = draw_shape(rng, 20, 6);
    const std::size_t k = 1 + rng.index(6);
    const Matrix rows = testing::random_matrix(rng, s.n, s.m, -1.0, 1.0);
    const Matrix centers = testing::random_matrix(rng, k, s.m, -1.0, 1.0);
    Matrix shuffled = centers;
    for (Eigen::Index i = shuffled.rows(); i > 1; --i) {
      shuffled.row(i - 1).swap(shuffled.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(i)))));
    }
    const double loss = clustering::kmeans_loss(centers, rows);
    EXPECT_NEAR(clustering::kmeans_loss(shuffled, rows), loss, 1e-12 * (1.0 + loss));
    // Adding a center can only lower the loss.
    Matrix more(centers.rows() + 1, centers.cols());
    more << centers, testing::random_matrix(rng, 1, s.m, -1.0, 1.0);
    EXPECT_LE(clustering::kmeans_loss(more, rows), loss + 1e-12);
  }
}

}  // namespace
}  // namespace fedproto
