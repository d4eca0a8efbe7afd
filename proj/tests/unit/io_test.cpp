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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "fedproto/factorization.hpp"
#include "fedproto/io.hpp"
#include "test_support.hpp"

namespace fedproto {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedproto_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
  }

  fs::path dir_;
};

TEST_F(IoTest, RatingsRoundTripIsExact) {
  RngStream rng(21);
  for (auto semantics : {MaskSemantics::kImplicitZeros, MaskSemantics::kExplicitMissing}) {
    SparseRatings x = testing::random_ratings(rng, 17, 9, 0.3, 5.0, semantics);
    // Values that need all 17 significant digits.
    std::vector<Entry> entries(x.entries().begin(), x.entries().end());
    for (Entry& e : entries) e.value = e.value / 3.0;
    x = SparseRatings::from_entries(17, 9, entries, semantics, {.lambda_bound = 7.0, .sparsity = 9});
    io::write_ratings(x, dir_ / "x.csv", dir_ / "x.meta");
    const SparseRatings y = io::read_ratings(dir_ / "x.csv", dir_ / "x.meta");
    ASSERT_EQ(y.nnz(), x.nnz());
    for (std::size_t i = 0; i < x.nnz(); ++i) EXPECT_EQ(y.entries()[i], x.entries()[i]);
    EXPECT_EQ(y.lambda_bound(), x.lambda_bound());
    EXPECT_EQ(y.sparsity(), x.sparsity());
    EXPECT_EQ(y.semantics(), semantics);
    EXPECT_EQ(y.n_rows(), 17u);
    EXPECT_EQ(y.n_cols(), 9u);
  }
}

TEST_F(IoTest, MalformedRatingsNameTheLine) {
  write_text(dir_ / "x.meta", "n_rows=2\nn_cols=2\n");
  const auto expect_error = [&](const std::string& csv, const std::string& fragment) {
    write_text(dir_ / "x.csv", csv);
    try {
      io::read_ratings(dir_ / "x.csv", dir_ / "x.meta");
      ADD_FAILURE() << "expected DataError for: " << csv;
    } catch (const DataError& err) {
      EXPECT_NE(std::string(err.what()).find(fragment), std::string::npos) << err.what();
    }
  };
  expect_error("row,col,value\n0,0,1\n0,1,-2\n", ":3");
  expect_error("row,col,value\n0,0,nan\n", ":2");
  expect_error("row,col,value\n0,5,1\n", ":2");
  expect_error("row,col,value\n0,0\n", ":2");
  expect_error("a,b,c\n", ":1");
}

TEST_F(IoTest, MetadataRoundTrip) {
  const io::Metadata meta{{"alpha", "1"}, {"beta", "two words"}};
  io::write_metadata(dir_ / "m.meta", meta);
  EXPECT_EQ(io::read_metadata(dir_ / "m.meta"), meta);
  write_text(dir_ / "c.meta", "# comment\n\nkey=value\n");
  EXPECT_EQ(io::read_metadata(dir_ / "c.meta"), (io::Metadata{{"key", "value"}}));
  write_text(dir_ / "bad.meta", "novalue\n");
  EXPECT_THROW(io::read_metadata(dir_ / "bad.meta"), DataError);
}

TEST_F(IoTest, MatrixCsvAndDoubleFormatting) {
  RngStream rng(5);
  const Matrix m = testing::random_matrix(rng, 4, 3, 0.0, 1e6);
  io::write_matrix_csv(m, dir_ / "m.csv");
  EXPECT_EQ(io::read_matrix_csv(dir_ / "m.csv"), m);
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789,
                   std::numeric_limits<double>::max()}) {
    EXPECT_EQ(io::parse_double(io::format_double(v)), v);
  }
  EXPECT_THROW(io::parse_double("1.5x"), DataError);
}

TEST_F(IoTest, ModelRoundTrip) {
  RngStream rng(8);
  FactorModel model;
  model.user_factors = testing::random_matrix(rng, 5, 2);
  model.item_factors = testing::random_matrix(rng, 4, 2);
  model.lambda = 0.1;
  factorization::write_model(dir_, model, 7, 0.25);
  const FactorModel back = factorization::read_model(dir_);
  EXPECT_EQ(back.user_factors, model.user_factors);
  EXPECT_EQ(back.item_factors, model.item_factors);
  EXPECT_EQ(back.lambda, 0.1);
  const io::Metadata meta = io::read_metadata(dir_ / "model.meta");
  EXPECT_EQ(meta.at("rank"), "2");
  EXPECT_EQ(meta.at("iterations"), "7");
}

}  // namespace
}  // namespace fedproto
