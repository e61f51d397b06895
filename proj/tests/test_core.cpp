#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "freqformer/core.hpp"
#include "freqformer/rng.hpp"
#include "oracles.hpp"

using namespace freqformer;

TEST(Rng, SplitMix64GoldenSeedZero) {
  SplitMix64 g(0);
  EXPECT_EQ(g.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(g.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(g.next(), 0x06c45d188009454fULL);
}

TEST(Rng, FirstNormalPairFromGoldenWords) {
  const double u1 = static_cast<double>((0xe220a8397b1dcdafULL >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>((0x6e789e6aa1b965f4ULL >> 11) + 1) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  NormalStream s(0);
  EXPECT_EQ(s.next(), r * std::cos(2.0 * std::numbers::pi * u2));
  EXPECT_EQ(s.next(), r * std::sin(2.0 * std::numbers::pi * u2));
}

TEST(Rng, UniformInHalfOpenUnitInterval) {
  SplitMix64 g(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(Rng, NormalMomentsRoughlyStandard) {
  NormalStream s(42);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = s.next();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, SeededMatrixReproducible) {
  EXPECT_EQ(seeded_matrix(5, 7, 9, 1.0), seeded_matrix(5, 7, 9, 1.0));
  EXPECT_NE(seeded_matrix(5, 7, 9, 1.0), seeded_matrix(5, 7, 10, 1.0));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
}

TEST(Matrix, MatmulMatchesTripleLoop) {
  const Matrix a = seeded_matrix(13, 9, 1, 1.0), b = seeded_matrix(9, 11, 2, 1.0);
  EXPECT_LE(oracle::max_abs_diff(matmul(a, b).data, oracle::product(a, b).data), 1e-12);
}

TEST(Matrix, MatmulShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(4, 2)), shape_error);
}

TEST(Matrix, ConstructorRejectsWrongLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), shape_error);
  EXPECT_THROW(Tensor4(Shape4{1, 2, 2, 1}, std::vector<double>{1}), shape_error);
}

TEST(Matrix, TransposeInvolution) {
  const Matrix a = seeded_matrix(4, 6, 3, 1.0);
  EXPECT_EQ(transpose(transpose(a)), a);
  EXPECT_EQ(transpose(a)(5, 3), a(3, 5));
}

TEST(Softmax, MatchesDirectFormula) {
  std::vector<double> z = {1.0, -2.0, 0.5, 3.0};
  std::vector<double> expect(z.size());
  double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s += std::exp(z[i]);
  for (std::size_t i = 0; i < z.size(); ++i) expect[i] = std::exp(z[i]) / s;
  softmax_inplace(z);
  EXPECT_LE(oracle::max_abs_diff(z, expect), 1e-15);
}

TEST(Softmax, LargeLogitsStayFinite) {
  std::vector<double> z = {1000.0, 1000.0, -1000.0};
  softmax_inplace(z);
  EXPECT_NEAR(z[0], 0.5, 1e-15);
  EXPECT_NEAR(z[2], 0.0, 1e-15);
}

TEST(Pooling, GroupsWithShortTail) {
  Matrix m(5, 1, std::vector<double>{1, 2, 3, 4, 5});
  const Matrix p = mean_pool_groups(m, 2);
  ASSERT_EQ(p.rows, 3u);
  EXPECT_DOUBLE_EQ(p(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(p(1, 0), 3.5);
  EXPECT_DOUBLE_EQ(p(2, 0), 5.0);
}

TEST(Pooling, BalancedPartsEvenSplit) {
  Matrix m(10, 1);
  for (std::size_t i = 0; i < 10; ++i) m(i, 0) = static_cast<double>(i);
  const Matrix p = mean_pool_into(m, 5);
  EXPECT_EQ(p.data, (std::vector<double>{0.5, 2.5, 4.5, 6.5, 8.5}));
  EXPECT_EQ(mean_pool_into(m, 4).rows, 4u);
  EXPECT_EQ(mean_pool_into(m, 20).rows, 10u);
}

TEST(Tensor, TokenRoundTripAndIndexing) {
  const Shape4 s{2, 3, 4, 5};
  const Tensor4 x = seeded_tensor(s, 1, 1.0);
  EXPECT_EQ(Tensor4::from_tokens(x.as_tokens(), s), x);
  EXPECT_EQ(x.at(1, 2, 3, 4), x.as_tokens()((1 * 3 + 2) * 4 + 3, 4));
  EXPECT_EQ(to_string(s), "(2,3,4,5)");
}
