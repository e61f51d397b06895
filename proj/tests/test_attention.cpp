#include <gtest/gtest.h>

#include "freqformer/attention.hpp"
#include "freqformer/rng.hpp"
#include "oracles.hpp"

using namespace freqformer;

namespace {

struct Qkv {
  Matrix q, k, v;
};

Qkv random_qkv(std::size_t n, std::size_t d, std::uint64_t seed) {
  return {seeded_matrix(n, d, derive_seed(seed, 0), 1.0), seeded_matrix(n, d, derive_seed(seed, 1), 1.0),
          seeded_matrix(n, d, derive_seed(seed, 2), 1.0)};
}

}  // namespace

TEST(DenseAttention, MatchesOracle) {
  const auto x = random_qkv(37, 8, 1);
  EXPECT_LE(oracle::max_abs_diff(dense_attention(x.q, x.k, x.v).data,
                                 oracle::attention(x.q, x.k, x.v, default_scale(8)).data),
            1e-12);
}

TEST(DenseAttention, UniformScoresAverageValues) {
  Matrix q(2, 2, 0.0), k(3, 2, 0.0), v(3, 2, std::vector<double>{1, 0, 2, 0, 6, 0});
  const Matrix y = dense_attention(q, k, v);
  EXPECT_DOUBLE_EQ(y(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(y(1, 0), 3.0);
}

TEST(DenseAttention, ShapeErrors) {
  EXPECT_THROW(dense_attention(Matrix(2, 3), Matrix(2, 4), Matrix(2, 1)), shape_error);
  EXPECT_THROW(dense_attention(Matrix(2, 3), Matrix(2, 3), Matrix(3, 1)), shape_error);
}

TEST(Pattern, LocalBlocksAlwaysPresent) {
  const auto p = make_pattern(200, 16, 64);
  for (std::size_t qb = 0; qb < p.num_blocks(); ++qb) {
    const auto& a = p.allowed[qb];
    EXPECT_TRUE(std::binary_search(a.begin(), a.end(), qb));
    if (qb > 0) EXPECT_TRUE(std::binary_search(a.begin(), a.end(), qb - 1));
    if (qb + 1 < p.num_blocks()) EXPECT_TRUE(std::binary_search(a.begin(), a.end(), qb + 1));
  }
}

TEST(Pattern, AverageDegreeWithinTarget) {
  for (std::size_t n : {96u, 192u, 500u, 3072u}) {
    const auto p = make_pattern(n, 16, 256);
    if (!p.full()) {
      EXPECT_LE(p.average_degree(), 256.0) << n;
    }
  }
}

TEST(Pattern, FullWhenTargetCoversBand) {
  EXPECT_TRUE(make_pattern(100, 16, 100).full());
  EXPECT_TRUE(make_pattern(100, 16, 1000).full());
  EXPECT_EQ(count_interactions(make_pattern(100, 16, 100)), 100u * 100u);
}

TEST(BlockSparse, MatchesMaskedOracleRandomized) {
  SplitMix64 g(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + g.next() % 150, d = 1 + g.next() % 6;
    const std::size_t block = 1 + g.next() % 24, target = 1 + g.next() % 200;
    const auto x = random_qkv(n, d, 1000 + trial);
    const auto p = make_pattern(n, block, target);
    auto allowed = [&](std::size_t i, std::size_t j) {
      const auto& a = p.allowed[i / block];
      return std::binary_search(a.begin(), a.end(), j / block);
    };
    const double scale = default_scale(d);
    ASSERT_LE(oracle::max_abs_diff(block_sparse_attention(x.q, x.k, x.v, p, scale).data,
                                   oracle::masked_attention(x.q, x.k, x.v, scale, allowed).data),
              1e-12)
        << "trial " << trial;
  }
}

TEST(SlidingWindow, RangeConvention) {
  auto r = window_range(10, 100, 64);
  EXPECT_EQ(r.first, 0u);
  EXPECT_EQ(r.second, 42u);  // i + ceil(w/2) - 1 inclusive
  r = window_range(50, 100, 5);
  EXPECT_EQ(r.first, 48u);
  EXPECT_EQ(r.second, 53u);
}

TEST(SlidingWindow, MatchesMaskedOracleRandomized) {
  SplitMix64 g(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + g.next() % 150, d = 1 + g.next() % 6, w = 1 + g.next() % 50;
    const auto x = random_qkv(n, d, 5000 + trial);
    const auto left = static_cast<long>(w / 2), right = static_cast<long>((w + 1) / 2) - 1;
    auto allowed = [&](std::size_t i, std::size_t j) {
      const long di = static_cast<long>(j) - static_cast<long>(i);
      return di >= -left && di <= right;
    };
    const double scale = default_scale(d);
    ASSERT_LE(oracle::max_abs_diff(sliding_window_attention(x.q, x.k, x.v, w, scale).data,
                                   oracle::masked_attention(x.q, x.k, x.v, scale, allowed).data),
              1e-12)
        << "trial " << trial;
  }
}

TEST(Saturation, FullPatternAndWideWindowEqualDense) {
  const auto x = random_qkv(80, 8, 3);
  const double s = default_scale(8);
  const Matrix dense = dense_attention(x.q, x.k, x.v, s);
  EXPECT_LE(oracle::max_abs_diff(block_sparse_attention(x.q, x.k, x.v, make_pattern(80, 16, 80), s).data, dense.data),
            1e-12);
  EXPECT_LE(oracle::max_abs_diff(sliding_window_attention(x.q, x.k, x.v, 160, s).data, dense.data), 1e-12);
}

TEST(Counts, WindowEdgeClipping) {
  // interior rows see w keys; the deficit at the edges is at most w^2/2
  const std::size_t n = 256, w = 64;
  const auto c = count_interactions_window(n, w);
  EXPECT_LE(c, n * w);
  EXPECT_GE(c + w * w / 2, n * w);
  EXPECT_EQ(count_interactions_window(10, 64), 100u);
  EXPECT_EQ(count_interactions_dense(3, 7), 21u);
}
