#include <gtest/gtest.h>

#include "freqformer/router.hpp"
#include "oracles.hpp"

using namespace freqformer;

TEST(Router, ParameterCountAndFlops) {
  EXPECT_EQ(RouterParams::zeros().param_count(), 33'283u);
  EXPECT_EQ(RouterParams::random(1).param_count(), 33'283u);
  EXPECT_EQ(kReferenceRouterParams, 33'283u);
  EXPECT_EQ(router_flops(), 66'304u);
}

TEST(Router, LogitsMatchExplicitLoops) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = RouterParams::random(s);
    const auto g = seeded_vector(192, 100 + s, 1.0);
    const auto e = timestep_embedding(static_cast<std::int64_t>(37 * s));
    const auto z = router_logits(p, g, e);
    const auto ref = oracle::router_logits(p, g, e);
    for (int i = 0; i < 3; ++i) ASSERT_NEAR(z[i], ref[i], 1e-12);
    const auto pi = route(p, g, e);
    const auto ref_pi = oracle::softmax(ref);
    for (int i = 0; i < 3; ++i) ASSERT_NEAR(pi[i], ref_pi[i], 1e-12);
  }
}

TEST(Router, SimplexOnThousandDraws) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto p = RouterParams::random(s);
    const auto pi = route(p, seeded_vector(192, 7000 + s, 2.0), timestep_embedding(static_cast<std::int64_t>(s)));
    ASSERT_GE(pi[0], 0.0);
    ASSERT_GE(pi[1], 0.0);
    ASSERT_GE(pi[2], 0.0);
    ASSERT_NEAR(pi[0] + pi[1] + pi[2], 1.0, 1e-12);
  }
}

TEST(Router, ZeroParamsGiveUniform) {
  const auto pi = route(RouterParams::zeros(), std::vector<double>(192, 1.0), timestep_embedding(3));
  for (double v : pi) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Router, InputWidthChecked) {
  EXPECT_THROW(route(RouterParams::zeros(), std::vector<double>(10, 0.0), timestep_embedding(0)), shape_error);
}

TEST(Router, TimestepEmbeddingInterleaved) {
  const auto e = timestep_embedding(0);
  ASSERT_EQ(e.size(), 64u);
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_EQ(e[2 * i], 0.0);
    EXPECT_EQ(e[2 * i + 1], 1.0);
  }
  const auto e5 = timestep_embedding(5);
  EXPECT_NEAR(e5[0], std::sin(5.0), 1e-15);
  EXPECT_NEAR(e5[3], std::cos(5.0 * std::pow(10000.0, -2.0 / 64.0)), 1e-15);
  EXPECT_THROW(timestep_embedding(-1), argument_error);
}

TEST(Router, PooledStatsMeanAbs) {
  Matrix low(2, 2, std::vector<double>{1, -2, -3, 4});
  Matrix mid(1, 2, std::vector<double>{-5, 6});
  Matrix high(0, 2);
  const auto g = pooled_stats(low, mid, high, 2);
  EXPECT_EQ(g, (std::vector<double>{2, 3, 5, 6, 0, 0}));
}

TEST(Heads, LargestRemainder) {
  EXPECT_EQ(allocate_heads({0.5, 0.3, 0.2}, 4), (std::array<std::size_t, 3>{2, 1, 1}));
  EXPECT_EQ(allocate_heads({0.2, 0.5, 0.3}, 10), (std::array<std::size_t, 3>{2, 5, 3}));
  EXPECT_EQ(allocate_heads({1.0 / 3, 1.0 / 3, 1.0 / 3}, 3), (std::array<std::size_t, 3>{1, 1, 1}));
}

TEST(Heads, StarvedBandsTakeFromLargest) {
  EXPECT_EQ(allocate_heads({0.9, 0.05, 0.05}, 4), (std::array<std::size_t, 3>{2, 1, 1}));
  EXPECT_EQ(allocate_heads({0.0, 1.0, 0.0}, 8), (std::array<std::size_t, 3>{1, 6, 1}));
}

TEST(Heads, TooFewHeadsThrows) { EXPECT_THROW(allocate_heads({0.3, 0.3, 0.4}, 2), argument_error); }

TEST(Heads, SumAndFloorOnRandomSimplex) {
  SplitMix64 g(12);
  for (int i = 0; i < 2000; ++i) {
    std::array<double, 3> z = {g.uniform() * 6 - 3, g.uniform() * 6 - 3, g.uniform() * 6 - 3};
    const auto pi = oracle::softmax(z);
    const std::size_t n = 3 + g.next() % 40;
    const auto a = allocate_heads(pi, n);
    ASSERT_EQ(a[0] + a[1] + a[2], n);
    for (auto c : a) ASSERT_GE(c, 1u);
  }
}

TEST(LoadBalance, UniformAndCollapse) {
  EXPECT_LE(std::abs(load_balance_loss(Matrix(4, 3, 1.0 / 3.0), 0.7)), 1e-12);
  Matrix collapsed(4, 3, 0.0);
  for (std::size_t h = 0; h < 4; ++h) collapsed(h, 2) = 1.0;
  EXPECT_LE(std::abs(load_balance_loss(collapsed, 1.0) - 2.0 / 3.0), 1e-12);
  EXPECT_LE(std::abs(load_balance_loss(collapsed, 0.25) - 0.25 * 2.0 / 3.0), 1e-12);
  EXPECT_THROW(load_balance_loss(Matrix(2, 3, 0.5), 1.0), argument_error);
}

TEST(RouterGradient, CentralDifferences) {
  RouterParams p = RouterParams::random(5);
  const auto g = seeded_vector(192, 6, 1.0);
  const auto e = timestep_embedding(120);
  const auto grad = router_gradient(p, g, e);
  auto objective = [&] {
    const auto z = oracle::router_logits(p, g, e);
    return z[0] + z[1] + z[2];
  };
  // hidden pre-activations, to skip coordinates that sit near the ReLU kink
  std::vector<double> pre(p.b1);
  std::vector<double> x(g);
  x.insert(x.end(), e.begin(), e.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < p.hidden; ++j) pre[j] += x[i] * p.w1(i, j);
  const double h = 1e-6;
  auto near_kink = [&](std::size_t j, double perturbation) { return std::abs(pre[j]) < 10 * perturbation; };
  int checked = 0;
  auto check = [&](double& value, double analytic, std::size_t unit, double reach) {
    if (near_kink(unit, reach)) return;
    const double saved = value;
    value = saved + h;
    const double up = objective();
    value = saved - h;
    const double down = objective();
    value = saved;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max(std::abs(analytic), 1e-3);
    ASSERT_LE(std::abs(fd - analytic) / denom, 1e-6);
    ++checked;
  };
  for (std::size_t i = 0; i < p.w1.rows; i += 7)
    for (std::size_t j = 0; j < p.hidden; j += 3) check(p.w1(i, j), grad.w1(i, j), j, h * std::abs(x[i]));
  for (std::size_t j = 0; j < p.hidden; ++j) check(p.b1[j], grad.b1[j], j, h);
  for (std::size_t j = 0; j < p.hidden; ++j)
    for (std::size_t o = 0; o < 3; ++o) {
      const double saved = p.w2(j, o);
      p.w2(j, o) = saved + h;
      const double up = objective();
      p.w2(j, o) = saved - h;
      const double down = objective();
      p.w2(j, o) = saved;
      const double fd = (up - down) / (2 * h);
      ASSERT_LE(std::abs(fd - grad.w2(j, o)), 1e-6 * std::max(std::abs(grad.w2(j, o)), 1e-3));
    }
  for (double v : grad.b2) EXPECT_EQ(v, 1.0);
  EXPECT_GT(checked, 1000);
}
