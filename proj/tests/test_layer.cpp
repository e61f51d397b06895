#include <gtest/gtest.h>

#include "freqformer/layer.hpp"
#include "oracles.hpp"

using namespace freqformer;

namespace {

LayerConfig two_head_config() {
  LayerConfig cfg;
  cfg.d_model = 128;
  cfg.n_heads = 2;
  cfg.d_k = 64;
  cfg.routing = HeadRouting::broadcast;
  cfg.seed = 7;
  return cfg;
}

LayerConfig small_routed() {
  LayerConfig cfg;
  cfg.t = 4;
  cfg.h = 4;
  cfg.w = 8;
  cfg.d_model = 96;
  cfg.n_heads = 3;
  cfg.d_k = 32;
  cfg.k_mid = 16;
  cfg.window = 8;
  cfg.block = 4;
  cfg.summaries = 2;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(Layer, ConfigValidation) {
  LayerConfig cfg;
  cfg.d_k = 32;
  EXPECT_THROW(cfg.validate(), config_error);
  LayerConfig routed = two_head_config();
  routed.routing = HeadRouting::routed;
  EXPECT_THROW(routed.validate(), config_error);
  EXPECT_NO_THROW(two_head_config().validate());
}

TEST(Layer, InputShapeChecked) {
  const auto cfg = two_head_config();
  const auto wt = LayerWeights::random(cfg);
  EXPECT_THROW(layer_forward(cfg, wt, Tensor4(Shape4{8, 8, 4, 128}), 0), shape_error);
}

TEST(Layer, ForwardBitwiseDeterministic) {
  const auto cfg = small_routed();
  const auto wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), 11, 1.0);
  const Tensor4 a = layer_forward(cfg, wt, x, 250);
  const Tensor4 b = layer_forward(cfg, LayerWeights::random(cfg), x, 250);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(all_finite(a.data));
}

TEST(Layer, RoutedHeadsFollowDecision) {
  const auto cfg = small_routed();
  const auto wt = LayerWeights::random(cfg);
  const auto trace = layer_forward_traced(cfg, wt, seeded_tensor(cfg.input_shape(), 1, 1.0), 40);
  const auto& h = trace.decision.heads;
  EXPECT_EQ(h[0] + h[1] + h[2], cfg.n_heads);
  std::array<std::size_t, 3> running{};
  for (const auto& r : trace.runs) {
    EXPECT_EQ(int(r[0]) + int(r[1]) + int(r[2]), 1);
    for (int b = 0; b < 3; ++b) running[b] += r[b];
  }
  EXPECT_EQ(running, h);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd)
    EXPECT_NEAR(trace.pi_per_head(hd, 0) + trace.pi_per_head(hd, 1) + trace.pi_per_head(hd, 2), 1.0, 1e-12);
}

TEST(Layer, ApproxReportSumOfSquares) {
  const auto cfg = small_routed();
  const auto wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), 2, 1.0);
  const auto part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const auto rep = approximation_report(dense_reference_forward(cfg, wt, x), layer_forward(cfg, wt, x, 9),
                                        SpectralPlan::dct(cfg.t, cfg.h, cfg.w), part);
  const double sum = rep.eps_low() * rep.eps_low() + rep.eps_mid() * rep.eps_mid() + rep.eps_high() * rep.eps_high();
  EXPECT_GT(rep.total_error, 0.0);
  EXPECT_LE(std::abs(sum - rep.total_error * rep.total_error), 1e-10 * rep.total_error * rep.total_error);
}

TEST(Layer, DenseReferenceMatchesOracle) {
  const auto cfg = small_routed();
  const auto wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), 5, 1.0);
  EXPECT_LE(oracle::max_abs_diff(dense_reference_forward(cfg, wt, x).data, oracle::dense_layer(cfg, wt, x).data),
            1e-10);
}

TEST(Layer, ExchangePairsPerHead) {
  const auto cfg = two_head_config();
  const auto wt = LayerWeights::random(cfg);
  const auto trace = layer_forward_traced(cfg, wt, seeded_tensor(cfg.input_shape(), 3, 1.0), 100);
  EXPECT_EQ(trace.counts.exchange, (16u + 192u + 256u) * 16u * cfg.n_heads);
  LayerConfig off = cfg;
  off.exchange = false;
  EXPECT_EQ(layer_forward_traced(off, wt, seeded_tensor(cfg.input_shape(), 3, 1.0), 100).counts.exchange, 0u);
}

TEST(Layer, BranchCountsMatchOperators) {
  const auto cfg = two_head_config();
  const auto wt = LayerWeights::random(cfg);
  const auto trace = layer_forward_traced(cfg, wt, seeded_tensor(cfg.input_shape(), 3, 1.0), 100);
  EXPECT_EQ(trace.counts.low, 2u * 16u * 16u);
  EXPECT_EQ(trace.counts.mid, 2u * count_interactions(make_pattern(192, 16, 256)));
  EXPECT_EQ(trace.counts.high, 2u * count_interactions_window(256, 64));
}

TEST(Layer, SaturatedMatchesHandComposedOracle) {
  const auto cfg = two_head_config().saturated();
  const auto wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), 21, 1.0);
  const Tensor4 y = layer_forward(cfg, wt, x, 500);
  const Tensor4 ref = oracle::saturated_layer(cfg, wt, x);
  EXPECT_LE(oracle::max_abs_diff(y.data, ref.data), 1e-10);
  EXPECT_LE(oracle::max_abs_diff(band_dense_forward(cfg, wt, x).data, y.data), 1e-10);
}

TEST(Layer, ThreeHeadsTakeOneBandEach) {
  const auto cfg = small_routed();
  const auto wt = LayerWeights::random(cfg);
  const auto trace = layer_forward_traced(cfg, wt, seeded_tensor(cfg.input_shape(), 8, 1.0), 0);
  EXPECT_EQ(trace.decision.heads, (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_EQ(trace.counts.low, 4u * 4u);  // 16 low tokens compress to 4
}
