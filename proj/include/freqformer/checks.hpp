#pragma once

// Cross-module invariant suite behind `freqformer check`. Each property is
// evaluated on seeded random instances and reported as one PASS/FAIL line;
// the final line is `properties_passed=<k> properties_failed=<f>`.

#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "freqformer/attention.hpp"
#include "freqformer/bands.hpp"
#include "freqformer/layer.hpp"
#include "freqformer/published_tables.hpp"
#include "freqformer/perf_model.hpp"
#include "freqformer/report.hpp"
#include "freqformer/rng.hpp"
#include "freqformer/router.hpp"
#include "freqformer/spectral.hpp"

namespace freqformer {

struct CheckSummary {
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

namespace checks {

struct Outcome {
  bool passed = true;
  std::string detail;
};

inline Outcome fail(std::string d) { return {false, std::move(d)}; }

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Dense attention where allowed(i, j) == false contributes an -inf score.
template <class Allowed>
Matrix masked_dense(const Matrix& q, const Matrix& k, const Matrix& v, double scale, Allowed allowed) {
  Matrix scores = matmul(q, transpose(k));
  for (std::size_t i = 0; i < scores.rows; ++i)
    for (std::size_t j = 0; j < scores.cols; ++j)
      if (!allowed(i, j)) scores(i, j) = -std::numeric_limits<double>::infinity();
  return matmul(softmax_rows(scores, scale), v);
}

inline Outcome dct_orthonormal() {
  for (std::size_t n = 1; n <= 32; ++n) {
    const Matrix f = dct_matrix(n);
    const Matrix g = matmul(transpose(f), f);
    const double dev = max_abs_diff(g.data, Matrix::identity(n).data);
    if (dev > 1e-10) return fail("n=" + std::to_string(n) + " deviation " + std::to_string(dev));
  }
  return {};
}

inline Outcome transform_parseval_and_round_trip() {
  SplitMix64 sizes(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape4 s{1 + sizes.next() % 8, 1 + sizes.next() % 8, 1 + sizes.next() % 8, 1 + sizes.next() % 3};
    const auto plan = SpectralPlan::dct(s.t, s.h, s.w);
    const Tensor4 x = seeded_tensor(s, 100 + trial, 1.0);
    const Tensor4 y = spectral_forward(plan, x);
    const double nx = frobenius_norm(x.data), ny = frobenius_norm(y.data);
    if (std::abs(nx - ny) > 1e-10 * nx) return fail("Parseval at " + to_string(s));
    if (max_abs_diff(spectral_inverse(plan, y).data, x.data) > 1e-8) return fail("round trip at " + to_string(s));
  }
  return {};
}

inline Outcome transform_linearity() {
  const Shape4 s{4, 3, 5, 2};
  const auto plan = SpectralPlan::dct(s.t, s.h, s.w);
  const Tensor4 x = seeded_tensor(s, 1, 1.0), y = seeded_tensor(s, 2, 1.0);
  Tensor4 mix(s);
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 1.5 * x.data[i] - 0.25 * y.data[i];
  const Tensor4 fx = spectral_forward(plan, x), fy = spectral_forward(plan, y), fm = spectral_forward(plan, mix);
  for (std::size_t i = 0; i < fm.data.size(); ++i)
    if (std::abs(fm.data[i] - (1.5 * fx.data[i] - 0.25 * fy.data[i])) > 1e-9) return fail("index " + std::to_string(i));
  return {};
}

inline Outcome partition_complete_and_monotone() {
  SplitMix64 g(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t t = 1 + g.next() % 16, h = 1 + g.next() % 16, w = 1 + g.next() % 16;
    const auto part = build_partition(t, h, w);
    std::vector<int> seen(part.n_total, 0);
    for (Band b : kBands)
      for (std::size_t i : part.idx(b)) ++seen[i];
    for (int c : seen)
      if (c != 1) return fail("not a partition at " + std::to_string(t) + "x" + std::to_string(h) + "x" + std::to_string(w));
    std::size_t prev_max = 0;
    for (Band b : kBands) {
      std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
      for (std::size_t i : part.idx(b)) lo = std::min(lo, part.key(i)), hi = std::max(hi, part.key(i));
      if (!part.idx(b).empty() && lo < prev_max) return fail("band keys not monotone");
      if (!part.idx(b).empty()) prev_max = hi;
    }
  }
  return {};
}

inline Outcome gather_scatter_exact() {
  const Shape4 s{6, 5, 7, 3};
  const auto part = build_partition(s.t, s.h, s.w);
  const Tensor4 x = seeded_tensor(s, 8, 1.0);
  const Tensor4 back = scatter_bands(gather_band(x, part, Band::low), gather_band(x, part, Band::mid),
                                     gather_band(x, part, Band::high), part, s);
  return back == x ? Outcome{} : fail("round trip not bitwise");
}

inline Outcome compress_expand_projection() {
  const Matrix x = seeded_matrix(37, 4, 3, 1.0);
  const Matrix id = Matrix::identity(4);
  const Matrix once = expand_low(compress_low(x, 4, id), x.rows, 4, id);
  const Matrix twice = expand_low(compress_low(once, 4, id), x.rows, 4, id);
  return max_abs_diff(once.data, twice.data) <= 1e-12 ? Outcome{} : fail("not idempotent");
}

inline Outcome sparse_operators_match_masked_oracle() {
  SplitMix64 g(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + g.next() % 128, d = 1 + g.next() % 8;
    const std::size_t block = 1 + g.next() % 20, target = 1 + g.next() % 160, w = 1 + g.next() % 40;
    const Matrix q = seeded_matrix(n, d, 3 * trial, 1.0), k = seeded_matrix(n, d, 3 * trial + 1, 1.0),
                 v = seeded_matrix(n, d, 3 * trial + 2, 1.0);
    const double scale = default_scale(d);
    const auto p = make_pattern(n, block, target);
    std::vector<std::vector<char>> allowed_blocks(p.num_blocks(), std::vector<char>(p.num_blocks(), 0));
    for (std::size_t qb = 0; qb < p.num_blocks(); ++qb)
      for (std::size_t kb : p.allowed[qb]) allowed_blocks[qb][kb] = 1;
    const Matrix sparse_ref = masked_dense(q, k, v, scale, [&](std::size_t i, std::size_t j) {
      return allowed_blocks[i / block][j / block] != 0;
    });
    if (max_abs_diff(block_sparse_attention(q, k, v, p, scale).data, sparse_ref.data) > 1e-12) {
      return fail("block-sparse trial " + std::to_string(trial));
    }
    const auto lo = static_cast<std::ptrdiff_t>(w / 2), hi = static_cast<std::ptrdiff_t>((w + 1) / 2 - 1);
    const Matrix window_ref = masked_dense(q, k, v, scale, [&](std::size_t i, std::size_t j) {
      const auto di = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i);
      return di >= -lo && di <= hi;
    });
    if (max_abs_diff(sliding_window_attention(q, k, v, w, scale).data, window_ref.data) > 1e-12) {
      return fail("sliding-window trial " + std::to_string(trial));
    }
  }
  return {};
}

inline Outcome saturation_equals_dense() {
  const std::size_t n = 64, d = 8;
  const Matrix q = seeded_matrix(n, d, 1, 1.0), k = seeded_matrix(n, d, 2, 1.0), v = seeded_matrix(n, d, 3, 1.0);
  const double scale = default_scale(d);
  const Matrix dense = dense_attention(q, k, v, scale);
  if (max_abs_diff(block_sparse_attention(q, k, v, make_pattern(n, 16, n), scale).data, dense.data) > 1e-12)
    return fail("full pattern");
  if (max_abs_diff(sliding_window_attention(q, k, v, 2 * n, scale).data, dense.data) > 1e-12)
    return fail("full window");
  return {};
}

inline Outcome router_constants() {
  if (RouterParams::zeros().param_count() != 33'283) return fail("parameter count");
  if (router_flops() != 66'304) return fail("router FLOPs");
  return {};
}

inline Outcome router_simplex() {
  for (int i = 0; i < 1000; ++i) {
    const auto p = RouterParams::random(static_cast<std::uint64_t>(i));
    const auto g = seeded_vector(192, 50'000 + i, 3.0);
    const auto pi = route(p, g, timestep_embedding(i));
    double s = 0;
    for (double v : pi) {
      if (v < 0) return fail("negative probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) return fail("draw " + std::to_string(i));
  }
  return {};
}

inline Outcome head_allocation() {
  SplitMix64 g(3);
  for (int i = 0; i < 500; ++i) {
    std::array<double, 3> z{};
    for (double& v : z) v = 4.0 * (g.uniform() - 0.5);
    auto pi = z;
    softmax_inplace(pi);
    auto shifted = z;
    for (double& v : shifted) v += 7.25;
    softmax_inplace(shifted);
    const std::size_t n_h = 3 + g.next() % 30;
    const auto a = allocate_heads(pi, n_h);
    if (a[0] + a[1] + a[2] != n_h || a[0] < 1 || a[1] < 1 || a[2] < 1) return fail("invalid allocation");
    if (allocate_heads(shifted, n_h) != a) return fail("not invariant to logit shift");
  }
  return {};
}

inline Outcome load_balance() {
  Matrix uniform(5, 3, 1.0 / 3.0);
  if (std::abs(load_balance_loss(uniform, 1.0)) > 1e-12) return fail("uniform not zero");
  Matrix collapsed(5, 3, 0.0);
  for (std::size_t h = 0; h < 5; ++h) collapsed(h, 0) = 1.0;
  if (std::abs(load_balance_loss(collapsed, 2.0) - 2.0 * 2.0 / 3.0) > 1e-12) return fail("collapse value");
  return {};
}

inline Outcome router_gradient_fd(std::size_t stride) {
  // points chosen with pre-activations away from the ReLU kink
  RouterParams p = RouterParams::random(77);
  auto g = seeded_vector(192, 78, 1.0);
  const auto e = timestep_embedding(250);
  const auto act_pre = [&] {
    std::vector<double> x(g);
    x.insert(x.end(), e.begin(), e.end());
    std::vector<double> pre(p.b1);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < p.hidden; ++j) pre[j] += x[i] * p.w1(i, j);
    return pre;
  }();
  for (std::size_t j = 0; j < p.hidden; ++j)
    if (std::abs(act_pre[j]) < 1e-3) p.b1[j] += act_pre[j] >= 0 ? 2e-3 : -2e-3;
  const RouterParams grad = router_gradient(p, g, e);
  auto objective = [&](const RouterParams& q) {
    const auto z = router_logits(q, g, e);
    return z[0] + z[1] + z[2];
  };
  const double h = 1e-5;
  auto check_block = [&](std::vector<double>& values, const std::vector<double>& analytic) -> Outcome {
    for (std::size_t i = 0; i < values.size(); i += stride) {
      if (std::abs(analytic[i]) <= 1e-8) continue;
      const double saved = values[i];
      values[i] = saved + h;
      const double up = objective(p);
      values[i] = saved - h;
      const double down = objective(p);
      values[i] = saved;
      const double fd = (up - down) / (2 * h);
      if (std::abs(fd - analytic[i]) > 1e-6 * std::abs(analytic[i])) return fail("coordinate " + std::to_string(i));
    }
    return {};
  };
  for (auto [values, analytic] : {std::pair{&p.w1.data, &grad.w1.data}, std::pair{&p.b1, &grad.b1},
                                  std::pair{&p.w2.data, &grad.w2.data}, std::pair{&p.b2, &grad.b2}}) {
    auto r = check_block(*values, *analytic);
    if (!r.passed) return r;
  }
  return {};
}

inline LayerConfig small_layer() {
  LayerConfig cfg;
  cfg.t = 4;
  cfg.h = 4;
  cfg.w = 4;
  cfg.d_model = 192;
  cfg.n_heads = 3;
  cfg.d_k = 64;
  cfg.k_mid = 16;
  cfg.window = 8;
  cfg.block = 4;
  cfg.seed = 9;
  return cfg;
}

inline Outcome layer_determinism_and_report() {
  const LayerConfig cfg = small_layer();
  const auto wt = LayerWeights::random(cfg);
  const Tensor4 x = seeded_tensor(cfg.input_shape(), 4, 1.0);
  const auto a = layer_forward_traced(cfg, wt, x, 300);
  const auto b = layer_forward_traced(cfg, wt, x, 300);
  if (!(a.output == b.output)) return fail("forward not bitwise deterministic");
  if (!all_finite(a.output.data)) return fail("non-finite output");
  const auto part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const auto rep = approximation_report(dense_reference_forward(cfg, wt, x), a.output,
                                        SpectralPlan::dct(cfg.t, cfg.h, cfg.w), part);
  const double sum = rep.eps[0] * rep.eps[0] + rep.eps[1] * rep.eps[1] + rep.eps[2] * rep.eps[2];
  const double tot = rep.total_error * rep.total_error;
  if (std::abs(sum - tot) > 1e-10 * tot) return fail("sum of squares");
  if (rep.total_error > rep.eps[0] + rep.eps[1] + rep.eps[2] + 1e-12) return fail("triangle bound");
  return {};
}

/// Each band attends to 2m foreign summaries, so per head the exchange adds
/// (compressed low + mid + high) * 2m pairs.
inline Outcome exchange_pairs_linear() {
  LayerConfig cfg;
  cfg.d_model = 128;
  cfg.n_heads = 2;
  cfg.routing = HeadRouting::broadcast;
  cfg.seed = 4;
  const auto wt = LayerWeights::random(cfg);
  const auto trace = layer_forward_traced(cfg, wt, seeded_tensor(cfg.input_shape(), 5, 1.0), 10);
  const auto part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const std::uint64_t per_head = (part.n_low_compressed() + part.n_mid() + part.n_high()) * 2 * cfg.summaries;
  return trace.counts.exchange == per_head * cfg.n_heads ? Outcome{} : fail("pair count");
}

inline const std::vector<double>& published_grid() {
  static const std::vector<double> grid = {65'536, 131'072, 262'144, 524'288, 1'048'576};
  return grid;
}

inline Outcome perf_exactness() {
  const CostConfig c;
  for (double n : published_grid()) {
    for (double v : {flops_dense(n, c), traffic_dense(n, c), interactions_freq(n, c), flops_freq_attention(n, c)})
      if (v != std::floor(v)) return fail("non-integral count at N=" + format_count(n));
  }
  return {};
}

inline Outcome perf_consistency_chain() {
  const CostConfig c;
  for (double n : published_grid())
    if (traffic_freq(n, c) != c.bytes_per_value * flops_freq_attention(n, c) / (2 * c.d_k)) return fail("traffic chain");
  return {};
}

inline Outcome perf_reduction_monotone() {
  const CostConfig c;
  double prev = 0;
  for (double n : published_grid()) {
    const double r = flops_dense(n, c) / flops_freq_total(n, c);
    if (!(r > prev)) return fail("reduction not increasing");
    prev = r;
  }
  return {};
}

inline Outcome perf_intensity_identities() {
  const CostConfig c;
  for (double n : published_grid()) {
    if (arithmetic_intensity(flops_dense(n, c), traffic_dense(n, c)) != c.d_k) return fail("dense");
    if (arithmetic_intensity(flops_freq_attention(n, c), traffic_freq(n, c)) != c.d_k) return fail("attention-only");
  }
  return {};
}

/// Executable pair counts summed over the three band operators at N = 512
/// against the analytic interaction count.
inline Outcome executable_vs_analytic() {
  const auto part = build_partition(8, 8, 8);
  const std::size_t w = 64;
  const std::uint64_t low = count_interactions_dense(part.n_low_compressed(), part.n_low_compressed());
  const std::uint64_t mid = count_interactions(make_pattern(part.n_mid(), 16, 256));
  const std::uint64_t high = count_interactions_window(part.n_high(), w);
  const double executable = static_cast<double>(low + mid + high);
  const double analytic = interactions_freq(512, CostConfig{});
  return std::abs(executable - analytic) <= static_cast<double>(w * w) / 2 ? Outcome{}
                                                                           : fail("difference exceeds w^2/2");
}


}  // namespace checks

inline CheckSummary run_checks(std::ostream& out, const PublishedTables& tables = PublishedTables::embedded(),
                               bool quick = false) {
  using namespace checks;
  CheckSummary summary;
  auto report = [&](const std::string& name, const Outcome& o) {
    out << (o.passed ? "PASS " : "FAIL ") << name;
    if (!o.detail.empty()) out << " (" << o.detail << ")";
    out << '\n';
    (o.passed ? summary.passed : summary.failed)++;
  };
  auto run = [&](const std::string& name, const std::function<Outcome()>& fn) {
    try {
      report(name, fn());
    } catch (const std::exception& e) {
      report(name, fail(std::string("threw: ") + e.what()));
    }
  };
  run("dct_orthonormality", dct_orthonormal);
  run("transform_parseval_round_trip", transform_parseval_and_round_trip);
  run("transform_linearity", transform_linearity);
  run("band_partition_complete_monotone", partition_complete_and_monotone);
  run("band_gather_scatter_exact", gather_scatter_exact);
  run("low_band_compress_expand_projection", compress_expand_projection);
  run("sparse_operators_match_masked_oracle", sparse_operators_match_masked_oracle);
  run("saturation_equals_dense", saturation_equals_dense);
  run("router_constants", router_constants);
  run("router_simplex", router_simplex);
  run("head_allocation", head_allocation);
  run("load_balance_loss", load_balance);
  run("router_gradient_finite_differences", [&] { return router_gradient_fd(quick ? 97 : 1); });
  run("layer_determinism_approx_report", layer_determinism_and_report);
  run("exchange_pairs_linear", exchange_pairs_linear);
  run("perf_exact_counts", perf_exactness);
  run("perf_traffic_chain", perf_consistency_chain);
  run("perf_reduction_monotone", perf_reduction_monotone);
  run("perf_intensity_identities", perf_intensity_identities);
  run("executable_vs_analytic_interactions", executable_vs_analytic);
  for (const auto& r : check_consistency(tables)) {
    report("published_" + r.name, r.passed ? Outcome{} : fail(r.detail));
  }
  out << "properties_passed=" << summary.passed << " properties_failed=" << summary.failed << '\n';
  return summary;
}

}  // namespace freqformer
