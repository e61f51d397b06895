#pragma once

// Frequency-heterogeneous attention layer.
//
// Per head: project Q/K/V, forward-transform, split into bands, run
//   low  -> dense attention on tokens compressed by BandSpec::compression,
//   mid  -> block-sparse attention (pattern targeting k_mid keys/query),
//   high -> sliding-window attention of width w,
// exchange m summary tokens per band across bands, expand the low band back
// to N_low positions, scatter, inverse-transform. Heads are concatenated and
// projected by W_O.
//
// Under HeadRouting::routed the router apportions heads to bands; a head runs
// only its band's operator and passes the value coefficients of the other two
// bands through untouched. Under HeadRouting::broadcast every head runs all
// three operators.

#include <array>
#include <cstdint>
#include <optional>

#include "freqformer/attention.hpp"
#include "freqformer/bands.hpp"
#include "freqformer/core.hpp"
#include "freqformer/rng.hpp"
#include "freqformer/router.hpp"
#include "freqformer/spectral.hpp"

namespace freqformer {

enum class HeadRouting { routed, broadcast };

struct LayerConfig {
  std::size_t t = 8, h = 8, w = 8;
  std::size_t d_model = 256;
  std::size_t n_heads = 4;
  std::size_t d_k = 64;
  BandSpec band{};
  std::size_t k_mid = 256;
  std::size_t window = 64;
  std::size_t summaries = 8;  // m, per band
  std::size_t block = 16;
  bool exchange = true;
  HeadRouting routing = HeadRouting::routed;
  std::uint64_t seed = 0;

  std::size_t tokens() const { return t * h * w; }
  Shape4 input_shape() const { return {t, h, w, d_model}; }

  void validate() const {
    if (t == 0 || h == 0 || w == 0) throw config_error("LayerConfig: axis sizes must be >= 1");
    if (n_heads == 0 || n_heads * d_k != d_model) {
      throw config_error("LayerConfig: n_heads * d_k must equal d_model");
    }
    if (summaries == 0 || window == 0 || k_mid == 0 || block == 0) {
      throw config_error("LayerConfig: m, w, k_mid and block must be >= 1");
    }
    if (routing == HeadRouting::routed && n_heads < 3) {
      throw config_error("LayerConfig: routed head allocation needs at least 3 heads");
    }
    band.validate();
  }

  /// Every band operator saturates to dense attention: window covers the
  /// band, the sparse pattern is full, no low-band compression, no exchange.
  LayerConfig saturated() const {
    LayerConfig c = *this;
    c.window = 2 * tokens();
    c.k_mid = tokens();
    c.band.compression = 1;
    c.exchange = false;
    c.routing = HeadRouting::broadcast;
    return c;
  }
};

struct LayerWeights {
  Matrix wq, wk, wv, wo;                // d_model x d_model
  std::vector<Matrix> d_q, d_k, d_v;    // per head, d_k x d_k low-band compression maps
  std::vector<Matrix> u_expand;         // per head, d_k x d_k low-band expansion map
  std::array<Matrix, 3> u_summary;      // d_k x d_k summary projection per band
  RouterParams router;

  /// Projections ~ N(0, 1/d_model); compression, expansion and summary maps
  /// are identity plus N(0, 0.01^2) noise; router per RouterParams::random.
  static LayerWeights random(const LayerConfig& cfg) {
    cfg.validate();
    LayerWeights wt;
    const double proj = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
    std::uint64_t stream = 0;
    auto next_seed = [&] { return derive_seed(cfg.seed, stream++); };
    wt.wq = seeded_matrix(cfg.d_model, cfg.d_model, next_seed(), proj);
    wt.wk = seeded_matrix(cfg.d_model, cfg.d_model, next_seed(), proj);
    wt.wv = seeded_matrix(cfg.d_model, cfg.d_model, next_seed(), proj);
    wt.wo = seeded_matrix(cfg.d_model, cfg.d_model, next_seed(), proj);
    auto near_identity = [&] {
      return add(Matrix::identity(cfg.d_k), seeded_matrix(cfg.d_k, cfg.d_k, next_seed(), 0.01));
    };
    for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
      wt.d_q.push_back(near_identity());
      wt.d_k.push_back(near_identity());
      wt.d_v.push_back(near_identity());
      wt.u_expand.push_back(near_identity());
    }
    for (auto& u : wt.u_summary) u = near_identity();
    wt.router = RouterParams::random(next_seed(), cfg.d_k, 64, 128);
    return wt;
  }

  void validate(const LayerConfig& cfg) const {
    auto square = [](const Matrix& m, std::size_t n) { return m.rows == n && m.cols == n; };
    if (!square(wq, cfg.d_model) || !square(wk, cfg.d_model) || !square(wv, cfg.d_model) ||
        !square(wo, cfg.d_model)) {
      throw config_error("LayerWeights: projections must be d_model x d_model");
    }
    for (const auto* maps : {&d_q, &d_k, &d_v, &u_expand}) {
      if (maps->size() != cfg.n_heads) throw config_error("LayerWeights: need one map per head");
      for (const auto& m : *maps)
        if (!square(m, cfg.d_k)) throw config_error("LayerWeights: head maps must be d_k x d_k");
    }
    for (const auto& u : u_summary)
      if (!square(u, cfg.d_k)) throw config_error("LayerWeights: summary maps must be d_k x d_k");
    router.validate();
    if (router.d_r != cfg.d_k) throw config_error("LayerWeights: router statistic width must equal d_k");
  }
};

struct BranchCounts {
  std::uint64_t low = 0;
  std::uint64_t mid = 0;
  std::uint64_t high = 0;
  std::uint64_t exchange = 0;

  std::uint64_t attention() const { return low + mid + high; }
};

struct LayerTrace {
  Tensor4 output;
  RoutingDecision decision;                 // layer-level pi and head counts per band
  Matrix pi_per_head;                       // n_h x 3
  std::vector<std::array<bool, 3>> runs;    // runs[head][band]
  BranchCounts counts;
};

struct ApproxReport {
  double total_error = 0.0;
  std::array<double, 3> eps{};  // low, mid, high

  double eps_low() const { return eps[0]; }
  double eps_mid() const { return eps[1]; }
  double eps_high() const { return eps[2]; }
};

namespace detail {

struct HeadProjections {
  std::array<Matrix, 3> q, k, v;  // spectral, per band
};

inline HeadProjections project_head(const LayerConfig& cfg, const SpectralPlan& plan,
                                    const BandPartition& part, const Matrix& q_all,
                                    const Matrix& k_all, const Matrix& v_all, std::size_t head) {
  const Shape4 hs{cfg.t, cfg.h, cfg.w, cfg.d_k};
  const std::size_t col = head * cfg.d_k;
  auto to_bands = [&](const Matrix& all, std::array<Matrix, 3>& out) {
    const Tensor4 spec = spectral_forward(plan, Tensor4::from_tokens(column_block(all, col, cfg.d_k), hs));
    for (Band b : kBands) out[static_cast<int>(b)] = gather_band(spec, part, b);
  };
  HeadProjections p;
  to_bands(q_all, p.q);
  to_bands(k_all, p.k);
  to_bands(v_all, p.v);
  return p;
}

inline void write_head(Matrix& concat, const Matrix& tokens, std::size_t head, std::size_t d_k) {
  for (std::size_t r = 0; r < tokens.rows; ++r)
    for (std::size_t c = 0; c < d_k; ++c) concat(r, head * d_k + c) = tokens(r, c);
}

inline Matrix head_to_tokens(const LayerConfig& cfg, const SpectralPlan& plan,
                             const BandPartition& part, const std::array<Matrix, 3>& bands) {
  const Shape4 hs{cfg.t, cfg.h, cfg.w, cfg.d_k};
  return spectral_inverse(plan, scatter_bands(bands[0], bands[1], bands[2], part, hs)).as_tokens();
}

inline void check_inputs(const LayerConfig& cfg, const LayerWeights& wt, const Tensor4& x) {
  cfg.validate();
  wt.validate(cfg);
  if (x.shape != cfg.input_shape()) {
    throw shape_error("layer: input shape " + to_string(x.shape) + " != expected " +
                      to_string(cfg.input_shape()));
  }
}

}  // namespace detail

inline LayerTrace layer_forward_traced(const LayerConfig& cfg, const LayerWeights& wt,
                                       const Tensor4& x, std::int64_t timestep) {
  detail::check_inputs(cfg, wt, x);
  const SpectralPlan plan = SpectralPlan::dct(cfg.t, cfg.h, cfg.w);
  const BandPartition part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const std::size_t factor = cfg.band.compression;
  const double scale = default_scale(cfg.d_k);
  const Matrix tokens = x.as_tokens();
  const Matrix q_all = matmul(tokens, wt.wq);
  const Matrix k_all = matmul(tokens, wt.wk);
  const Matrix v_all = matmul(tokens, wt.wv);

  std::vector<detail::HeadProjections> heads;
  heads.reserve(cfg.n_heads);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    heads.push_back(detail::project_head(cfg, plan, part, q_all, k_all, v_all, hd));
  }

  // Routing: per-head probabilities feed the balance loss; the layer decision
  // uses the head-averaged statistics.
  LayerTrace trace;
  const auto emb = timestep_embedding(timestep, wt.router.d_t);
  std::vector<double> g_mean(3 * wt.router.d_r, 0.0);
  trace.pi_per_head = Matrix(cfg.n_heads, 3);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const auto& p = heads[hd];
    const auto g = pooled_stats(p.q[0], p.q[1], p.q[2], wt.router.d_r);
    const auto pi = route(wt.router, g, emb);
    for (std::size_t b = 0; b < 3; ++b) trace.pi_per_head(hd, b) = pi[b];
    for (std::size_t i = 0; i < g.size(); ++i) g_mean[i] += g[i] / static_cast<double>(cfg.n_heads);
  }
  trace.decision.pi = route(wt.router, g_mean, emb);
  trace.runs.assign(cfg.n_heads, {true, true, true});
  if (cfg.routing == HeadRouting::routed) {
    trace.decision.heads = allocate_heads(trace.decision.pi, cfg.n_heads);
    std::size_t hd = 0;
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t i = 0; i < trace.decision.heads[b]; ++i, ++hd) {
        trace.runs[hd] = {false, false, false};
        trace.runs[hd][b] = true;
      }
    }
  } else {
    trace.decision.heads = {cfg.n_heads, cfg.n_heads, cfg.n_heads};
  }

  std::optional<SparsePattern> mid_pattern;
  if (part.n_mid() > 0) mid_pattern = make_pattern(part.n_mid(), cfg.block, cfg.k_mid);

  Matrix concat(cfg.tokens(), cfg.d_model);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const auto& p = heads[hd];
    const auto& runs = trace.runs[hd];
    std::array<Matrix, 3> y;

    if (runs[0]) {
      const Matrix ql = compress_low(p.q[0], factor, wt.d_q[hd]);
      const Matrix kl = compress_low(p.k[0], factor, wt.d_k[hd]);
      const Matrix vl = compress_low(p.v[0], factor, wt.d_v[hd]);
      y[0] = dense_attention(ql, kl, vl, scale);
      trace.counts.low += count_interactions_dense(ql.rows, kl.rows);
    } else {
      y[0] = p.v[0];
    }
    if (runs[1] && mid_pattern) {
      y[1] = block_sparse_attention(p.q[1], p.k[1], p.v[1], *mid_pattern, scale);
      trace.counts.mid += count_interactions(*mid_pattern);
    } else {
      y[1] = p.v[1];
    }
    if (runs[2] && part.n_high() > 0) {
      y[2] = sliding_window_attention(p.q[2], p.k[2], p.v[2], cfg.window, scale);
      trace.counts.high += count_interactions_window(part.n_high(), cfg.window);
    } else {
      y[2] = p.v[2];
    }

    if (cfg.exchange) {
      std::array<Matrix, 3> summary;
      for (std::size_t b = 0; b < 3; ++b) {
        summary[b] = matmul(mean_pool_into(y[b], cfg.summaries), wt.u_summary[b]);
      }
      std::array<Matrix, 3> delta;
      for (std::size_t b = 0; b < 3; ++b) {
        if (!runs[b]) continue;
        std::vector<Matrix> foreign;  // band order, own band skipped
        for (std::size_t o = 0; o < 3; ++o)
          if (o != b) foreign.push_back(summary[o]);
        const Matrix keys = vstack(foreign, cfg.d_k);
        delta[b] = dense_attention(y[b], keys, keys, scale);
        trace.counts.exchange += count_interactions_dense(y[b].rows, keys.rows);
      }
      for (std::size_t b = 0; b < 3; ++b)
        if (runs[b]) y[b] = add(y[b], delta[b]);
    }

    if (runs[0]) y[0] = expand_low(y[0], part.n_low(), factor, wt.u_expand[hd]);
    detail::write_head(concat, detail::head_to_tokens(cfg, plan, part, y), hd, cfg.d_k);
  }

  trace.output = Tensor4::from_tokens(matmul(concat, wt.wo), cfg.input_shape());
  return trace;
}

inline Tensor4 layer_forward(const LayerConfig& cfg, const LayerWeights& wt, const Tensor4& x,
                             std::int64_t timestep) {
  return layer_forward_traced(cfg, wt, x, timestep).output;
}

/// Standard multi-head dense attention over all N tokens with the same
/// W_Q, W_K, W_V, W_O; no transform, no bands.
inline Tensor4 dense_reference_forward(const LayerConfig& cfg, const LayerWeights& wt,
                                       const Tensor4& x) {
  detail::check_inputs(cfg, wt, x);
  const Matrix tokens = x.as_tokens();
  const Matrix q_all = matmul(tokens, wt.wq);
  const Matrix k_all = matmul(tokens, wt.wk);
  const Matrix v_all = matmul(tokens, wt.wv);
  Matrix concat(cfg.tokens(), cfg.d_model);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const std::size_t col = hd * cfg.d_k;
    const Matrix o = dense_attention(column_block(q_all, col, cfg.d_k), column_block(k_all, col, cfg.d_k),
                                     column_block(v_all, col, cfg.d_k), default_scale(cfg.d_k));
    detail::write_head(concat, o, hd, cfg.d_k);
  }
  return Tensor4::from_tokens(matmul(concat, wt.wo), cfg.input_shape());
}

/// Same spectral pipeline as layer_forward with every band running dense
/// attention (low band still compressed/expanded), every head on every band
/// and no exchange. Equals layer_forward under LayerConfig::saturated().
inline Tensor4 band_dense_forward(const LayerConfig& cfg, const LayerWeights& wt, const Tensor4& x) {
  detail::check_inputs(cfg, wt, x);
  const SpectralPlan plan = SpectralPlan::dct(cfg.t, cfg.h, cfg.w);
  const BandPartition part = build_partition(cfg.t, cfg.h, cfg.w, cfg.band);
  const std::size_t factor = cfg.band.compression;
  const double scale = default_scale(cfg.d_k);
  const Matrix tokens = x.as_tokens();
  const Matrix q_all = matmul(tokens, wt.wq);
  const Matrix k_all = matmul(tokens, wt.wk);
  const Matrix v_all = matmul(tokens, wt.wv);
  Matrix concat(cfg.tokens(), cfg.d_model);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const auto p = detail::project_head(cfg, plan, part, q_all, k_all, v_all, hd);
    std::array<Matrix, 3> y;
    y[0] = expand_low(dense_attention(compress_low(p.q[0], factor, wt.d_q[hd]),
                                      compress_low(p.k[0], factor, wt.d_k[hd]),
                                      compress_low(p.v[0], factor, wt.d_v[hd]), scale),
                      part.n_low(), factor, wt.u_expand[hd]);
    y[1] = dense_attention(p.q[1], p.k[1], p.v[1], scale);
    y[2] = dense_attention(p.q[2], p.k[2], p.v[2], scale);
    detail::write_head(concat, detail::head_to_tokens(cfg, plan, part, y), hd, cfg.d_k);
  }
  return Tensor4::from_tokens(matmul(concat, wt.wo), cfg.input_shape());
}

/// Per-band Frobenius norms of F(y_full - y_freq); their squares sum to the
/// squared total by orthonormality of F and disjointness of the bands.
inline ApproxReport approximation_report(const Tensor4& y_full, const Tensor4& y_freq,
                                         const SpectralPlan& plan, const BandPartition& part) {
  if (y_full.shape != y_freq.shape) throw shape_error("approximation_report: shape mismatch");
  Tensor4 delta = y_full;
  for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] -= y_freq.data[i];
  const Tensor4 spec = spectral_forward(plan, delta);
  ApproxReport rep;
  rep.total_error = frobenius_norm(delta.data);
  for (Band b : kBands) rep.eps[static_cast<int>(b)] = frobenius_norm(gather_band(spec, part, b).data);
  return rep;
}

}  // namespace freqformer
