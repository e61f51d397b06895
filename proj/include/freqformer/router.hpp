#pragma once

// Timestep-conditioned band router: pooled band statistics, sinusoidal
// timestep embedding, a two-layer ReLU MLP giving band probabilities,
// integer head apportionment and the load-balance penalty.
//
// Input layout is [g_low (d_r) ; g_mid (d_r) ; g_high (d_r) ; e(t) (d_t)].
// hidden = relu(x W1 + b1), logits = hidden W2 + b2, pi = softmax(logits).

#include <array>
#include <cmath>
#include <cstdint>

#include "freqformer/core.hpp"
#include "freqformer/rng.hpp"

namespace freqformer {

struct RouterParams {
  std::size_t d_r = 64;
  std::size_t d_t = 64;
  std::size_t hidden = 128;
  Matrix w1;                // (3 d_r + d_t) x hidden
  std::vector<double> b1;   // hidden
  Matrix w2;                // hidden x 3
  std::vector<double> b2;   // 3

  std::size_t input_width() const { return 3 * d_r + d_t; }

  std::size_t param_count() const { return w1.data.size() + b1.size() + w2.data.size() + b2.size(); }

  static RouterParams zeros(std::size_t d_r = 64, std::size_t d_t = 64, std::size_t hidden = 128) {
    RouterParams p;
    p.d_r = d_r;
    p.d_t = d_t;
    p.hidden = hidden;
    p.w1 = Matrix(p.input_width(), hidden);
    p.b1.assign(hidden, 0.0);
    p.w2 = Matrix(hidden, 3);
    p.b2.assign(3, 0.0);
    return p;
  }

  /// Normal init with fan-in scaling; biases drawn at 0.1 scale.
  static RouterParams random(std::uint64_t seed, std::size_t d_r = 64, std::size_t d_t = 64,
                             std::size_t hidden = 128) {
    RouterParams p = zeros(d_r, d_t, hidden);
    const double in = static_cast<double>(p.input_width());
    p.w1 = seeded_matrix(p.input_width(), hidden, derive_seed(seed, 0), 1.0 / std::sqrt(in));
    p.b1 = seeded_vector(hidden, derive_seed(seed, 1), 0.1);
    p.w2 = seeded_matrix(hidden, 3, derive_seed(seed, 2), 1.0 / std::sqrt(static_cast<double>(hidden)));
    p.b2 = seeded_vector(3, derive_seed(seed, 3), 0.1);
    return p;
  }

  void validate() const {
    if (w1.rows != input_width() || w1.cols != hidden || b1.size() != hidden || w2.rows != hidden ||
        w2.cols != 3 || b2.size() != 3) {
      throw config_error("RouterParams: inconsistent shapes");
    }
  }
};

/// Parameter count of the reference router (256 -> 128 -> 3).
inline constexpr std::size_t kReferenceRouterParams = 256 * 128 + 128 + 128 * 3 + 3;
static_assert(kReferenceRouterParams == 33'283);

/// Multiply-add FLOPs of one routing evaluation: 2(256*128) + 2(128*3).
inline constexpr std::uint64_t router_flops() { return 2 * (256 * 128) + 2 * (128 * 3); }
static_assert(router_flops() == 66'304);

struct RoutingDecision {
  std::array<double, 3> pi{};
  std::array<std::size_t, 3> heads{};
};

/// Per band, the mean absolute value of each coefficient column over the
/// band's tokens (zero for an empty band), concatenated low | mid | high.
inline std::vector<double> pooled_stats(const Matrix& low, const Matrix& mid, const Matrix& high,
                                        std::size_t d_r = 64) {
  std::vector<double> g(3 * d_r, 0.0);
  const std::array<const Matrix*, 3> bands = {&low, &mid, &high};
  for (std::size_t b = 0; b < 3; ++b) {
    const Matrix& m = *bands[b];
    if (m.cols != d_r) {
      throw shape_error("pooled_stats: band has " + std::to_string(m.cols) + " columns, expected " +
                        std::to_string(d_r));
    }
    if (m.rows == 0) continue;
    double* seg = g.data() + b * d_r;
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < d_r; ++c) seg[c] += std::abs(m(r, c));
    for (std::size_t c = 0; c < d_r; ++c) seg[c] /= static_cast<double>(m.rows);
  }
  return g;
}

/// Interleaved (sin, cos) of t / 10000^(2i/d_t), i = 0 .. d_t/2 - 1.
inline std::vector<double> timestep_embedding(std::int64_t t, std::size_t d_t = 64) {
  if (t < 0) throw argument_error("timestep_embedding: t must be >= 0");
  if (d_t % 2 != 0) throw argument_error("timestep_embedding: d_t must be even");
  std::vector<double> e(d_t);
  for (std::size_t i = 0; i < d_t / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d_t));
    const double arg = static_cast<double>(t) * freq;
    e[2 * i] = std::sin(arg);
    e[2 * i + 1] = std::cos(arg);
  }
  return e;
}

namespace detail {

struct RouterActivations {
  std::vector<double> input;
  std::vector<double> pre;     // x W1 + b1
  std::vector<double> hidden;  // relu(pre)
  std::array<double, 3> logits{};
};

inline RouterActivations router_forward(const RouterParams& p, std::span<const double> g,
                                        std::span<const double> e) {
  if (g.size() != 3 * p.d_r || e.size() != p.d_t) {
    throw shape_error("route: expected " + std::to_string(3 * p.d_r) + " statistics and " +
                      std::to_string(p.d_t) + " embedding values");
  }
  RouterActivations a;
  a.input.reserve(p.input_width());
  a.input.insert(a.input.end(), g.begin(), g.end());
  a.input.insert(a.input.end(), e.begin(), e.end());
  a.pre = p.b1;
  for (std::size_t i = 0; i < a.input.size(); ++i) {
    const double xi = a.input[i];
    auto wrow = p.w1.row(i);
    for (std::size_t j = 0; j < p.hidden; ++j) a.pre[j] += xi * wrow[j];
  }
  a.hidden.resize(p.hidden);
  for (std::size_t j = 0; j < p.hidden; ++j) a.hidden[j] = a.pre[j] > 0.0 ? a.pre[j] : 0.0;
  for (std::size_t o = 0; o < 3; ++o) {
    double z = p.b2[o];
    for (std::size_t j = 0; j < p.hidden; ++j) z += a.hidden[j] * p.w2(j, o);
    a.logits[o] = z;
  }
  return a;
}

}  // namespace detail

inline std::array<double, 3> router_logits(const RouterParams& p, std::span<const double> g,
                                           std::span<const double> e) {
  return detail::router_forward(p, g, e).logits;
}

inline std::array<double, 3> route(const RouterParams& p, std::span<const double> g,
                                   std::span<const double> e) {
  auto z = router_logits(p, g, e);
  softmax_inplace(z);
  return z;
}

/// Largest-remainder apportionment of n_h * pi, then a floor of one head per
/// band: a starved band takes one head from the currently largest band.
/// Ties resolve in band order low, mid, high.
inline std::array<std::size_t, 3> allocate_heads(const std::array<double, 3>& pi, std::size_t n_h) {
  if (n_h < 3) throw argument_error("allocate_heads: need at least 3 heads, got " + std::to_string(n_h));
  std::array<std::size_t, 3> heads{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    const double quota = static_cast<double>(n_h) * pi[b];
    heads[b] = static_cast<std::size_t>(std::floor(quota));
    frac[b] = quota - static_cast<double>(heads[b]);
    assigned += heads[b];
  }
  // pi on the simplex can round so that floors overshoot by one
  while (assigned > n_h) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (heads[i] > heads[b]) b = i;
    --heads[b];
    --assigned;
  }
  std::array<bool, 3> used{};
  while (assigned < n_h) {
    std::size_t best = 3;
    for (std::size_t b = 0; b < 3; ++b) {
      if (used[b]) continue;
      if (best == 3 || frac[b] > frac[best]) best = b;
    }
    if (best == 3) {  // every band already took a remainder seat
      used = {};
      continue;
    }
    used[best] = true;
    ++heads[best];
    ++assigned;
  }
  for (std::size_t b = 0; b < 3; ++b) {
    if (heads[b] >= 1) continue;
    std::size_t donor = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (heads[i] > heads[donor]) donor = i;
    --heads[donor];
    heads[b] = 1;
  }
  return heads;
}

/// lambda * sum_l (mean_h pi[h][l] - 1/3)^2 over an n_h x 3 matrix.
inline double load_balance_loss(const Matrix& pi_per_head, double lambda) {
  if (pi_per_head.cols != 3) throw shape_error("load_balance_loss: expected 3 columns");
  if (pi_per_head.rows == 0) throw argument_error("load_balance_loss: no heads");
  std::array<double, 3> mean{};
  for (std::size_t h = 0; h < pi_per_head.rows; ++h) {
    double s = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      const double v = pi_per_head(h, b);
      if (v < -1e-9) throw argument_error("load_balance_loss: negative probability");
      s += v;
      mean[b] += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw argument_error("load_balance_loss: row off the simplex");
  }
  double loss = 0.0;
  for (double m : mean) {
    const double d = m / static_cast<double>(pi_per_head.rows) - 1.0 / 3.0;
    loss += d * d;
  }
  return lambda * loss;
}

/// Gradient of sum(logits) with respect to every router parameter, laid out
/// like RouterParams.
inline RouterParams router_gradient(const RouterParams& p, std::span<const double> g,
                                    std::span<const double> e) {
  const auto act = detail::router_forward(p, g, e);
  RouterParams grad = RouterParams::zeros(p.d_r, p.d_t, p.hidden);
  grad.b2 = {1.0, 1.0, 1.0};
  for (std::size_t j = 0; j < p.hidden; ++j) {
    for (std::size_t o = 0; o < 3; ++o) grad.w2(j, o) = act.hidden[j];
    if (act.pre[j] <= 0.0) continue;
    const double upstream = p.w2(j, 0) + p.w2(j, 1) + p.w2(j, 2);
    grad.b1[j] = upstream;
    for (std::size_t i = 0; i < act.input.size(); ++i) grad.w1(i, j) = act.input[i] * upstream;
  }
  return grad;
}

}  // namespace freqformer
