#pragma once

// Independent reference implementations for the test suites. These use the
// library only for its plain data types (Matrix, Tensor4, BandPartition
// indices) and recompute everything else from scratch with direct loops.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "freqformer/core.hpp"
#include "freqformer/layer.hpp"

namespace oracle {

using freqformer::Matrix;
using freqformer::Shape4;
using freqformer::Tensor4;

// Triple loop with long double accumulation.
inline Matrix product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols; ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline Matrix columns(const Matrix& m, std::size_t begin, std::size_t count) {
  Matrix out(m.rows, count);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, begin + c);
  return out;
}

// DCT-II basis value for frequency k at position x of an axis of length n.
inline double dct_basis(std::size_t k, std::size_t x, std::size_t n) {
  const double a = k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
  return a * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) * static_cast<double>(k) /
                      (2.0 * static_cast<double>(n)));
}

/// Direct triple-sum 3-D DCT-II over (T, H, W) of a token matrix laid out
/// (t*H + h)*W + w. inverse=true applies the transpose.
inline Matrix dct3(const Matrix& tokens, std::size_t T, std::size_t H, std::size_t W, bool inverse = false) {
  auto table = [&](std::size_t n) {
    std::vector<double> b(n * n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t x = 0; x < n; ++x) b[k * n + x] = dct_basis(k, x, n);
    return b;
  };
  const auto bt = table(T), bh = table(H), bw = table(W);
  Matrix out(tokens.rows, tokens.cols);
  for (std::size_t kt = 0; kt < T; ++kt)
    for (std::size_t kh = 0; kh < H; ++kh)
      for (std::size_t kw = 0; kw < W; ++kw) {
        const std::size_t o = (kt * H + kh) * W + kw;
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t h = 0; h < H; ++h)
            for (std::size_t w = 0; w < W; ++w) {
              const double f = inverse ? bt[t * T + kt] * bh[h * H + kh] * bw[w * W + kw]
                                       : bt[kt * T + t] * bh[kh * H + h] * bw[kw * W + w];
              const std::size_t i = (t * H + h) * W + w;
              for (std::size_t c = 0; c < tokens.cols; ++c) out(o, c) += f * tokens(i, c);
            }
      }
  return out;
}

/// Dense attention with disallowed pairs scored -inf, softmax written out.
template <class Allowed>
Matrix masked_attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale, Allowed allowed) {
  Matrix out(q.rows, v.cols);
  for (std::size_t i = 0; i < q.rows; ++i) {
    std::vector<double> s(k.rows);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k.rows; ++j) {
      if (!allowed(i, j)) {
        s[j] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double dot = 0;
      for (std::size_t c = 0; c < q.cols; ++c) dot += q(i, c) * k(j, c);
      s[j] = dot * scale;
      mx = std::max(mx, s[j]);
    }
    if (!std::isfinite(mx)) continue;
    double z = 0;
    for (double& x : s) z += (x = std::exp(x - mx));
    for (std::size_t j = 0; j < k.rows; ++j)
      for (std::size_t c = 0; c < v.cols; ++c) out(i, c) += s[j] / z * v(j, c);
  }
  return out;
}

inline Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale) {
  return masked_attention(q, k, v, scale, [](std::size_t, std::size_t) { return true; });
}

/// Bands by sorting normalized radius kt/T + kh/H + kw/W, compared exactly by
/// cross-multiplication, ties by flat index.
inline std::array<std::vector<std::size_t>, 3> bands(std::size_t T, std::size_t H, std::size_t W,
                                                     double rho_low = 0.125, double rho_mid = 0.375) {
  const std::size_t n = T * H * W;
  struct Coef {
    std::size_t kt, kh, kw, flat;
  };
  std::vector<Coef> cs;
  for (std::size_t f = 0; f < n; ++f) cs.push_back({f / (H * W), (f / W) % H, f % W, f});
  std::sort(cs.begin(), cs.end(), [&](const Coef& a, const Coef& b) {
    const auto ra = a.kt * H * W + a.kh * T * W + a.kw * T * H;
    const auto rb = b.kt * H * W + b.kh * T * W + b.kw * T * H;
    return ra != rb ? ra < rb : a.flat < b.flat;
  });
  const auto n_low = static_cast<std::size_t>(std::floor(rho_low * static_cast<double>(n) + 1e-9));
  const auto n_mid = static_cast<std::size_t>(std::floor(rho_mid * static_cast<double>(n) + 1e-9));
  std::array<std::vector<std::size_t>, 3> out;
  for (std::size_t i = 0; i < n; ++i) out[i < n_low ? 0 : (i < n_low + n_mid ? 1 : 2)].push_back(cs[i].flat);
  return out;
}

/// Router MLP logits with explicit loops.
inline std::array<double, 3> router_logits(const freqformer::RouterParams& p, const std::vector<double>& g,
                                           const std::vector<double>& e) {
  std::vector<double> x(g);
  x.insert(x.end(), e.begin(), e.end());
  std::array<double, 3> z{};
  for (std::size_t o = 0; o < 3; ++o) z[o] = p.b2[o];
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double a = p.b1[j];
    for (std::size_t i = 0; i < x.size(); ++i) a += x[i] * p.w1(i, j);
    if (a <= 0) continue;
    for (std::size_t o = 0; o < 3; ++o) z[o] += a * p.w2(j, o);
  }
  return z;
}

inline std::array<double, 3> softmax(std::array<double, 3> z) {
  const double m = std::max({z[0], z[1], z[2]});
  double s = 0;
  for (double& v : z) s += (v = std::exp(v - m));
  for (double& v : z) v /= s;
  return z;
}

/// Saturated layer composed by hand: per head, 3-D DCT of Q/K/V, bands by
/// the oracle sort, low band mapped by D (no pooling) and back by U, full
/// attention in every band, inverse DCT, concat, W_O.
inline Tensor4 saturated_layer(const freqformer::LayerConfig& cfg, const freqformer::LayerWeights& wt,
                               const Tensor4& x) {
  const Matrix tokens(x.shape.tokens(), x.shape.c, x.data);
  const Matrix q_all = product(tokens, wt.wq), k_all = product(tokens, wt.wk), v_all = product(tokens, wt.wv);
  const auto idx = bands(cfg.t, cfg.h, cfg.w, cfg.band.rho_low, cfg.band.rho_mid);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_k));
  Matrix concat(tokens.rows, cfg.d_model);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const std::size_t col = hd * cfg.d_k;
    const Matrix qs = dct3(columns(q_all, col, cfg.d_k), cfg.t, cfg.h, cfg.w);
    const Matrix ks = dct3(columns(k_all, col, cfg.d_k), cfg.t, cfg.h, cfg.w);
    const Matrix vs = dct3(columns(v_all, col, cfg.d_k), cfg.t, cfg.h, cfg.w);
    Matrix ys(tokens.rows, cfg.d_k);
    for (std::size_t b = 0; b < 3; ++b) {
      auto pick = [&](const Matrix& m) {
        Matrix out(idx[b].size(), cfg.d_k);
        for (std::size_t r = 0; r < idx[b].size(); ++r)
          for (std::size_t c = 0; c < cfg.d_k; ++c) out(r, c) = m(idx[b][r], c);
        return out;
      };
      Matrix qb = pick(qs), kb = pick(ks), vb = pick(vs);
      if (b == 0) {
        qb = product(qb, wt.d_q[hd]);
        kb = product(kb, wt.d_k[hd]);
        vb = product(vb, wt.d_v[hd]);
      }
      Matrix yb = attention(qb, kb, vb, scale);
      if (b == 0) yb = product(yb, wt.u_expand[hd]);
      for (std::size_t r = 0; r < idx[b].size(); ++r)
        for (std::size_t c = 0; c < cfg.d_k; ++c) ys(idx[b][r], c) = yb(r, c);
    }
    const Matrix y = dct3(ys, cfg.t, cfg.h, cfg.w, true);
    for (std::size_t r = 0; r < y.rows; ++r)
      for (std::size_t c = 0; c < cfg.d_k; ++c) concat(r, col + c) = y(r, c);
  }
  const Matrix out = product(concat, wt.wo);
  return Tensor4(x.shape, out.data);
}

/// Standard multi-head attention with no transform.
inline Tensor4 dense_layer(const freqformer::LayerConfig& cfg, const freqformer::LayerWeights& wt,
                           const Tensor4& x) {
  const Matrix tokens(x.shape.tokens(), x.shape.c, x.data);
  const Matrix q_all = product(tokens, wt.wq), k_all = product(tokens, wt.wk), v_all = product(tokens, wt.wv);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_k));
  Matrix concat(tokens.rows, cfg.d_model);
  for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
    const std::size_t col = hd * cfg.d_k;
    const Matrix y = attention(columns(q_all, col, cfg.d_k), columns(k_all, col, cfg.d_k),
                               columns(v_all, col, cfg.d_k), scale);
    for (std::size_t r = 0; r < y.rows; ++r)
      for (std::size_t c = 0; c < cfg.d_k; ++c) concat(r, col + c) = y(r, c);
  }
  return Tensor4(x.shape, product(concat, wt.wo).data);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace oracle
