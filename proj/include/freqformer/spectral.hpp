#pragma once

// Separable orthonormal DCT-II over the (T, H, W) token axes of a Tensor4.
// Channels are never mixed. Each axis is applied as an explicit n x n matrix
// product; desk-scale sizes make O(n^2) per axis acceptable.

#include <cmath>
#include <numbers>

#include "freqformer/core.hpp"

namespace freqformer {

/// Orthonormal DCT-II matrix: entry (k, i) = c_k cos(pi (2i+1) k / 2n),
/// c_0 = sqrt(1/n), c_k = sqrt(2/n).
inline Matrix dct_matrix(std::size_t n) {
  if (n == 0) throw argument_error("dct_matrix: n must be >= 1");
  Matrix f(n, n);
  const double nd = static_cast<double>(n);
  const double c0 = std::sqrt(1.0 / nd);
  const double ck = std::sqrt(2.0 / nd);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * nd);
      f(k, i) = (k == 0 ? c0 : ck) * std::cos(arg);
    }
  }
  return f;
}

struct SpectralPlan {
  Matrix f_t;
  Matrix f_h;
  Matrix f_w;

  static SpectralPlan dct(std::size_t t, std::size_t h, std::size_t w) {
    return {dct_matrix(t), dct_matrix(h), dct_matrix(w)};
  }

  std::size_t t() const { return f_t.rows; }
  std::size_t h() const { return f_h.rows; }
  std::size_t w() const { return f_w.rows; }
};

namespace detail {

enum class Axis { t, h, w };

// out[.., k, ..] = sum_i m(k, i) * x[.., i, ..] along `axis`.
inline Tensor4 apply_axis(const Tensor4& x, const Matrix& m, Axis axis) {
  const Shape4 s = x.shape;
  Tensor4 out(s);
  const std::size_t n = axis == Axis::t ? s.t : axis == Axis::h ? s.h : s.w;
  // stride between consecutive positions along the axis, in doubles
  const std::size_t stride = axis == Axis::t ? s.h * s.w * s.c : axis == Axis::h ? s.w * s.c : s.c;
  const std::size_t outer = axis == Axis::t ? 1 : axis == Axis::h ? s.t : s.t * s.h;
  const std::size_t inner = stride;
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * n * stride;
    for (std::size_t k = 0; k < n; ++k) {
      double* dst = out.data.data() + base + k * stride;
      for (std::size_t i = 0; i < n; ++i) {
        const double coef = m(k, i);
        const double* src = x.data.data() + base + i * stride;
        for (std::size_t j = 0; j < inner; ++j) dst[j] += coef * src[j];
      }
    }
  }
  return out;
}

inline void check_plan(const SpectralPlan& plan, const Tensor4& x, const char* who) {
  if (plan.t() != x.shape.t || plan.h() != x.shape.h || plan.w() != x.shape.w) {
    throw shape_error(std::string(who) + ": plan axes do not match tensor shape " +
                      to_string(x.shape));
  }
}

}  // namespace detail

inline Tensor4 spectral_forward(const SpectralPlan& plan, const Tensor4& x) {
  detail::check_plan(plan, x, "spectral_forward");
  Tensor4 y = detail::apply_axis(x, plan.f_t, detail::Axis::t);
  y = detail::apply_axis(y, plan.f_h, detail::Axis::h);
  return detail::apply_axis(y, plan.f_w, detail::Axis::w);
}

inline Tensor4 spectral_inverse(const SpectralPlan& plan, const Tensor4& y) {
  detail::check_plan(plan, y, "spectral_inverse");
  Tensor4 x = detail::apply_axis(y, transpose(plan.f_w), detail::Axis::w);
  x = detail::apply_axis(x, transpose(plan.f_h), detail::Axis::h);
  return detail::apply_axis(x, transpose(plan.f_t), detail::Axis::t);
}

}  // namespace freqformer
