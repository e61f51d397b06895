#pragma once

// Dense 64-bit array substrate shared by every other module: row-major
// matrices, 4-axis (T, H, W, C) tensors, a fixed-order matmul, row softmax,
// group mean-pooling and the seeded normal initializer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace freqformer {

/// Raised when operand shapes disagree.
class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for invalid scalar arguments (zero sizes, out-of-range factors).
class argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a configuration is internally inconsistent.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw shape_error("Matrix: data length " + std::to_string(data.size()) +
                        " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool empty() const { return data.empty(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct Shape4 {
  std::size_t t = 0;  // frames
  std::size_t h = 0;  // rows
  std::size_t w = 0;  // cols
  std::size_t c = 0;  // channels

  std::size_t tokens() const { return t * h * w; }
  std::size_t size() const { return t * h * w * c; }

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

inline std::string to_string(const Shape4& s) {
  return "(" + std::to_string(s.t) + "," + std::to_string(s.h) + "," + std::to_string(s.w) +
         "," + std::to_string(s.c) + ")";
}

/// Row-major (T, H, W, C) tensor. Token index is (t*H + h)*W + w.
struct Tensor4 {
  Shape4 shape;
  std::vector<double> data;

  Tensor4() = default;
  explicit Tensor4(Shape4 s, double fill = 0.0) : shape(s), data(s.size(), fill) {}
  Tensor4(Shape4 s, std::vector<double> values) : shape(s), data(std::move(values)) {
    if (data.size() != shape.size()) {
      throw shape_error("Tensor4: data length does not match shape " + to_string(shape));
    }
  }

  double& at(std::size_t t, std::size_t h, std::size_t w, std::size_t c) {
    return data[((t * shape.h + h) * shape.w + w) * shape.c + c];
  }
  double at(std::size_t t, std::size_t h, std::size_t w, std::size_t c) const {
    return data[((t * shape.h + h) * shape.w + w) * shape.c + c];
  }

  /// View as an N x C token matrix (copy).
  Matrix as_tokens() const { return Matrix(shape.tokens(), shape.c, data); }

  static Tensor4 from_tokens(const Matrix& tokens, Shape4 s) {
    if (tokens.rows != s.tokens() || tokens.cols != s.c) {
      throw shape_error("Tensor4::from_tokens: token matrix does not match " + to_string(s));
    }
    return Tensor4(s, tokens.data);
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;
};

inline double frobenius_norm(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

inline bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

inline Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
  return out;
}

/// Plain i-k-j product. Each output entry accumulates over k in increasing
/// order, so results are bitwise reproducible.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw shape_error("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                      " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* o = out.data.data() + i * out.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

/// Softmax of one score vector in place, with max subtraction.
inline void softmax_inplace(std::span<double> z) {
  if (z.empty()) return;
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

/// Row-wise softmax of `scale * m`.
inline Matrix softmax_rows(const Matrix& m, double scale) {
  Matrix out(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) dst[c] = src[c] * scale;
    softmax_inplace(dst);
  }
  return out;
}

/// Mean over consecutive groups of `group` rows; the last group may be short
/// and is averaged over its actual size.
inline Matrix mean_pool_groups(const Matrix& tokens, std::size_t group) {
  if (group == 0) throw argument_error("mean_pool_groups: group must be >= 1");
  const std::size_t out_rows = (tokens.rows + group - 1) / group;
  Matrix out(out_rows, tokens.cols);
  for (std::size_t g = 0; g < out_rows; ++g) {
    const std::size_t begin = g * group;
    const std::size_t end = std::min(begin + group, tokens.rows);
    auto dst = out.row(g);
    for (std::size_t r = begin; r < end; ++r) {
      auto src = tokens.row(r);
      for (std::size_t c = 0; c < tokens.cols; ++c) dst[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (double& v : dst) v *= inv;
  }
  return out;
}

/// Mean over exactly min(parts, rows) contiguous, near-equal groups. Group g
/// covers rows [floor(g*rows/parts), floor((g+1)*rows/parts)). When `parts`
/// divides `rows` this equals mean_pool_groups(tokens, rows / parts).
inline Matrix mean_pool_into(const Matrix& tokens, std::size_t parts) {
  if (parts == 0) throw argument_error("mean_pool_into: parts must be >= 1");
  const std::size_t n = std::min(parts, tokens.rows);
  Matrix out(n, tokens.cols);
  for (std::size_t g = 0; g < n; ++g) {
    const std::size_t begin = g * tokens.rows / n;
    const std::size_t end = (g + 1) * tokens.rows / n;
    auto dst = out.row(g);
    for (std::size_t r = begin; r < end; ++r) {
      auto src = tokens.row(r);
      for (std::size_t c = 0; c < tokens.cols; ++c) dst[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (double& v : dst) v *= inv;
  }
  return out;
}

/// Stack rows of several matrices with equal column counts.
inline Matrix vstack(std::span<const Matrix> parts, std::size_t cols) {
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols != cols && p.rows != 0) throw shape_error("vstack: column mismatch");
    rows += p.rows;
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const auto& p : parts) {
    std::copy(p.data.begin(), p.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(at * cols));
    at += p.rows;
  }
  return out;
}

/// Column block [begin, begin + count) of m.
inline Matrix column_block(const Matrix& m, std::size_t begin, std::size_t count) {
  if (begin + count > m.cols) throw shape_error("column_block: range exceeds column count");
  Matrix out(m.rows, count);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, begin + c);
  return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw shape_error("add: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

}  // namespace freqformer
