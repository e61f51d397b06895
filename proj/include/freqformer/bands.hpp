#pragma once

// Low / mid / high partition of the N = T*H*W coefficient grid, band
// gather/scatter, and the 4x low-band compression with its expansion.
//
// Coefficients are ranked by the normalized frequency sum
//   kappa(k_t, k_h, k_w) = k_t/T + k_h/H + k_w/W
// which is compared exactly as the integer k_t*H*W + k_h*T*W + k_w*T*H.
// Ties fall back to (k_t, k_h, k_w) order, i.e. flat index order.

#include <array>
#include <cmath>
#include <numeric>

#include "freqformer/core.hpp"

namespace freqformer {

enum class Band { low = 0, mid = 1, high = 2 };

inline constexpr std::array<Band, 3> kBands = {Band::low, Band::mid, Band::high};

inline const char* band_name(Band b) {
  switch (b) {
    case Band::low: return "low";
    case Band::mid: return "mid";
    case Band::high: return "high";
  }
  return "?";
}

struct BandSpec {
  double rho_low = 0.125;
  double rho_mid = 0.375;
  double rho_high = 0.5;
  std::size_t compression = 4;

  void validate() const {
    if (rho_low < 0 || rho_mid < 0 || rho_high < 0) throw config_error("BandSpec: negative fraction");
    if (std::abs(rho_low + rho_mid + rho_high - 1.0) > 1e-12) {
      throw config_error("BandSpec: fractions must sum to 1");
    }
    if (compression < 1) throw config_error("BandSpec: compression must be >= 1");
  }
};

struct BandPartition {
  std::size_t t = 0, h = 0, w = 0;
  std::size_t n_total = 0;
  std::size_t compression = 1;
  std::array<std::vector<std::size_t>, 3> indices;  // flat coefficient indices, band order

  const std::vector<std::size_t>& idx(Band b) const { return indices[static_cast<int>(b)]; }
  std::size_t count(Band b) const { return idx(b).size(); }
  std::size_t n_low() const { return count(Band::low); }
  std::size_t n_mid() const { return count(Band::mid); }
  std::size_t n_high() const { return count(Band::high); }
  std::size_t n_low_compressed() const { return (n_low() + compression - 1) / compression; }

  /// kappa * T*H*W as an exact integer.
  std::size_t key(std::size_t flat) const {
    const std::size_t kw = flat % w;
    const std::size_t kh = (flat / w) % h;
    const std::size_t kt = flat / (w * h);
    return kt * h * w + kh * t * w + kw * t * h;
  }
};

inline std::size_t floor_count(double rho, std::size_t n) {
  // guard against products like 0.375 * N landing a hair below an integer
  return static_cast<std::size_t>(std::floor(rho * static_cast<double>(n) + 1e-9));
}

inline BandPartition build_partition(std::size_t t, std::size_t h, std::size_t w,
                                     const BandSpec& spec = {}) {
  if (t == 0 || h == 0 || w == 0) throw argument_error("build_partition: axis sizes must be >= 1");
  spec.validate();
  BandPartition part;
  part.t = t;
  part.h = h;
  part.w = w;
  part.n_total = t * h * w;
  part.compression = spec.compression;

  std::vector<std::size_t> order(part.n_total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::size_t ka = part.key(a), kb = part.key(b);
    return ka != kb ? ka < kb : a < b;
  });

  const std::size_t n_low = floor_count(spec.rho_low, part.n_total);
  const std::size_t n_mid = std::min(floor_count(spec.rho_mid, part.n_total), part.n_total - n_low);
  const auto begin = order.begin();
  part.indices[0].assign(begin, begin + static_cast<std::ptrdiff_t>(n_low));
  part.indices[1].assign(begin + static_cast<std::ptrdiff_t>(n_low),
                         begin + static_cast<std::ptrdiff_t>(n_low + n_mid));
  part.indices[2].assign(begin + static_cast<std::ptrdiff_t>(n_low + n_mid), order.end());
  return part;
}

inline void check_partition_shape(const BandPartition& part, const Shape4& s, const char* who) {
  if (s.t != part.t || s.h != part.h || s.w != part.w) {
    throw shape_error(std::string(who) + ": tensor shape " + to_string(s) +
                      " does not match partition grid");
  }
}

/// Rows of the band in band order, N_band x C.
inline Matrix gather_band(const Tensor4& x, const BandPartition& part, Band band) {
  check_partition_shape(part, x.shape, "gather_band");
  const auto& idx = part.idx(band);
  const std::size_t c = x.shape.c;
  Matrix out(idx.size(), c);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(idx[r] * c), c, out.row(r).begin());
  }
  return out;
}

/// Inverse of gather_band over all three bands.
inline Tensor4 scatter_bands(const Matrix& low, const Matrix& mid, const Matrix& high,
                             const BandPartition& part, Shape4 shape) {
  check_partition_shape(part, shape, "scatter_bands");
  Tensor4 out(shape);
  const std::array<const Matrix*, 3> src = {&low, &mid, &high};
  for (Band b : kBands) {
    const Matrix& m = *src[static_cast<int>(b)];
    const auto& idx = part.idx(b);
    if (m.rows != idx.size() || (m.rows != 0 && m.cols != shape.c)) {
      throw shape_error(std::string("scatter_bands: ") + band_name(b) + " band has " +
                        std::to_string(m.rows) + "x" + std::to_string(m.cols) + ", expected " +
                        std::to_string(idx.size()) + "x" + std::to_string(shape.c));
    }
    for (std::size_t r = 0; r < idx.size(); ++r) {
      std::copy(m.row(r).begin(), m.row(r).end(),
                out.data.begin() + static_cast<std::ptrdiff_t>(idx[r] * shape.c));
    }
  }
  return out;
}

/// Pool groups of `factor` band-ordered tokens, then right-multiply by d_map.
inline Matrix compress_low(const Matrix& tokens, std::size_t factor, const Matrix& d_map) {
  if (factor == 0) throw argument_error("compress_low: factor must be >= 1");
  if (d_map.rows != tokens.cols || d_map.cols != tokens.cols) {
    throw shape_error("compress_low: d_map must be C x C");
  }
  if (tokens.rows == 0) return Matrix(0, tokens.cols);
  return matmul(mean_pool_groups(tokens, factor), d_map);
}

/// Replicate each compressed row onto its `factor` source positions (the
/// last group may be short), then right-multiply by u_map.
inline Matrix expand_low(const Matrix& compressed, std::size_t n_low, std::size_t factor,
                         const Matrix& u_map) {
  if (factor == 0) throw argument_error("expand_low: factor must be >= 1");
  if ((n_low + factor - 1) / factor != compressed.rows) {
    throw shape_error("expand_low: " + std::to_string(compressed.rows) +
                      " compressed rows cannot expand to " + std::to_string(n_low));
  }
  if (u_map.rows != compressed.cols || u_map.cols != compressed.cols) {
    throw shape_error("expand_low: u_map must be C x C");
  }
  Matrix rep(n_low, compressed.cols);
  for (std::size_t r = 0; r < n_low; ++r) {
    auto src = compressed.row(r / factor);
    std::copy(src.begin(), src.end(), rep.row(r).begin());
  }
  return matmul(rep, u_map);
}

}  // namespace freqformer
