#pragma once

// Seeded normal initializer.
//
// Generator: SplitMix64. The state advances by the golden-gamma constant
// 0x9E3779B97F4A7C15 and each output is the standard SplitMix64 finalizer of
// the new state. A uniform double in (0, 1] is taken from the top 53 bits as
// ((x >> 11) + 1) * 2^-53. Normals use Box-Muller on consecutive uniform
// pairs (u1, u2) and yield both sqrt(-2 ln u1) * cos(2 pi u2) and
// sqrt(-2 ln u1) * sin(2 pi u2), in that order.
//
// The integer stream is bit-exact on every platform. The normal stream is
// bit-exact wherever log/cos/sin are correctly rounded to the same result
// (true of glibc and every libm used in CI).

#include <cmath>
#include <cstdint>
#include <numbers>

#include "freqformer/core.hpp"

namespace freqformer {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1].
  double uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = gen_.uniform();
    const double u2 = gen_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  SplitMix64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Matrix seeded_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale) {
  Matrix m(rows, cols);
  NormalStream s(seed);
  for (double& v : m.data) v = scale * s.next();
  return m;
}

inline Tensor4 seeded_tensor(Shape4 shape, std::uint64_t seed, double scale) {
  Tensor4 x(shape);
  NormalStream s(seed);
  for (double& v : x.data) v = scale * s.next();
  return x;
}

inline std::vector<double> seeded_vector(std::size_t n, std::uint64_t seed, double scale) {
  std::vector<double> v(n);
  NormalStream s(seed);
  for (double& x : v) x = scale * s.next();
  return v;
}

/// Derive an independent sub-stream seed for component `index` of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return g.next();
}

}  // namespace freqformer
