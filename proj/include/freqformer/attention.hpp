#pragma once

// Band attention operators: dense, block-sparse (block-local + strided) and
// sliding-window, plus exact (query, key) pair counting for each.

#include <array>
#include <cmath>
#include <cstdint>
#include <set>

#include "freqformer/core.hpp"

namespace freqformer {

inline double default_scale(std::size_t d_k) { return 1.0 / std::sqrt(static_cast<double>(d_k)); }

namespace detail {

inline void check_qkv(const Matrix& q, const Matrix& k, const Matrix& v, const char* who) {
  if (q.cols != k.cols || k.cols != v.cols) {
    throw shape_error(std::string(who) + ": q/k/v widths differ (" + std::to_string(q.cols) + ", " +
                      std::to_string(k.cols) + ", " + std::to_string(v.cols) + ")");
  }
  if (k.rows != v.rows) throw shape_error(std::string(who) + ": k and v row counts differ");
}

// Attend query row `qi` to key rows [begin, end) of each range; writes one
// output row. Score buffer is reused by the caller.
template <class Ranges>
void attend_row(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t qi,
                const Ranges& ranges, double scale, std::vector<double>& scores,
                std::span<double> out) {
  scores.clear();
  auto qrow = q.row(qi);
  for (auto [begin, end] : ranges) {
    for (std::size_t j = begin; j < end; ++j) {
      auto krow = k.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) dot += qrow[c] * krow[c];
      scores.push_back(dot * scale);
    }
  }
  softmax_inplace(scores);
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t s = 0;
  for (auto [begin, end] : ranges) {
    for (std::size_t j = begin; j < end; ++j, ++s) {
      auto vrow = v.row(j);
      const double p = scores[s];
      for (std::size_t c = 0; c < v.cols; ++c) out[c] += p * vrow[c];
    }
  }
}

using Range = std::pair<std::size_t, std::size_t>;

}  // namespace detail

/// softmax(q k^T * scale) v. An empty key set yields zero rows.
inline Matrix dense_attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale) {
  detail::check_qkv(q, k, v, "dense_attention");
  Matrix out(q.rows, v.cols);
  if (k.rows == 0) return out;
  std::vector<double> scores;
  scores.reserve(k.rows);
  const std::array<detail::Range, 1> all = {detail::Range{0, k.rows}};
  for (std::size_t i = 0; i < q.rows; ++i) detail::attend_row(q, k, v, i, all, scale, scores, out.row(i));
  return out;
}

inline Matrix dense_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  return dense_attention(q, k, v, default_scale(q.cols));
}

struct SparsePattern {
  std::size_t n = 0;
  std::size_t block = 16;
  std::size_t target_degree = 256;
  std::size_t stride = 1;  // strided connector spacing in blocks; 0 when the pattern is full
  std::vector<std::vector<std::size_t>> allowed;  // per query block, sorted key blocks

  std::size_t num_blocks() const { return (n + block - 1) / block; }
  std::size_t block_size(std::size_t b) const { return std::min(block, n - b * block); }

  std::uint64_t pair_count() const {
    std::uint64_t total = 0;
    for (std::size_t qb = 0; qb < allowed.size(); ++qb) {
      std::uint64_t keys = 0;
      for (std::size_t kb : allowed[qb]) keys += block_size(kb);
      total += keys * block_size(qb);
    }
    return total;
  }

  double average_degree() const {
    return n == 0 ? 0.0 : static_cast<double>(pair_count()) / static_cast<double>(n);
  }

  bool full() const {
    for (const auto& a : allowed)
      if (a.size() != num_blocks()) return false;
    return true;
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> pattern_blocks(std::size_t nb, std::size_t stride) {
  std::vector<std::vector<std::size_t>> allowed(nb);
  for (std::size_t qb = 0; qb < nb; ++qb) {
    std::set<std::size_t> keys;
    if (qb > 0) keys.insert(qb - 1);
    keys.insert(qb);
    if (qb + 1 < nb) keys.insert(qb + 1);
    for (std::size_t kb = 0; kb < nb; kb += stride) keys.insert(kb);
    allowed[qb].assign(keys.begin(), keys.end());
  }
  return allowed;
}

}  // namespace detail

/// Block-local ({self-1, self, self+1}) plus every `s`-th key block from
/// block 0. `s` is the smallest stride whose average degree fits
/// target_degree. target_degree >= n gives the full pattern. When even the
/// sparsest stride exceeds the budget (target below the local floor) the
/// sparsest pattern is returned.
inline SparsePattern make_pattern(std::size_t n, std::size_t block, std::size_t target_degree) {
  if (n == 0) throw argument_error("make_pattern: n must be >= 1");
  if (block == 0) throw argument_error("make_pattern: block must be >= 1");
  SparsePattern p;
  p.n = n;
  p.block = block;
  p.target_degree = target_degree;
  const std::size_t nb = p.num_blocks();
  if (target_degree >= n) {
    p.stride = 0;
    p.allowed.assign(nb, {});
    for (auto& a : p.allowed)
      for (std::size_t kb = 0; kb < nb; ++kb) a.push_back(kb);
    return p;
  }
  for (std::size_t s = 1; s <= nb; ++s) {
    p.stride = s;
    p.allowed = detail::pattern_blocks(nb, s);
    if (p.average_degree() <= static_cast<double>(target_degree)) break;
  }
  return p;
}

inline Matrix block_sparse_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                                     const SparsePattern& pattern, double scale) {
  detail::check_qkv(q, k, v, "block_sparse_attention");
  if (q.rows != pattern.n || k.rows != pattern.n) {
    throw shape_error("block_sparse_attention: pattern built for n=" + std::to_string(pattern.n) +
                      " but q has " + std::to_string(q.rows) + " rows and k has " +
                      std::to_string(k.rows));
  }
  Matrix out(q.rows, v.cols);
  std::vector<double> scores;
  std::vector<detail::Range> ranges;
  for (std::size_t qb = 0; qb < pattern.allowed.size(); ++qb) {
    ranges.clear();
    for (std::size_t kb : pattern.allowed[qb]) {
      ranges.emplace_back(kb * pattern.block, kb * pattern.block + pattern.block_size(kb));
    }
    const std::size_t q_end = qb * pattern.block + pattern.block_size(qb);
    for (std::size_t i = qb * pattern.block; i < q_end; ++i) {
      detail::attend_row(q, k, v, i, ranges, scale, scores, out.row(i));
    }
  }
  return out;
}

/// Key window of query i: [max(0, i - floor(w/2)), min(n-1, i + ceil(w/2) - 1)].
inline detail::Range window_range(std::size_t i, std::size_t n, std::size_t w) {
  const std::size_t left = w / 2;
  const std::size_t right = (w + 1) / 2 - 1;
  const std::size_t begin = i >= left ? i - left : 0;
  const std::size_t end = std::min(n - 1, i + right) + 1;
  return {begin, end};
}

inline Matrix sliding_window_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                                       std::size_t w, double scale) {
  if (w == 0) throw argument_error("sliding_window_attention: w must be >= 1");
  detail::check_qkv(q, k, v, "sliding_window_attention");
  if (q.rows != k.rows) throw shape_error("sliding_window_attention: q and k row counts differ");
  Matrix out(q.rows, v.cols);
  std::vector<double> scores;
  for (std::size_t i = 0; i < q.rows; ++i) {
    const std::array<detail::Range, 1> r = {window_range(i, q.rows, w)};
    detail::attend_row(q, k, v, i, r, scale, scores, out.row(i));
  }
  return out;
}

// Exact (query, key) pair counts evaluated by each operator.

inline std::uint64_t count_interactions_dense(std::size_t n_query, std::size_t n_key) {
  return static_cast<std::uint64_t>(n_query) * n_key;
}

inline std::uint64_t count_interactions(const SparsePattern& pattern) { return pattern.pair_count(); }

inline std::uint64_t count_interactions_window(std::size_t n, std::size_t w) {
  if (w == 0) throw argument_error("count_interactions_window: w must be >= 1");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [b, e] = window_range(i, n, w);
    total += e - b;
  }
  return total;
}

}  // namespace freqformer
