#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "permform/core.hpp"
#include "permform/matrix.hpp"

namespace permform {

/// A nonnegative matrix whose row and column sums are within `residual` of 1.
struct DoublyStochastic {
  RealMatrix entries;
  /// max over rows and columns of |sum - 1|.
  double residual = 0.0;
  std::size_t iterations = 0;

  std::size_t size() const { return entries.rows(); }
};

inline double doubly_stochastic_residual(const RealMatrix& m) {
  const std::size_t n = m.rows();
  double worst = 0.0;
  std::vector<double> col(m.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row += m(i, j);
      col[j] += m(i, j);
    }
    worst = std::max(worst, std::abs(row - 1.0));
  }
  for (double c : col) worst = std::max(worst, std::abs(c - 1.0));
  return worst;
}

/// Alternating row/column normalization. Stops once the residual is <= tol
/// or after `iters` sweeps. Entries must be strictly positive.
inline DoublyStochastic sinkhorn_normalize(RealMatrix m, std::size_t iters, double tol) {
  if (!m.is_square()) throw DimensionError("sinkhorn_normalize: matrix must be square");
  for (double v : m.data())
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("sinkhorn_normalize: entries must be finite and positive");
  const std::size_t n = m.rows();
  DoublyStochastic out;
  std::vector<double> col(n);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double* r = m.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += r[j];
      for (std::size_t j = 0; j < n; ++j) r[j] /= s;
    }
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) col[j] += m(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) /= col[j];
    out.iterations = it + 1;
    out.residual = doubly_stochastic_residual(m);
    if (out.residual <= tol) break;
  }
  out.entries = std::move(m);
  return out;
}

/// Maximum-weight perfect assignment (Hungarian method with potentials,
/// O(n^3)). Rows are processed in order and the cheapest free column wins
/// ties by lowest index, so a uniform matrix yields the identity.
inline Permutation max_weight_assignment(const RealMatrix& w) {
  if (!w.is_square()) throw DimensionError("assignment: weight matrix must be square");
  const std::size_t n = w.rows();
  if (n == 0) return Permutation::identity(0);
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w(r - 1, j - 1) - u[r] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> img(n);
  for (std::size_t j = 1; j <= n; ++j) img[match[j] - 1] = j - 1;
  return Permutation::from_zero_based(std::move(img));
}

inline Permutation round_to_permutation(const DoublyStochastic& s) {
  return max_weight_assignment(s.entries);
}

}  // namespace permform
