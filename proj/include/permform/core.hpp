#pragma once

// Permutations, graphs, and the structured truncation matrices C(k) that every
// permutation formulation is built from.
//
// Convention: P[i][j] = 1 iff pi(i) = j, so relabel(A, pi)[i][j] =
// A[pi(i)][pi(j)] = (P A P^T)[i][j]. Vertex labels are 1-based at every
// external boundary; storage is 0-based.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "permform/matrix.hpp"

namespace permform {

class InvalidPermutation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidGraph : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for k values or block compositions outside a formulation's domain.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A bijection on {1..n}.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.image_.resize(n);
    std::iota(p.image_.begin(), p.image_.end(), std::size_t{0});
    return p;
  }

  /// Builds from 1-based images; throws InvalidPermutation unless the input
  /// is a bijection on {1..n}.
  static Permutation from_one_based(std::span<const int> images) {
    const std::size_t n = images.size();
    std::vector<std::size_t> zero_based(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (images[i] < 1 || static_cast<std::size_t>(images[i]) > n)
        throw InvalidPermutation("permutation entry " + std::to_string(images[i]) +
                                 " outside 1.." + std::to_string(n));
      zero_based[i] = static_cast<std::size_t>(images[i] - 1);
    }
    return from_zero_based(std::move(zero_based));
  }

  static Permutation from_one_based(std::initializer_list<int> images) {
    std::vector<int> v(images);
    return from_one_based(std::span<const int>(v));
  }

  static Permutation from_zero_based(std::vector<std::size_t> images) {
    std::vector<bool> seen(images.size(), false);
    for (std::size_t v : images) {
      if (v >= images.size() || seen[v])
        throw InvalidPermutation("not a bijection on 1.." + std::to_string(images.size()));
      seen[v] = true;
    }
    Permutation p;
    p.image_ = std::move(images);
    return p;
  }

  std::size_t size() const noexcept { return image_.size(); }

  /// 0-based image of 0-based position i.
  std::size_t operator[](std::size_t i) const { return image_[i]; }

  const std::vector<std::size_t>& zero_based() const noexcept { return image_; }

  std::vector<int> one_based() const {
    std::vector<int> out(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) out[i] = static_cast<int>(image_[i] + 1);
    return out;
  }

  Permutation inverse() const {
    std::vector<std::size_t> inv(image_.size());
    for (std::size_t i = 0; i < image_.size(); ++i) inv[image_[i]] = i;
    Permutation p;
    p.image_ = std::move(inv);
    return p;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < image_.size(); ++i)
      if (image_[i] != i) return false;
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> image_;
};

inline Permutation invert(const Permutation& p) { return p.inverse(); }

/// (outer o inner)(i) = outer(inner(i)).
inline Permutation compose(const Permutation& outer, const Permutation& inner) {
  if (outer.size() != inner.size()) throw DimensionError("compose: size mismatch");
  std::vector<std::size_t> img(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) img[i] = outer[inner[i]];
  return Permutation::from_zero_based(std::move(img));
}

/// Undirected simple graph stored as a dense 0/1 adjacency matrix.
class Graph {
 public:
  Graph() = default;

  explicit Graph(IntMatrix adjacency) : adj_(std::move(adjacency)) {
    if (!adj_.is_square()) throw InvalidGraph("adjacency matrix must be square");
    for (std::size_t i = 0; i < adj_.rows(); ++i) {
      if (adj_(i, i) != 0) throw InvalidGraph("self-loop at vertex " + std::to_string(i + 1));
      for (std::size_t j = 0; j < adj_.cols(); ++j) {
        const auto v = adj_(i, j);
        if (v != 0 && v != 1) throw InvalidGraph("adjacency entries must be 0/1");
        if (v != adj_(j, i)) throw InvalidGraph("adjacency matrix must be symmetric");
      }
    }
  }

  explicit Graph(std::size_t n) : adj_(n, n) {}

  /// Edges use 1-based endpoints; duplicates collapse.
  static Graph from_edges(std::size_t n, std::span<const std::pair<int, int>> edges) {
    IntMatrix a(n, n);
    for (const auto& [u, v] : edges) {
      if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n || static_cast<std::size_t>(v) > n)
        throw InvalidGraph("edge endpoint outside 1.." + std::to_string(n));
      if (u == v) throw InvalidGraph("self-loop at vertex " + std::to_string(u));
      a(u - 1, v - 1) = 1;
      a(v - 1, u - 1) = 1;
    }
    Graph g;
    g.adj_ = std::move(a);
    return g;
  }

  static Graph from_edges(std::size_t n, std::initializer_list<std::pair<int, int>> edges) {
    std::vector<std::pair<int, int>> v(edges);
    return from_edges(n, std::span<const std::pair<int, int>>(v));
  }

  std::size_t size() const noexcept { return adj_.rows(); }
  const IntMatrix& adjacency() const noexcept { return adj_; }

  /// 0-based vertex indices.
  bool has_edge(std::size_t u, std::size_t v) const { return adj_(u, v) != 0; }

  std::size_t edge_count() const { return static_cast<std::size_t>(adj_.sum() / 2); }

  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (std::size_t j = 0; j < size(); ++j) d += static_cast<std::size_t>(adj_(v, j));
    return d;
  }

  /// Sorted 1-based edge list with u < v.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (adj_(i, j)) out.emplace_back(static_cast<int>(i + 1), static_cast<int>(j + 1));
    return out;
  }

  Graph complement() const {
    IntMatrix c(size(), size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (i != j) c(i, j) = 1 - adj_(i, j);
    Graph g;
    g.adj_ = std::move(c);
    return g;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  IntMatrix adj_;
};

/// Which C(k) a formulation uses.
enum class TruncationKind { prefix_block, cross_block, suffix_block, diagonal_blocks };

struct TruncationSpec {
  TruncationKind kind = TruncationKind::prefix_block;
  std::size_t k = 0;
  std::vector<std::size_t> blocks;

  static TruncationSpec prefix(std::size_t k) { return {TruncationKind::prefix_block, k, {}}; }
  static TruncationSpec cross(std::size_t k) { return {TruncationKind::cross_block, k, {}}; }
  static TruncationSpec suffix(std::size_t k) { return {TruncationKind::suffix_block, k, {}}; }
  static TruncationSpec diagonal(std::vector<std::size_t> blocks) {
    const std::size_t k = blocks.size();
    return {TruncationKind::diagonal_blocks, k, std::move(blocks)};
  }

  /// Throws OutOfRange unless the spec is valid for ground size n.
  void validate(std::size_t n) const {
    switch (kind) {
      case TruncationKind::prefix_block:
        if (k < 1 || k > n)
          throw OutOfRange("prefix block needs 1 <= k <= n (k=" + std::to_string(k) + ")");
        break;
      case TruncationKind::cross_block:
        if (k < 1 || k >= n)
          throw OutOfRange("cross block needs 1 <= k < n (k=" + std::to_string(k) + ")");
        break;
      case TruncationKind::suffix_block:
        // k = 0 selects the whole matrix; needed for edgeless vertex covers.
        if (k > n) throw OutOfRange("suffix block needs 0 <= k <= n (k=" + std::to_string(k) + ")");
        break;
      case TruncationKind::diagonal_blocks: {
        if (blocks.empty()) throw OutOfRange("diagonal blocks need at least one block");
        std::size_t total = 0;
        for (std::size_t b : blocks) {
          if (b == 0) throw OutOfRange("diagonal blocks must be nonempty");
          total += b;
        }
        if (total != n)
          throw OutOfRange("block sizes sum to " + std::to_string(total) + ", expected " +
                           std::to_string(n));
        break;
      }
    }
  }
};

/// Block index of every position for a composition (n_1, ..., n_k).
inline std::vector<std::size_t> block_labels(std::span<const std::size_t> blocks) {
  std::vector<std::size_t> labels;
  for (std::size_t b = 0; b < blocks.size(); ++b) labels.insert(labels.end(), blocks[b], b);
  return labels;
}

inline IntMatrix perm_matrix(const Permutation& pi) {
  IntMatrix p(pi.size(), pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) p(i, pi[i]) = 1;
  return p;
}

/// M[i][j] = A[pi(i)][pi(j)], i.e. P A P^T.
template <typename T>
Matrix<T> relabel(const Matrix<T>& a, const Permutation& pi) {
  if (!a.is_square() || a.rows() != pi.size())
    throw DimensionError("relabel: matrix " + a.shape() + " vs permutation of size " +
                         std::to_string(pi.size()));
  const std::size_t n = pi.size();
  Matrix<T> out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* src = a.row(pi[i]);
    T* dst = out.row(i);
    for (std::size_t j = 0; j < n; ++j) dst[j] = src[pi[j]];
  }
  return out;
}

inline IntMatrix truncation_matrix(const TruncationSpec& spec, std::size_t n) {
  spec.validate(n);
  IntMatrix c(n, n);
  const std::size_t k = spec.k;
  switch (spec.kind) {
    case TruncationKind::prefix_block:
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) c(i, j) = 1;
      break;
    case TruncationKind::cross_block:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if ((i < k && k <= j) || (j < k && k <= i)) c(i, j) = 1;
      break;
    case TruncationKind::suffix_block:
      for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = k; j < n; ++j) c(i, j) = 1;
      break;
    case TruncationKind::diagonal_blocks: {
      const auto labels = block_labels(spec.blocks);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (labels[i] == labels[j]) c(i, j) = 1;
      break;
    }
  }
  return c;
}

/// Dense Tr(M C) = sum_ij M[i][j] C[j][i].
template <typename T>
T trace_product(const Matrix<T>& m, const Matrix<T>& c) {
  if (!m.is_square() || m.rows() != c.rows() || m.cols() != c.cols())
    throw DimensionError("trace_product: " + m.shape() + " vs " + c.shape());
  T s{};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * c(j, i);
  return s;
}

namespace detail {

// Block sum of Tr(X C) where X[i][j] = entry(i, j), without forming C.
template <typename T, typename Entry>
T structured_trace(std::size_t n, const TruncationSpec& spec, Entry&& entry) {
  spec.validate(n);
  const std::size_t k = spec.k;
  T s{};
  switch (spec.kind) {
    case TruncationKind::prefix_block:
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) s += entry(i, j);
      break;
    case TruncationKind::suffix_block:
      for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = k; j < n; ++j) s += entry(i, j);
      break;
    case TruncationKind::cross_block:
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = k; j < n; ++j) s += entry(i, j) + entry(j, i);
      break;
    case TruncationKind::diagonal_blocks: {
      std::size_t start = 0;
      for (std::size_t b : spec.blocks) {
        for (std::size_t i = start; i < start + b; ++i)
          for (std::size_t j = start; j < start + b; ++j) s += entry(i, j);
        start += b;
      }
      break;
    }
  }
  return s;
}

}  // namespace detail

/// Tr(M C(spec)) computed as a block sum; C is never materialized.
template <typename T>
T trace_product(const Matrix<T>& m, const TruncationSpec& spec) {
  if (!m.is_square()) throw DimensionError("trace_product: matrix must be square");
  return detail::structured_trace<T>(m.rows(), spec,
                                     [&](std::size_t i, std::size_t j) { return m(i, j); });
}

/// Tr(P A P^T C(spec)) read directly from A through pi.
template <typename T>
T relabelled_trace(const Matrix<T>& a, const Permutation& pi, const TruncationSpec& spec) {
  if (!a.is_square() || a.rows() != pi.size())
    throw DimensionError("relabelled_trace: matrix " + a.shape() + " vs permutation of size " +
                         std::to_string(pi.size()));
  return detail::structured_trace<T>(
      pi.size(), spec, [&](std::size_t i, std::size_t j) { return a(pi[i], pi[j]); });
}

/// The cyclic successor matrix: V[i][j] = 1 iff j = (i mod n) + 1.
inline IntMatrix cycle_shift_matrix(std::size_t n) {
  if (n < 2) throw OutOfRange("cycle shift matrix needs n >= 2");
  IntMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, (i + 1) % n) = 1;
  return v;
}

}  // namespace permform
