#pragma once

// Objective values and constraint residuals of the permutation formulations.
//
// Constraint residuals are raw traces: every violated pair is counted twice,
// so "= 0" is checked in exact integer arithmetic. Max-Cut halves its trace
// because the halved value is the objective.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "permform/core.hpp"
#include "permform/problem.hpp"
#include "permform/sat.hpp"

namespace permform {

class InfeasibleCandidate : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TspInstance {
  RealMatrix cost;

  std::size_t size() const { return cost.rows(); }

  void validate() const {
    if (!cost.is_square()) throw DimensionError("TSP cost matrix must be square");
    for (std::size_t i = 0; i < cost.rows(); ++i) {
      if (cost(i, i) != 0.0) throw std::invalid_argument("TSP cost matrix needs a zero diagonal");
      for (std::size_t j = 0; j < cost.cols(); ++j)
        if (!(cost(i, j) >= 0.0)) throw std::invalid_argument("TSP costs must be nonnegative");
    }
  }

  friend bool operator==(const TspInstance&, const TspInstance&) = default;
};

struct QapInstance {
  RealMatrix flow;
  RealMatrix dist;

  std::size_t size() const { return flow.rows(); }

  void validate() const {
    if (!flow.is_square() || !dist.is_square() || flow.rows() != dist.rows())
      throw DimensionError("QAP flow and distance matrices must be square and equal-sized");
  }

  friend bool operator==(const QapInstance&, const QapInstance&) = default;
};

struct GraphPair {
  Graph first;
  Graph second;

  friend bool operator==(const GraphPair&, const GraphPair&) = default;
};

using Instance = std::variant<Graph, GraphPair, TspInstance, QapInstance, SatInstance>;

/// Ground-set size a permutation for this instance must have.
inline std::size_t permutation_size(const Instance& inst) {
  struct {
    std::size_t operator()(const Graph& g) const { return g.size(); }
    std::size_t operator()(const GraphPair& g) const { return g.first.size(); }
    std::size_t operator()(const TspInstance& t) const { return t.size(); }
    std::size_t operator()(const QapInstance& q) const { return q.size(); }
    std::size_t operator()(const SatInstance& s) const {
      return 2 * s.num_vars + s.clauses.size();
    }
  } visitor;
  return std::visit(visitor, inst);
}

/// Returns the instance alternative a problem expects, or throws.
template <typename T>
const T& instance_as(const Instance& inst, Problem p) {
  if (const T* v = std::get_if<T>(&inst)) return *v;
  throw std::invalid_argument("instance type does not match problem '" +
                              std::string(to_string(p)) + "'");
}

inline const Graph& graph_of(const Instance& inst, Problem p) { return instance_as<Graph>(inst, p); }

struct CandidateSolution {
  Problem problem = Problem::mis;
  Permutation pi;
  std::optional<std::size_t> k;
  std::optional<std::vector<std::size_t>> blocks;

  friend bool operator==(const CandidateSolution&, const CandidateSolution&) = default;
};

// ---------------------------------------------------------------------------
// TSP and QAP

inline void require_size(std::size_t expected, const Permutation& pi, const char* what) {
  if (pi.size() != expected)
    throw DimensionError(std::string(what) + ": permutation of size " + std::to_string(pi.size()) +
                         " for instance of size " + std::to_string(expected));
}

/// Closed tour length visiting pi(1), pi(2), ..., pi(n).
inline double tsp_length(const TspInstance& inst, const Permutation& pi) {
  const std::size_t n = inst.size();
  require_size(n, pi, "tsp_length");
  if (n < 2) throw OutOfRange("TSP needs at least 2 cities");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += inst.cost(pi[i], pi[i + 1]);
  return s + inst.cost(pi[n - 1], pi[0]);
}

/// The trace form Tr(Q V^T Q^T C) with Q = P^T, the city-by-position matrix.
/// Equals tsp_length for any cost matrix.
inline double tsp_trace_length(const TspInstance& inst, const Permutation& pi) {
  const std::size_t n = inst.size();
  require_size(n, pi, "tsp_trace_length");
  const IntMatrix shifted = relabel(cycle_shift_matrix(n).transpose(), invert(pi));
  return trace_product(shifted.cast<double>(), inst.cost);
}

/// H[i][j] = 1 iff city j immediately follows city i in the tour.
inline IntMatrix tsp_heatmap(const Permutation& pi) {
  return relabel(cycle_shift_matrix(pi.size()), invert(pi));
}

/// Tr(F P D P^T) = sum_ij F[i][j] D[pi(j)][pi(i)].
inline double qap_value(const QapInstance& inst, const Permutation& pi) {
  inst.validate();
  const std::size_t n = inst.size();
  require_size(n, pi, "qap_value");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += inst.flow(i, j) * inst.dist(pi[j], pi[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Vertex-subset problems

inline void require_k(std::size_t k, std::size_t lo, std::size_t hi, const char* what) {
  if (k < lo || k > hi)
    throw OutOfRange(std::string(what) + ": k=" + std::to_string(k) + " outside " +
                     std::to_string(lo) + ".." + std::to_string(hi));
}

/// Tr(P A P^T C(k)) with the prefix block: 2 x edges inside pi(1..k).
inline std::int64_t mis_violation(const Graph& g, const Permutation& pi, std::size_t k) {
  require_size(g.size(), pi, "mis_violation");
  require_k(k, 1, g.size(), "mis_violation");
  return relabelled_trace(g.adjacency(), pi, TruncationSpec::prefix(k));
}

/// 1/2 Tr(P A P^T C(k)) with the cross block: edges cut by (pi(1..k), rest).
inline std::int64_t maxcut_value(const Graph& g, const Permutation& pi, std::size_t k) {
  require_size(g.size(), pi, "maxcut_value");
  if (g.size() < 2) throw OutOfRange("maxcut_value: needs at least 2 vertices");
  require_k(k, 1, g.size() - 1, "maxcut_value");
  return relabelled_trace(g.adjacency(), pi, TruncationSpec::cross(k)) / 2;
}

/// Tr(P A P^T C) with diagonal all-ones blocks: 2 x monochromatic edges.
inline std::int64_t coloring_violation(const Graph& g, const Permutation& pi,
                                       std::span<const std::size_t> blocks) {
  require_size(g.size(), pi, "coloring_violation");
  return relabelled_trace(g.adjacency(), pi,
                          TruncationSpec::diagonal({blocks.begin(), blocks.end()}));
}

/// Tr(P A P^T C(k)) with the suffix block: 2 x edges inside pi(k+1..n).
inline std::int64_t mvc_violation(const Graph& g, const Permutation& pi, std::size_t k) {
  require_size(g.size(), pi, "mvc_violation");
  require_k(k, 0, g.size(), "mvc_violation");
  return relabelled_trace(g.adjacency(), pi, TruncationSpec::suffix(k));
}

/// P (A + I) P^T 1_k: closed-neighbourhood hits of every position inside the
/// first k positions.
inline std::vector<std::int64_t> mds_coverage(const Graph& g, const Permutation& pi,
                                              std::size_t k) {
  require_size(g.size(), pi, "mds_coverage");
  require_k(k, 1, g.size(), "mds_coverage");
  const auto& a = g.adjacency();
  std::vector<std::int64_t> v(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < k; ++j) s += a(pi[i], pi[j]) + (i == j ? 1 : 0);
    v[i] = s;
  }
  return v;
}

/// Number of positions whose coverage is zero.
inline std::int64_t mds_uncovered(const Graph& g, const Permutation& pi, std::size_t k) {
  const auto cov = mds_coverage(g, pi, k);
  return static_cast<std::int64_t>(std::count(cov.begin(), cov.end(), 0));
}

/// Tr(P (J - A - I) P^T C(k)) with the prefix block: 2 x non-edges inside
/// pi(1..k).
inline std::int64_t clique_violation(const Graph& g, const Permutation& pi, std::size_t k) {
  require_size(g.size(), pi, "clique_violation");
  require_k(k, 1, g.size(), "clique_violation");
  const auto& a = g.adjacency();
  return detail::structured_trace<std::int64_t>(
      g.size(), TruncationSpec::prefix(k), [&](std::size_t i, std::size_t j) -> std::int64_t {
        return (i == j) ? 0 : 1 - a(pi[i], pi[j]);
      });
}

/// ||P A1 P^T - A2||_F^2: mismatched adjacency entries.
inline std::int64_t gi_distance(const Graph& g1, const Graph& g2, const Permutation& pi) {
  if (g1.size() != g2.size()) throw DimensionError("gi_distance: graphs differ in size");
  require_size(g1.size(), pi, "gi_distance");
  const auto& a1 = g1.adjacency();
  const auto& a2 = g2.adjacency();
  std::int64_t s = 0;
  for (std::size_t i = 0; i < g1.size(); ++i)
    for (std::size_t j = 0; j < g1.size(); ++j) {
      const std::int64_t d = a1(pi[i], pi[j]) - a2(i, j);
      s += d * d;
    }
  return s;
}

// ---------------------------------------------------------------------------
// Candidate evaluation

struct Evaluation {
  double objective = 0.0;
  /// Exact constraint residual; zero iff feasible (GI: the distance itself).
  std::int64_t violation = 0;
  bool feasible = false;
};

inline void require_candidate_shape(const CandidateSolution& c, std::size_t n) {
  require_size(n, c.pi, "candidate");
  if (uses_k(c.problem) && !c.k)
    throw std::invalid_argument(std::string(to_string(c.problem)) + " candidate needs k");
  if (c.problem == Problem::coloring && !c.blocks)
    throw std::invalid_argument("coloring candidate needs a block composition");
}

/// Exact re-evaluation of a candidate against its instance.
inline Evaluation evaluate(const Instance& inst, const CandidateSolution& c) {
  require_candidate_shape(c, permutation_size(inst));
  Evaluation e;
  switch (c.problem) {
    case Problem::tsp:
      e.objective = tsp_length(instance_as<TspInstance>(inst, c.problem), c.pi);
      e.feasible = true;
      break;
    case Problem::qap:
      e.objective = qap_value(instance_as<QapInstance>(inst, c.problem), c.pi);
      e.feasible = true;
      break;
    case Problem::mis:
      e.violation = mis_violation(graph_of(inst, c.problem), c.pi, *c.k);
      e.objective = static_cast<double>(*c.k);
      break;
    case Problem::clique:
      e.violation = clique_violation(graph_of(inst, c.problem), c.pi, *c.k);
      e.objective = static_cast<double>(*c.k);
      break;
    case Problem::mvc:
      e.violation = mvc_violation(graph_of(inst, c.problem), c.pi, *c.k);
      e.objective = static_cast<double>(*c.k);
      break;
    case Problem::mds:
      e.violation = mds_uncovered(graph_of(inst, c.problem), c.pi, *c.k);
      e.objective = static_cast<double>(*c.k);
      break;
    case Problem::maxcut:
      e.objective = static_cast<double>(maxcut_value(graph_of(inst, c.problem), c.pi, *c.k));
      break;
    case Problem::coloring:
      e.violation = coloring_violation(graph_of(inst, c.problem), c.pi, *c.blocks);
      e.objective = static_cast<double>(c.blocks->size());
      break;
    case Problem::gi: {
      const auto& pair = instance_as<GraphPair>(inst, c.problem);
      e.violation = gi_distance(pair.first, pair.second, c.pi);
      e.objective = static_cast<double>(e.violation);
      break;
    }
    case Problem::sat: {
      const auto enc = sat_encode(instance_as<SatInstance>(inst, c.problem));
      const auto check = sat_check(enc, c.pi);
      e.violation = check.complementarity + static_cast<std::int64_t>(check.unsatisfied_clauses());
      e.objective = check.feasible() ? 1.0 : 0.0;
      break;
    }
  }
  if (c.problem != Problem::tsp && c.problem != Problem::qap) e.feasible = e.violation == 0;
  return e;
}

/// Objective to be minimized with the penalty term added: the quantity the
/// relaxation reproduces exactly at permutation matrices.
inline double penalized_objective(const Instance& inst, const CandidateSolution& c, double lambda) {
  const Evaluation e = evaluate(inst, c);
  switch (c.problem) {
    case Problem::mis:
    case Problem::clique: return -e.objective + lambda * static_cast<double>(e.violation);
    case Problem::mvc: return e.objective + lambda * static_cast<double>(e.violation);
    case Problem::maxcut: return -e.objective;
    default: return e.objective;
  }
}

// ---------------------------------------------------------------------------
// Discrete solution extraction

struct VertexSet {
  std::vector<int> vertices;  // 1-based, sorted
  friend bool operator==(const VertexSet&, const VertexSet&) = default;
};

struct Bipartition {
  std::vector<int> side;  // 1-based, sorted
  std::vector<int> rest;
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

struct ColorClasses {
  std::vector<std::vector<int>> classes;  // each 1-based, sorted
  friend bool operator==(const ColorClasses&, const ColorClasses&) = default;
};

struct Tour {
  std::vector<int> cities;  // visiting order, 1-based
  friend bool operator==(const Tour&, const Tour&) = default;
};

/// mapping[i] = image in the second graph of vertex i+1 of the first graph
/// (QAP: location of facility i+1).
struct VertexMapping {
  std::vector<int> mapping;
  friend bool operator==(const VertexMapping&, const VertexMapping&) = default;
};

using DiscreteSolution =
    std::variant<VertexSet, Bipartition, ColorClasses, Tour, VertexMapping, SatAssignment>;

namespace detail {

inline std::vector<int> sorted_labels(const Permutation& pi, std::size_t from, std::size_t to) {
  std::vector<int> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(static_cast<int>(pi[i] + 1));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Throws InfeasibleCandidate for a candidate that fails its constraints.
inline DiscreteSolution extract_solution(const Instance& inst, const CandidateSolution& c) {
  const Evaluation e = evaluate(inst, c);
  if (!e.feasible)
    throw InfeasibleCandidate(std::string(to_string(c.problem)) +
                              " candidate violates its constraint (residual " +
                              std::to_string(e.violation) + ")");
  const std::size_t n = c.pi.size();
  switch (c.problem) {
    case Problem::mis:
    case Problem::clique:
    case Problem::mvc:
    case Problem::mds: return VertexSet{detail::sorted_labels(c.pi, 0, *c.k)};
    case Problem::maxcut:
      return Bipartition{detail::sorted_labels(c.pi, 0, *c.k), detail::sorted_labels(c.pi, *c.k, n)};
    case Problem::coloring: {
      ColorClasses out;
      std::size_t start = 0;
      for (std::size_t b : *c.blocks) {
        out.classes.push_back(detail::sorted_labels(c.pi, start, start + b));
        start += b;
      }
      return out;
    }
    case Problem::tsp: return Tour{c.pi.one_based()};
    case Problem::qap: return VertexMapping{c.pi.one_based()};
    case Problem::gi: {
      // relabel(A1, pi) = A2 maps vertex pi(i) of the first graph to vertex i.
      const auto inv = invert(c.pi);
      return VertexMapping{inv.one_based()};
    }
    case Problem::sat:
      return sat_assignment(sat_encode(instance_as<SatInstance>(inst, c.problem)), c.pi);
  }
  throw std::logic_error("unreachable");
}

}  // namespace permform
