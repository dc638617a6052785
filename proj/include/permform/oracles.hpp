#pragma once

// Brute-force combinatorial oracles. Each works on the plain combinatorial
// definition (bitmask subsets, direct clause evaluation, explicit tours) and
// shares no code path with the trace formulations, so agreement between the
// two certifies the formulations on small instances.
//
// All enumerations are deterministic and return the lexicographically
// smallest optimal witness.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "permform/core.hpp"
#include "permform/formulations.hpp"
#include "permform/problem.hpp"
#include "permform/sat.hpp"

namespace permform {

class InstanceTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct OracleLimits {
  /// Vertex or variable count for 2^n enumerations.
  std::size_t subset = 20;
  /// City/facility/vertex count for n! enumerations of TSP, QAP and GI.
  std::size_t permutation = 10;
  /// Ground size for the (pi, k) formulation search.
  std::size_t formulation = 8;

  /// Defaults, with PERMFORM_ORACLE_LIMIT overriding the subset limit.
  static OracleLimits from_environment() {
    OracleLimits lim;
    if (const char* env = std::getenv("PERMFORM_ORACLE_LIMIT")) {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) lim.subset = std::min<unsigned long>(v, 62);
    }
    return lim;
  }
};

struct OracleResult {
  Problem problem = Problem::mis;
  /// Size, cut value, chromatic number, tour length, QAP value, GI distance,
  /// or 1/0 satisfiability.
  double optimum = 0.0;
  std::optional<DiscreteSolution> witness;
  /// The witness as a formulation candidate (absent for unsatisfiable SAT).
  std::optional<CandidateSolution> candidate;
  /// Every model, when brute_sat was asked to collect them.
  std::vector<SatAssignment> models;
};

namespace detail {

inline void check_limit(std::size_t n, std::size_t limit, const char* what) {
  if (n > limit)
    throw InstanceTooLarge(std::string(what) + ": instance size " + std::to_string(n) +
                           " exceeds oracle limit " + std::to_string(limit));
}

using Mask = std::uint64_t;

inline std::vector<Mask> neighbour_masks(const Graph& g) {
  std::vector<Mask> nbr(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.has_edge(i, j)) nbr[i] |= Mask{1} << j;
  return nbr;
}

inline std::vector<int> mask_vertices(Mask s) {
  std::vector<int> out;
  for (int v = 0; s; ++v, s >>= 1)
    if (s & 1) out.push_back(v + 1);
  return out;
}

inline bool lex_less(Mask a, Mask b) {
  const auto va = mask_vertices(a);
  const auto vb = mask_vertices(b);
  return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
}

/// Members first (ascending), then the rest (ascending).
inline Permutation set_first_permutation(std::size_t n, const std::vector<int>& members) {
  std::vector<bool> in(n, false);
  std::vector<std::size_t> img;
  for (int v : members) {
    in[static_cast<std::size_t>(v - 1)] = true;
    img.push_back(static_cast<std::size_t>(v - 1));
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!in[v]) img.push_back(v);
  return Permutation::from_zero_based(std::move(img));
}

inline bool better(double candidate, double best, bool maximize) {
  if (!std::isfinite(best)) return maximize ? candidate > best : candidate < best;
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  return maximize ? candidate > best + tol : candidate < best - tol;
}

}  // namespace detail

/// Converts an oracle witness into the (pi, k, blocks) candidate that the
/// formulation proofs construct from it.
inline CandidateSolution candidate_from_witness(Problem p, const Instance& inst,
                                                const DiscreteSolution& w) {
  const std::size_t n = permutation_size(inst);
  CandidateSolution c;
  c.problem = p;
  if (const auto* s = std::get_if<VertexSet>(&w)) {
    c.pi = detail::set_first_permutation(n, s->vertices);
    c.k = s->vertices.size();
  } else if (const auto* b = std::get_if<Bipartition>(&w)) {
    c.pi = detail::set_first_permutation(n, b->side);
    c.k = b->side.size();
  } else if (const auto* cc = std::get_if<ColorClasses>(&w)) {
    std::vector<std::size_t> img;
    std::vector<std::size_t> blocks;
    for (const auto& cls : cc->classes) {
      for (int v : cls) img.push_back(static_cast<std::size_t>(v - 1));
      blocks.push_back(cls.size());
    }
    c.pi = Permutation::from_zero_based(std::move(img));
    c.blocks = std::move(blocks);
  } else if (const auto* t = std::get_if<Tour>(&w)) {
    c.pi = Permutation::from_one_based(std::span<const int>(t->cities));
  } else if (const auto* m = std::get_if<VertexMapping>(&w)) {
    auto f = Permutation::from_one_based(std::span<const int>(m->mapping));
    c.pi = p == Problem::gi ? invert(f) : f;
  } else if (const auto* a = std::get_if<SatAssignment>(&w)) {
    c.pi = sat_permutation(sat_encode(instance_as<SatInstance>(inst, p)), *a);
  }
  return c;
}

/// Exact MIS / MVC / MDS / Clique by enumerating all 2^n vertex subsets.
inline OracleResult brute_subset(Problem problem, const Graph& g,
                                 const OracleLimits& limits = OracleLimits::from_environment()) {
  if (problem != Problem::mis && problem != Problem::mvc && problem != Problem::mds &&
      problem != Problem::clique)
    throw std::invalid_argument("brute_subset: not a subset problem");
  const std::size_t n = g.size();
  detail::check_limit(n, std::min<std::size_t>(limits.subset, 62), "brute_subset");
  if (n == 0) throw OutOfRange("brute_subset: empty graph");
  const auto nbr = detail::neighbour_masks(g);
  const detail::Mask full = (detail::Mask{1} << n) - 1;
  const bool maximize = problem == Problem::mis || problem == Problem::clique;

  auto independent = [&](detail::Mask s) {
    for (std::size_t v = 0; v < n; ++v)
      if ((s >> v & 1) && (nbr[v] & s)) return false;
    return true;
  };
  auto admissible = [&](detail::Mask s) {
    switch (problem) {
      case Problem::mis: return independent(s);
      case Problem::mvc: return independent(full & ~s);
      case Problem::clique:
        for (std::size_t v = 0; v < n; ++v)
          if ((s >> v & 1) && ((nbr[v] | detail::Mask{1} << v) & s) != s) return false;
        return true;
      default:  // mds
        for (std::size_t v = 0; v < n; ++v)
          if (((nbr[v] | detail::Mask{1} << v) & s) == 0) return false;
        return true;
    }
  };

  std::optional<detail::Mask> best;
  int best_size = 0;
  for (detail::Mask s = 0; s <= full; ++s) {
    // MIS/clique/MDS witnesses are nonempty in the (pi, k >= 1) formulations.
    if (s == 0 && problem != Problem::mvc) continue;
    if (!admissible(s)) continue;
    const int size = std::popcount(s);
    const bool improves = !best || (maximize ? size > best_size : size < best_size);
    if (improves || (size == best_size && detail::lex_less(s, *best))) {
      best = s;
      best_size = size;
    }
  }
  OracleResult r;
  r.problem = problem;
  r.optimum = best_size;
  r.witness = VertexSet{detail::mask_vertices(*best)};
  r.candidate = candidate_from_witness(problem, g, *r.witness);
  return r;
}

/// Exact maximum cut over all bipartitions (S containing vertex 1, S != V).
inline OracleResult brute_maxcut(const Graph& g,
                                 const OracleLimits& limits = OracleLimits::from_environment()) {
  const std::size_t n = g.size();
  detail::check_limit(n, std::min<std::size_t>(limits.subset, 62), "brute_maxcut");
  if (n < 2) throw OutOfRange("brute_maxcut: needs at least 2 vertices");
  const auto nbr = detail::neighbour_masks(g);
  const detail::Mask full = (detail::Mask{1} << n) - 1;
  detail::Mask best = 1;
  int best_cut = -1;
  for (detail::Mask s = 1; s < full; s += 2) {
    int cut = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (s >> v & 1) cut += std::popcount(nbr[v] & ~s & full);
    if (cut > best_cut || (cut == best_cut && detail::lex_less(s, best))) {
      best_cut = cut;
      best = s;
    }
  }
  OracleResult r;
  r.problem = Problem::maxcut;
  r.optimum = best_cut;
  r.witness = Bipartition{detail::mask_vertices(best), detail::mask_vertices(full & ~best)};
  r.candidate = candidate_from_witness(Problem::maxcut, g, *r.witness);
  return r;
}

/// Chromatic number by backtracking over colour vectors in lexicographic
/// order (vertex v may open at most colour max_used + 1).
inline OracleResult brute_chromatic(const Graph& g,
                                    const OracleLimits& limits = OracleLimits::from_environment()) {
  const std::size_t n = g.size();
  detail::check_limit(n, limits.subset, "brute_chromatic");
  if (n == 0) throw OutOfRange("brute_chromatic: empty graph");
  std::vector<int> colour(n, -1);

  // Returns true once a proper colouring with < k colours is completed.
  auto search = [&](auto&& self, std::size_t v, int used, int k) -> bool {
    if (v == n) return true;
    for (int c = 0; c < std::min(k, used + 1); ++c) {
      bool ok = true;
      for (std::size_t u = 0; u < v; ++u)
        if (g.has_edge(u, v) && colour[u] == c) {
          ok = false;
          break;
        }
      if (!ok) continue;
      colour[v] = c;
      if (self(self, v + 1, std::max(used, c + 1), k)) return true;
    }
    colour[v] = -1;
    return false;
  };

  int k = 1;
  while (!search(search, 0, 0, k)) ++k;

  ColorClasses classes;
  classes.classes.resize(static_cast<std::size_t>(k));
  for (std::size_t v = 0; v < n; ++v)
    classes.classes[static_cast<std::size_t>(colour[v])].push_back(static_cast<int>(v + 1));
  OracleResult r;
  r.problem = Problem::coloring;
  r.optimum = k;
  r.witness = classes;
  r.candidate = candidate_from_witness(Problem::coloring, g, *r.witness);
  return r;
}

/// Shortest closed tour over all (n-1)! orders starting at city 1.
inline OracleResult brute_tsp(const TspInstance& inst,
                              const OracleLimits& limits = OracleLimits::from_environment()) {
  inst.validate();
  const std::size_t n = inst.size();
  detail::check_limit(n, limits.permutation, "brute_tsp");
  if (n < 2) throw OutOfRange("brute_tsp: needs at least 2 cities");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> best_order = order;
  double best = std::numeric_limits<double>::infinity();
  do {
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += inst.cost(order[i], order[(i + 1) % n]);
    if (detail::better(len, best, false)) {
      best = len;
      best_order = order;
    }
  } while (std::next_permutation(order.begin() + 1, order.end()));
  OracleResult r;
  r.problem = Problem::tsp;
  r.optimum = best;
  Tour t;
  for (std::size_t c : best_order) t.cities.push_back(static_cast<int>(c + 1));
  r.witness = t;
  r.candidate = candidate_from_witness(Problem::tsp, inst, *r.witness);
  return r;
}

/// Minimum of sum_ij flow[i][j] * dist[p(j)][p(i)] over all n! assignments.
inline OracleResult brute_qap(const QapInstance& inst,
                              const OracleLimits& limits = OracleLimits::from_environment()) {
  inst.validate();
  const std::size_t n = inst.size();
  detail::check_limit(n, limits.permutation, "brute_qap");
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<std::size_t> best_p = p;
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v += inst.flow(i, j) * inst.dist(p[j], p[i]);
    if (detail::better(v, best, false)) {
      best = v;
      best_p = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  OracleResult r;
  r.problem = Problem::qap;
  r.optimum = best;
  VertexMapping m;
  for (std::size_t v : best_p) m.mapping.push_back(static_cast<int>(v + 1));
  r.witness = m;
  r.candidate = candidate_from_witness(Problem::qap, inst, *r.witness);
  return r;
}

/// Fewest mismatched adjacencies over all bijections f: V1 -> V2, counted
/// on edge lists (each mismatched unordered pair counts twice). 0 iff
/// isomorphic.
inline OracleResult brute_gi(const GraphPair& graphs,
                             const OracleLimits& limits = OracleLimits::from_environment()) {
  const Graph& g1 = graphs.first;
  const Graph& g2 = graphs.second;
  if (g1.size() != g2.size()) throw DimensionError("brute_gi: graphs differ in size");
  const std::size_t n = g1.size();
  detail::check_limit(n, limits.permutation, "brute_gi");
  const auto e1 = g1.edges();
  const auto e2 = g2.edges();
  std::vector<std::size_t> f(n);
  std::iota(f.begin(), f.end(), std::size_t{0});
  std::vector<std::size_t> best_f = f;
  long best = std::numeric_limits<long>::max();
  do {
    long preserved = 0;
    for (const auto& [u, v] : e1)
      if (g2.has_edge(f[static_cast<std::size_t>(u - 1)], f[static_cast<std::size_t>(v - 1)]))
        ++preserved;
    const long mismatched = static_cast<long>(e1.size() + e2.size()) - 2 * preserved;
    if (2 * mismatched < best) {
      best = 2 * mismatched;
      best_f = f;
    }
  } while (best > 0 && std::next_permutation(f.begin(), f.end()));
  OracleResult r;
  r.problem = Problem::gi;
  r.optimum = static_cast<double>(best);
  VertexMapping m;
  for (std::size_t v : best_f) m.mapping.push_back(static_cast<int>(v + 1));
  r.witness = m;
  r.candidate = candidate_from_witness(Problem::gi, graphs, *r.witness);
  return r;
}

/// Satisfiability by direct evaluation of all 2^n assignments, enumerated in
/// lexicographic order of (x1, ..., xn) with false < true.
inline OracleResult brute_sat(const SatInstance& inst, bool collect_models = false,
                              const OracleLimits& limits = OracleLimits::from_environment()) {
  inst.validate();
  const std::size_t n = inst.num_vars;
  detail::check_limit(n, std::min<std::size_t>(limits.subset, 62), "brute_sat");
  OracleResult r;
  r.problem = Problem::sat;
  const detail::Mask count = detail::Mask{1} << n;
  SatAssignment alpha;
  alpha.values.assign(n, false);
  for (detail::Mask bits = 0; bits < count; ++bits) {
    for (std::size_t v = 0; v < n; ++v) alpha.values[v] = (bits >> (n - 1 - v)) & 1;
    bool all = true;
    for (const auto& clause : inst.clauses) {
      bool any = false;
      for (int lit : clause)
        if (alpha.values[static_cast<std::size_t>(std::abs(lit) - 1)] == (lit > 0)) {
          any = true;
          break;
        }
      if (!any) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    if (!r.witness) {
      r.optimum = 1.0;
      r.witness = alpha;
      r.candidate = candidate_from_witness(Problem::sat, inst, alpha);
    }
    if (!collect_models) break;
    r.models.push_back(alpha);
  }
  return r;
}

/// Dispatches to the brute-force oracle for a problem.
inline OracleResult brute_oracle(Problem p, const Instance& inst,
                                 const OracleLimits& limits = OracleLimits::from_environment()) {
  switch (p) {
    case Problem::mis:
    case Problem::mvc:
    case Problem::mds:
    case Problem::clique: return brute_subset(p, graph_of(inst, p), limits);
    case Problem::maxcut: return brute_maxcut(graph_of(inst, p), limits);
    case Problem::coloring: return brute_chromatic(graph_of(inst, p), limits);
    case Problem::tsp: return brute_tsp(instance_as<TspInstance>(inst, p), limits);
    case Problem::qap: return brute_qap(instance_as<QapInstance>(inst, p), limits);
    case Problem::gi: return brute_gi(instance_as<GraphPair>(inst, p), limits);
    case Problem::sat: return brute_sat(instance_as<SatInstance>(inst, p), false, limits);
  }
  throw std::logic_error("unreachable");
}

/// Optimizes the formulation objective over every permutation (lexicographic
/// successor order) and every valid k or block composition. Must agree with
/// the brute-force oracle.
inline OracleResult formulation_search(Problem p, const Instance& inst,
                                       const OracleLimits& limits = OracleLimits::from_environment()) {
  const std::size_t N = permutation_size(inst);
  // SAT permutes only the 2n literal positions.
  const std::size_t free =
      p == Problem::sat ? 2 * instance_as<SatInstance>(inst, p).num_vars : N;
  detail::check_limit(free, limits.formulation, "formulation_search");
  if (N == 0) throw OutOfRange("formulation_search: empty instance");

  std::vector<std::size_t> img(N);
  std::iota(img.begin(), img.end(), std::size_t{0});
  const bool maximize = is_maximization(p);
  std::optional<CandidateSolution> best;
  double best_value = 0.0;

  auto offer = [&](const Permutation& pi, std::optional<std::size_t> k,
                   std::optional<std::vector<std::size_t>> blocks, double value) {
    if (!best || detail::better(value, best_value, maximize)) {
      best = CandidateSolution{p, pi, k, std::move(blocks)};
      best_value = value;
    }
  };

  std::optional<SatEncoding> enc;
  if (p == Problem::sat) enc = sat_encode(instance_as<SatInstance>(inst, p));

  do {
    const auto pi = Permutation::from_zero_based(img);
    switch (p) {
      case Problem::mis:
      case Problem::clique: {
        const Graph& g = graph_of(inst, p);
        for (std::size_t k = N; k >= 1; --k) {
          const auto v = p == Problem::mis ? mis_violation(g, pi, k) : clique_violation(g, pi, k);
          if (v == 0) {
            offer(pi, k, std::nullopt, static_cast<double>(k));
            break;
          }
        }
        break;
      }
      case Problem::mvc: {
        const Graph& g = graph_of(inst, p);
        for (std::size_t k = 0; k <= N; ++k)
          if (mvc_violation(g, pi, k) == 0) {
            offer(pi, k, std::nullopt, static_cast<double>(k));
            break;
          }
        break;
      }
      case Problem::mds: {
        const Graph& g = graph_of(inst, p);
        for (std::size_t k = 1; k <= N; ++k)
          if (mds_uncovered(g, pi, k) == 0) {
            offer(pi, k, std::nullopt, static_cast<double>(k));
            break;
          }
        break;
      }
      case Problem::maxcut: {
        const Graph& g = graph_of(inst, p);
        if (N < 2) throw OutOfRange("formulation_search: Max-Cut needs at least 2 vertices");
        for (std::size_t k = 1; k < N; ++k)
          offer(pi, k, std::nullopt, static_cast<double>(maxcut_value(g, pi, k)));
        break;
      }
      case Problem::coloring: {
        const Graph& g = graph_of(inst, p);
        // Compositions of N <-> subsets of the N-1 gaps between positions.
        const detail::Mask gaps = detail::Mask{1} << (N - 1);
        for (detail::Mask cuts = 0; cuts < gaps; ++cuts) {
          const std::size_t k = static_cast<std::size_t>(std::popcount(cuts)) + 1;
          if (best && static_cast<double>(k) >= best_value) continue;
          std::vector<std::size_t> blocks;
          std::size_t run = 1;
          for (std::size_t gap = 0; gap + 1 < N; ++gap) {
            if (cuts >> gap & 1) {
              blocks.push_back(run);
              run = 1;
            } else {
              ++run;
            }
          }
          blocks.push_back(run);
          if (coloring_violation(g, pi, blocks) == 0)
            offer(pi, std::nullopt, blocks, static_cast<double>(k));
        }
        break;
      }
      case Problem::tsp:
        offer(pi, std::nullopt, std::nullopt,
              tsp_trace_length(instance_as<TspInstance>(inst, p), pi));
        break;
      case Problem::qap:
        offer(pi, std::nullopt, std::nullopt, qap_value(instance_as<QapInstance>(inst, p), pi));
        break;
      case Problem::gi: {
        const auto& pair = instance_as<GraphPair>(inst, p);
        offer(pi, std::nullopt, std::nullopt,
              static_cast<double>(gi_distance(pair.first, pair.second, pi)));
        break;
      }
      case Problem::sat:
        offer(pi, std::nullopt, std::nullopt, sat_check(*enc, pi).feasible() ? 1.0 : 0.0);
        break;
    }
    // Early exits once the optimum cannot improve.
    if (p == Problem::sat && best_value == 1.0) break;
    if (p == Problem::gi && best && best_value == 0.0) break;
  } while (std::next_permutation(img.begin(), img.begin() + static_cast<std::ptrdiff_t>(free)));

  OracleResult r;
  r.problem = p;
  r.optimum = best_value;
  r.candidate = best;
  if (evaluate(inst, *best).feasible) r.witness = extract_solution(inst, *best);
  return r;
}

}  // namespace permform
