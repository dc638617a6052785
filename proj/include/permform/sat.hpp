#pragma once

// CNF instances and their literal/clause graph encoding.
//
// Literal vertices are ordered x1, ~x1, x2, ~x2, ...; clause vertices follow
// in clause order, giving N = 2n + m vertices and the block adjacency
//   A = [[V, B^T], [B, 0]].

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "permform/core.hpp"

namespace permform {

class InvalidSatInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SatInstance {
  std::size_t num_vars = 0;
  /// Signed literals: +v is x_v, -v is ~x_v.
  std::vector<std::vector<int>> clauses;

  void validate() const {
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      const auto& clause = clauses[c];
      if (clause.empty()) throw InvalidSatInstance("clause " + std::to_string(c + 1) + " is empty");
      for (int lit : clause) {
        if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > num_vars)
          throw InvalidSatInstance("literal " + std::to_string(lit) + " in clause " +
                                   std::to_string(c + 1) + " outside 1.." +
                                   std::to_string(num_vars));
        for (int other : clause)
          if (other == -lit)
            throw InvalidSatInstance("clause " + std::to_string(c + 1) +
                                     " contains both a literal and its negation");
      }
    }
  }

  friend bool operator==(const SatInstance&, const SatInstance&) = default;
};

/// 0-based literal vertex of a signed literal.
inline std::size_t literal_vertex(int lit) {
  const auto v = static_cast<std::size_t>(std::abs(lit)) - 1;
  return 2 * v + (lit < 0 ? 1 : 0);
}

/// Signed literal of a 0-based literal vertex.
inline int vertex_literal(std::size_t vertex) {
  const int var = static_cast<int>(vertex / 2) + 1;
  return vertex % 2 == 0 ? var : -var;
}

struct SatAssignment {
  std::vector<bool> values;

  bool satisfies(const SatInstance& inst) const {
    for (const auto& clause : inst.clauses) {
      bool sat = false;
      for (int lit : clause) {
        const bool v = values.at(static_cast<std::size_t>(std::abs(lit)) - 1);
        if ((lit > 0) == v) {
          sat = true;
          break;
        }
      }
      if (!sat) return false;
    }
    return true;
  }

  friend bool operator==(const SatAssignment&, const SatAssignment&) = default;
};

struct SatEncoding {
  std::size_t n_vars = 0;
  std::size_t m_clauses = 0;
  std::size_t N = 0;
  IntMatrix conflict;         // V, 2n x 2n
  IntMatrix incidence;        // B, m x 2n
  IntMatrix adjacency;        // A, N x N
  IntMatrix clause_selector;  // T, identity on the last m positions
  IntMatrix literal_selector; // C, identity on the first n positions
};

inline SatEncoding sat_encode(const SatInstance& inst) {
  inst.validate();
  SatEncoding enc;
  const std::size_t n = inst.num_vars;
  const std::size_t m = inst.clauses.size();
  enc.n_vars = n;
  enc.m_clauses = m;
  enc.N = 2 * n + m;

  enc.conflict = IntMatrix(2 * n, 2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    enc.conflict(2 * v, 2 * v + 1) = 1;
    enc.conflict(2 * v + 1, 2 * v) = 1;
  }

  enc.incidence = IntMatrix(m, 2 * n);
  for (std::size_t c = 0; c < m; ++c)
    for (int lit : inst.clauses[c]) enc.incidence(c, literal_vertex(lit)) = 1;

  enc.adjacency = IntMatrix(enc.N, enc.N);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) enc.adjacency(i, j) = enc.conflict(i, j);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t i = 0; i < 2 * n; ++i) {
      enc.adjacency(2 * n + c, i) = enc.incidence(c, i);
      enc.adjacency(i, 2 * n + c) = enc.incidence(c, i);
    }

  enc.clause_selector = IntMatrix(enc.N, enc.N);
  for (std::size_t c = 0; c < m; ++c) enc.clause_selector(2 * n + c, 2 * n + c) = 1;
  enc.literal_selector = IntMatrix(enc.N, enc.N);
  for (std::size_t i = 0; i < n; ++i) enc.literal_selector(i, i) = 1;
  return enc;
}

struct SatCheck {
  /// Entry sum of C P A P^T C: twice the complementary pairs among the
  /// first n positions.
  std::int64_t complementarity = 0;
  /// T P A P^T C 1_N; nonzero only on the clause tail.
  std::vector<std::int64_t> clause_cover;
  std::size_t m_clauses = 0;

  std::size_t unsatisfied_clauses() const {
    std::size_t u = 0;
    for (std::size_t i = clause_cover.size() - m_clauses; i < clause_cover.size(); ++i)
      if (clause_cover[i] < 1) ++u;
    return u;
  }

  bool feasible() const { return complementarity == 0 && unsatisfied_clauses() == 0; }
};

/// Throws InvalidPermutation unless pi has size N and fixes the clause block.
inline void require_sat_permutation(const SatEncoding& enc, const Permutation& pi) {
  if (pi.size() != enc.N)
    throw DimensionError("SAT permutation has size " + std::to_string(pi.size()) +
                         ", expected N=" + std::to_string(enc.N));
  for (std::size_t i = 2 * enc.n_vars; i < enc.N; ++i)
    if (pi[i] != i)
      throw InvalidPermutation("SAT permutation must fix clause position " +
                               std::to_string(i + 1));
}

inline SatCheck sat_check(const SatEncoding& enc, const Permutation& pi) {
  require_sat_permutation(enc, pi);
  const std::size_t n = enc.n_vars;
  const auto& a = enc.adjacency;
  SatCheck out;
  out.m_clauses = enc.m_clauses;
  out.complementarity = n == 0 ? 0 : relabelled_trace(a, pi, TruncationSpec::prefix(n));
  out.clause_cover.assign(enc.N, 0);
  for (std::size_t i = 2 * n; i < enc.N; ++i) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < n; ++j) s += a(pi[i], pi[j]);
    out.clause_cover[i] = s;
  }
  return out;
}

/// Positions 1..n are the literals set true.
inline SatAssignment sat_assignment(const SatEncoding& enc, const Permutation& pi) {
  require_sat_permutation(enc, pi);
  SatAssignment out;
  out.values.assign(enc.n_vars, false);
  for (std::size_t i = 0; i < enc.n_vars; ++i) {
    const int lit = vertex_literal(pi[i]);
    out.values[static_cast<std::size_t>(std::abs(lit)) - 1] = lit > 0;
  }
  return out;
}

/// The canonical permutation for an assignment: true literals in variable
/// order, then their complements, then the clause block.
inline Permutation sat_permutation(const SatEncoding& enc, const SatAssignment& alpha) {
  const std::size_t n = enc.n_vars;
  std::vector<std::size_t> img(enc.N);
  for (std::size_t v = 0; v < n; ++v) {
    const bool t = alpha.values.at(v);
    img[v] = 2 * v + (t ? 0 : 1);
    img[n + v] = 2 * v + (t ? 1 : 0);
  }
  for (std::size_t i = 2 * n; i < enc.N; ++i) img[i] = i;
  return Permutation::from_zero_based(std::move(img));
}

}  // namespace permform
