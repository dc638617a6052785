#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace permform {

enum class Problem { tsp, qap, mis, maxcut, coloring, mvc, mds, clique, gi, sat };

inline constexpr std::array<Problem, 10> kAllProblems = {
    Problem::tsp, Problem::qap, Problem::mis,    Problem::maxcut, Problem::coloring,
    Problem::mvc, Problem::mds, Problem::clique, Problem::gi,     Problem::sat};

inline constexpr std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::tsp: return "tsp";
    case Problem::qap: return "qap";
    case Problem::mis: return "mis";
    case Problem::maxcut: return "maxcut";
    case Problem::coloring: return "coloring";
    case Problem::mvc: return "mvc";
    case Problem::mds: return "mds";
    case Problem::clique: return "clique";
    case Problem::gi: return "gi";
    case Problem::sat: return "sat";
  }
  return "?";
}

inline std::optional<Problem> problem_from_string(std::string_view s) {
  for (Problem p : kAllProblems)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

/// Problems whose decision variable is a vertex prefix of length k.
inline constexpr bool uses_k(Problem p) {
  return p == Problem::mis || p == Problem::maxcut || p == Problem::mvc || p == Problem::mds ||
         p == Problem::clique;
}

inline constexpr bool is_graph_problem(Problem p) {
  return uses_k(p) || p == Problem::coloring;
}

/// Direction of the primary objective.
inline constexpr bool is_maximization(Problem p) {
  return p == Problem::mis || p == Problem::maxcut || p == Problem::clique || p == Problem::sat;
}

}  // namespace permform
