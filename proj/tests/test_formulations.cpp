#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "permform/formulations.hpp"
#include "test_support.hpp"

using namespace permform;
namespace pt = permform::testing;

namespace {

Graph complete(std::size_t n) {
  Graph g(n);
  return g.complement();
}

Graph bipartite_k23() {
  return Graph::from_edges(5, {{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
}

Graph triangle() { return Graph::from_edges(3, {{1, 2}, {2, 3}, {1, 3}}); }

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<std::size_t> img(n);
  std::iota(img.begin(), img.end(), std::size_t{0});
  std::vector<Permutation> out;
  do out.push_back(Permutation::from_zero_based(img));
  while (std::next_permutation(img.begin(), img.end()));
  return out;
}

std::int64_t internal_edges(const Graph& g, const std::vector<std::size_t>& members) {
  std::int64_t e = 0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) e += g.has_edge(members[i], members[j]);
  return e;
}

std::vector<std::size_t> positions(const Permutation& pi, std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(pi[i]);
  return out;
}

}  // namespace

// --- TSP ------------------------------------------------------------------

TEST(Tsp, ThreeCitySymmetricToursAgree) {
  const auto inst = pt::random_tsp(3, 17, true, false);
  const double a = tsp_length(inst, Permutation::from_one_based({1, 2, 3}));
  for (const auto& pi : all_permutations(3)) EXPECT_NEAR(tsp_length(inst, pi), a, 1e-12);
}

TEST(Tsp, UnitRingIdentityTour) {
  for (std::size_t n = 3; n <= 8; ++n)
    EXPECT_DOUBLE_EQ(tsp_length(pt::unit_ring(n), Permutation::identity(n)), static_cast<double>(n));
}

TEST(Tsp, FiveCityOptimumMatchesEnumeration) {
  const auto inst = pt::random_tsp(5, 99, true, true);
  double best = 1e300;
  for (const auto& pi : all_permutations(5)) best = std::min(best, tsp_length(inst, pi));
  // Every rotation/reflection class of an optimal tour attains the same value.
  std::size_t attaining = 0;
  for (const auto& pi : all_permutations(5)) attaining += tsp_length(inst, pi) == best;
  EXPECT_EQ(attaining % 10, 0u);
}

TEST(Tsp, TraceFormMatchesSumForAsymmetricCosts) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const auto inst = pt::random_tsp(6, 300 + t, false, false);
    const auto pi = pt::random_permutation(6, rng);
    EXPECT_NEAR(tsp_trace_length(inst, pi), tsp_length(inst, pi), 1e-9);
  }
}

TEST(Tsp, DimensionMismatchThrows) {
  EXPECT_THROW(tsp_length(pt::unit_ring(4), Permutation::identity(5)), DimensionError);
}

TEST(TspHeatmap, IdentityIsShiftMatrix) {
  EXPECT_EQ(tsp_heatmap(Permutation::identity(3)), cycle_shift_matrix(3));
}

TEST(TspHeatmap, SuccessorMatrixOfTour) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto inst = pt::random_tsp(7, 700 + t, t % 2 == 0, false);
    const auto pi = pt::random_permutation(7, rng);
    const auto h = tsp_heatmap(pi);
    const std::vector<std::int64_t> ones(7, 1);
    EXPECT_EQ(h * ones, ones);
    EXPECT_EQ(h.transpose() * ones, ones);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(h(pi[i], pi[(i + 1) % 7]), 1);
    double s = 0.0;
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) s += static_cast<double>(h(i, j)) * inst.cost(i, j);
    EXPECT_NEAR(s, tsp_length(inst, pi), 1e-9);
  }
}

TEST(TspHeatmap, SingleCycle) {
  const auto pi = Permutation::from_one_based({4, 2, 5, 1, 3});
  const auto h = tsp_heatmap(pi);
  std::size_t v = 0, steps = 0;
  do {
    std::size_t next = 0;
    while (h(v, next) == 0) ++next;
    v = next;
    ++steps;
  } while (v != 0);
  EXPECT_EQ(steps, 5u);
}

// --- QAP ------------------------------------------------------------------

TEST(Qap, IdentityIsTraceOfProduct) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 5);
  RealMatrix f(4, 4), d(4, 4);
  for (auto& v : f.data()) v = u(rng);
  for (auto& v : d.data()) v = u(rng);
  EXPECT_NEAR(qap_value({f, d}, Permutation::identity(4)), (f * d).trace(), 1e-12);
}

TEST(Qap, TwoByTwoSymmetric) {
  const QapInstance q{RealMatrix{{0, 1}, {1, 0}}, RealMatrix{{0, 3}, {3, 0}}};
  EXPECT_DOUBLE_EQ(qap_value(q, Permutation::identity(2)), 6.0);
  EXPECT_DOUBLE_EQ(qap_value(q, Permutation::from_one_based({2, 1})), 6.0);
}

TEST(Qap, MatchesDenseTraceForm) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 5);
  RealMatrix f(4, 4), d(4, 4);
  for (auto& v : f.data()) v = u(rng);
  for (auto& v : d.data()) v = u(rng);
  double best = 1e300;
  for (const auto& pi : all_permutations(4)) {
    const RealMatrix p = perm_matrix(pi).cast<double>();
    const double dense = (f * p * d * p.transpose()).trace();
    EXPECT_NEAR(qap_value({f, d}, pi), dense, 1e-9);
    best = std::min(best, dense);
  }
  EXPECT_GT(best, 0.0);
}

TEST(Qap, DimensionMismatchThrows) {
  EXPECT_THROW(qap_value({RealMatrix(3, 3), RealMatrix(4, 4)}, Permutation::identity(3)), DimensionError);
}

// --- MIS / clique ----------------------------------------------------------

TEST(Mis, ExampleGraphPrefix) {
  EXPECT_EQ(mis_violation(pt::g5_graph(), Permutation::from_one_based({1, 4, 5, 2, 3}), 3), 0);
}

TEST(Mis, SingleVertexAlwaysIndependent) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t)
    EXPECT_EQ(mis_violation(complete(6), pt::random_permutation(6, rng), 1), 0);
}

TEST(Mis, CompleteGraphThreePrefix) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(mis_violation(complete(4), pt::random_permutation(4, rng), 3), 6);
}

TEST(Mis, KOutOfRangeThrows) {
  EXPECT_THROW(mis_violation(pt::g5_graph(), Permutation::identity(5), 0), OutOfRange);
  EXPECT_THROW(mis_violation(pt::g5_graph(), Permutation::identity(5), 6), OutOfRange);
}

TEST(Clique, Examples) {
  std::mt19937_64 rng(9);
  EXPECT_EQ(clique_violation(complete(5), pt::random_permutation(5, rng), 5), 0);
  EXPECT_EQ(clique_violation(pt::g5_graph(), pt::random_permutation(5, rng), 1), 0);
  EXPECT_EQ(clique_violation(pt::g5_graph(), Permutation::from_one_based({2, 3, 4, 1, 5}), 3), 0);
  EXPECT_EQ(clique_violation(pt::g5_graph(), Permutation::from_one_based({2, 3, 4, 5, 1}), 4), 2);
}

TEST(Clique, EqualsMisOnComplement) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 40; ++t) {
    const auto g = pt::random_graph(6, 0.5, 40 + t);
    const auto pi = pt::random_permutation(6, rng);
    for (std::size_t k = 1; k <= 6; ++k) EXPECT_EQ(clique_violation(g, pi, k), mis_violation(g.complement(), pi, k));
  }
}

// --- Max-Cut ---------------------------------------------------------------

TEST(MaxCut, Examples) {
  EXPECT_EQ(maxcut_value(complete(2), Permutation::identity(2), 1), 1);
  EXPECT_EQ(maxcut_value(bipartite_k23(), Permutation::identity(5), 2), 6);
  std::int64_t best = 0;
  for (const auto& pi : all_permutations(4))
    for (std::size_t k = 1; k < 4; ++k) best = std::max(best, maxcut_value(complete(4), pi, k));
  EXPECT_EQ(best, 4);
}

TEST(MaxCut, EqualsEdgesMinusInternal) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 40; ++t) {
    const auto g = pt::random_graph(7, 0.5, 80 + t);
    const auto pi = pt::random_permutation(7, rng);
    for (std::size_t k = 1; k < 7; ++k) {
      const auto inside = internal_edges(g, positions(pi, 0, k)) + internal_edges(g, positions(pi, k, 7));
      EXPECT_EQ(maxcut_value(g, pi, k), static_cast<std::int64_t>(g.edge_count()) - inside);
    }
  }
}

TEST(MaxCut, KOutOfRangeThrows) {
  EXPECT_THROW(maxcut_value(complete(4), Permutation::identity(4), 0), OutOfRange);
  EXPECT_THROW(maxcut_value(complete(4), Permutation::identity(4), 4), OutOfRange);
}

// --- Colouring --------------------------------------------------------------

TEST(Coloring, TriangleExamples) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 6; ++t) {
    const auto pi = pt::random_permutation(3, rng);
    const std::vector<std::size_t> singles = {1, 1, 1}, pair = {2, 1};
    EXPECT_EQ(coloring_violation(triangle(), pi, singles), 0);
    EXPECT_EQ(coloring_violation(triangle(), pi, pair), 2);
  }
}

TEST(Coloring, FiveCycleNeedsThreeColours) {
  const Graph c5 = Graph::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  bool two = false, three = false;
  for (const auto& pi : all_permutations(5)) {
    for (std::size_t a = 1; a < 5; ++a) {
      const std::vector<std::size_t> blocks = {a, 5 - a};
      two = two || coloring_violation(c5, pi, blocks) == 0;
    }
    const std::vector<std::size_t> b3 = {2, 2, 1};
    three = three || coloring_violation(c5, pi, b3) == 0;
  }
  EXPECT_FALSE(two);
  EXPECT_TRUE(three);
}

TEST(Coloring, InvalidCompositionThrows) {
  const std::vector<std::size_t> bad = {2, 2}, empty = {3, 0};
  EXPECT_THROW(coloring_violation(triangle(), Permutation::identity(3), bad), OutOfRange);
  EXPECT_THROW(coloring_violation(triangle(), Permutation::identity(3), empty), OutOfRange);
}

// --- MVC -------------------------------------------------------------------

TEST(Mvc, Examples) {
  const Graph path = Graph::from_edges(3, {{1, 2}, {2, 3}});
  EXPECT_EQ(mvc_violation(path, Permutation::from_one_based({2, 1, 3}), 1), 0);
  const Graph star = Graph::from_edges(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
  EXPECT_EQ(mvc_violation(star, Permutation::identity(5), 1), 0);
  EXPECT_EQ(mvc_violation(Graph(3), Permutation::identity(3), 0), 0);
  EXPECT_EQ(mvc_violation(path, Permutation::identity(3), 0), 4);
}

TEST(Mvc, ExampleGraphMinimumIsTwo) {
  std::size_t best = 6;
  for (const auto& pi : all_permutations(5))
    for (std::size_t k = 0; k <= 5; ++k)
      if (mvc_violation(pt::g5_graph(), pi, k) == 0) best = std::min(best, k);
  EXPECT_EQ(best, 2u);
}

TEST(Mvc, ComplementOfIndependentPrefixIsCover) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 40; ++t) {
    const auto g = pt::random_graph(6, 0.4, 900 + t);
    const auto pi = pt::random_permutation(6, rng);
    // Reverse pi: the first k positions become the last k.
    std::vector<std::size_t> rev(pi.zero_based().rbegin(), pi.zero_based().rend());
    const auto rpi = Permutation::from_zero_based(rev);
    for (std::size_t k = 1; k <= 6; ++k)
      EXPECT_EQ(mvc_violation(g, rpi, 6 - k), mis_violation(g, pi, k));
  }
}

// --- MDS -------------------------------------------------------------------

TEST(Mds, Examples) {
  const auto g = pt::g5_graph();
  const auto cov = mds_coverage(g, Permutation::identity(5), 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(cov[i], static_cast<std::int64_t>(g.degree(i)) + 1);
  const Graph star = Graph::from_edges(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
  for (auto c : mds_coverage(star, Permutation::identity(5), 1)) EXPECT_GE(c, 1);
  const Graph c5 = Graph::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  std::size_t best = 6;
  for (const auto& pi : all_permutations(5))
    for (std::size_t k = 1; k <= 5; ++k)
      if (mds_uncovered(c5, pi, k) == 0) best = std::min(best, k);
  EXPECT_EQ(best, 2u);
}

TEST(Mds, CoverageCountsClosedNeighbourhoodInPrefix) {
  const auto g = pt::g5_graph();
  const auto pi = Permutation::from_one_based({4, 1, 2, 3, 5});
  // Prefix {4, 1}. Coverage is listed by position: vertices 4, 1, 2, 3, 5.
  EXPECT_EQ(mds_coverage(g, pi, 2), (std::vector<std::int64_t>{1, 1, 2, 2, 0}));
  EXPECT_EQ(mds_uncovered(g, pi, 2), 1);
}

// --- GI --------------------------------------------------------------------

TEST(Gi, Examples) {
  const auto g = pt::g5_graph();
  EXPECT_EQ(gi_distance(g, g, Permutation::identity(5)), 0);
  const Graph c4a = Graph::from_edges(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
  const Graph c4b = Graph::from_edges(4, {{1, 3}, {3, 2}, {2, 4}, {1, 4}});
  bool found = false;
  for (const auto& pi : all_permutations(4)) found = found || gi_distance(c4a, c4b, pi) == 0;
  EXPECT_TRUE(found);
  const Graph path = Graph::from_edges(4, {{1, 2}, {2, 3}});
  for (const auto& pi : all_permutations(4)) EXPECT_GE(gi_distance(c4a, path, pi), 4);
}

TEST(Gi, SymmetricUnderInverse) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const auto a = pt::random_graph(6, 0.5, 60 + t);
    const auto b = pt::random_graph(6, 0.5, 160 + t);
    const auto pi = pt::random_permutation(6, rng);
    const auto d = gi_distance(a, b, pi);
    EXPECT_EQ(d % 2, 0);
    EXPECT_EQ(d, gi_distance(b, a, invert(pi)));
  }
}

// --- Invariances -------------------------------------------------------------

TEST(Invariance, BlockInternalReordering) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 30; ++t) {
    const auto g = pt::random_graph(7, 0.5, 2000 + t);
    const auto pi = pt::random_permutation(7, rng);
    const std::size_t k = 1 + static_cast<std::size_t>(t % 6);
    auto img = pi.zero_based();
    std::shuffle(img.begin(), img.begin() + static_cast<std::ptrdiff_t>(k), rng);
    std::shuffle(img.begin() + static_cast<std::ptrdiff_t>(k), img.end(), rng);
    const auto sigma = Permutation::from_zero_based(img);
    EXPECT_EQ(mis_violation(g, pi, k), mis_violation(g, sigma, k));
    EXPECT_EQ(clique_violation(g, pi, k), clique_violation(g, sigma, k));
    EXPECT_EQ(mvc_violation(g, pi, k), mvc_violation(g, sigma, k));
    EXPECT_EQ(maxcut_value(g, pi, k), maxcut_value(g, sigma, k));
    EXPECT_EQ(mds_uncovered(g, pi, k), mds_uncovered(g, sigma, k));
  }
}

TEST(Invariance, TourRotationAndReversal) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const auto sym = pt::random_tsp(6, 40 + t, true, false);
    const auto asym = pt::random_tsp(6, 80 + t, false, false);
    const auto pi = pt::random_permutation(6, rng);
    auto img = pi.zero_based();
    std::rotate(img.begin(), img.begin() + 1 + t % 5, img.end());
    const auto rot = Permutation::from_zero_based(img);
    EXPECT_NEAR(tsp_length(asym, rot), tsp_length(asym, pi), 1e-9);
    std::reverse(img.begin(), img.end());
    EXPECT_NEAR(tsp_length(sym, Permutation::from_zero_based(img)), tsp_length(sym, pi), 1e-9);
  }
}

// --- Evaluation and extraction ----------------------------------------------

TEST(Evaluate, CandidateShapeIsChecked) {
  const Instance inst = pt::g5_graph();
  EXPECT_THROW(evaluate(inst, CandidateSolution{Problem::mis, Permutation::identity(5), std::nullopt, std::nullopt}),
               std::invalid_argument);
  EXPECT_THROW(evaluate(inst, CandidateSolution{Problem::coloring, Permutation::identity(5), std::nullopt, std::nullopt}),
               std::invalid_argument);
  EXPECT_THROW(evaluate(inst, CandidateSolution{Problem::mis, Permutation::identity(4), 2, std::nullopt}),
               DimensionError);
  EXPECT_THROW(evaluate(inst, CandidateSolution{Problem::tsp, Permutation::identity(5), std::nullopt, std::nullopt}),
               std::invalid_argument);
}

TEST(Extract, ExampleIndependentSet) {
  const Instance inst = pt::g5_graph();
  const CandidateSolution c{Problem::mis, Permutation::from_one_based({1, 4, 5, 2, 3}), 3, std::nullopt};
  EXPECT_EQ(std::get<VertexSet>(extract_solution(inst, c)).vertices, (std::vector<int>{1, 4, 5}));
  const CandidateSolution bad{Problem::mis, Permutation::from_one_based({1, 4, 5, 2, 3}), 4, std::nullopt};
  EXPECT_THROW(extract_solution(inst, bad), InfeasibleCandidate);
}

TEST(Extract, EdgelessGraphTakesEverything) {
  const Instance inst = Graph(4);
  const CandidateSolution c{Problem::mis, Permutation::from_one_based({3, 1, 4, 2}), 4, std::nullopt};
  EXPECT_EQ(std::get<VertexSet>(extract_solution(inst, c)).vertices, (std::vector<int>{1, 2, 3, 4}));
}

TEST(Extract, OtherShapes) {
  const Instance g = pt::g5_graph();
  const auto pi = Permutation::from_one_based({2, 3, 1, 4, 5});
  const auto cut = std::get<Bipartition>(extract_solution(g, {Problem::maxcut, pi, 2, std::nullopt}));
  EXPECT_EQ(cut.side, (std::vector<int>{2, 3}));
  EXPECT_EQ(cut.rest, (std::vector<int>{1, 4, 5}));
  const auto colours = std::get<ColorClasses>(
      extract_solution(g, {Problem::coloring, Permutation::from_one_based({1, 4, 5, 2, 3}), std::nullopt,
                           std::vector<std::size_t>{3, 1, 1}}));
  EXPECT_EQ(colours.classes, (std::vector<std::vector<int>>{{1, 4, 5}, {2}, {3}}));
  const Instance tsp = pt::unit_ring(4);
  const auto tour = std::get<Tour>(extract_solution(tsp, {Problem::tsp, Permutation::from_one_based({2, 3, 4, 1}), std::nullopt, std::nullopt}));
  EXPECT_EQ(tour.cities, (std::vector<int>{2, 3, 4, 1}));
}

TEST(Extract, IsomorphismMapping) {
  const auto a1 = pt::g5_graph();
  const auto pi = Permutation::from_one_based({1, 4, 5, 2, 3});
  const Graph a2(relabel(a1.adjacency(), pi));
  const Instance inst = GraphPair{a1, a2};
  const auto m = std::get<VertexMapping>(extract_solution(inst, {Problem::gi, pi, std::nullopt, std::nullopt}));
  // Vertex u of the first graph maps to m[u-1] in the second; edges are preserved.
  for (const auto& [u, v] : a1.edges())
    EXPECT_TRUE(a2.has_edge(static_cast<std::size_t>(m.mapping[u - 1] - 1), static_cast<std::size_t>(m.mapping[v - 1] - 1)));
}

TEST(PenalizedObjective, SignConventions) {
  const Instance g = pt::g5_graph();
  const auto pi = Permutation::from_one_based({1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(penalized_objective(g, {Problem::mis, pi, 2, std::nullopt}, 3.0), -2.0 + 3.0 * 2.0);
  EXPECT_DOUBLE_EQ(penalized_objective(g, {Problem::mvc, pi, 2, std::nullopt}, 1.0), 2.0 + 4.0);
  EXPECT_DOUBLE_EQ(penalized_objective(g, {Problem::maxcut, pi, 1, std::nullopt}, 5.0), -2.0);
}
