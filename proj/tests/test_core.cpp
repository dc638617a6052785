#include <gtest/gtest.h>

#include <random>

#include "permform/core.hpp"
#include "test_support.hpp"

using namespace permform;
using permform::testing::g5_graph;

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(Permutation::from_one_based({1, 1, 2}), InvalidPermutation);
  EXPECT_THROW(Permutation::from_one_based({0, 1}), InvalidPermutation);
  EXPECT_THROW(Permutation::from_one_based({1, 4, 2}), InvalidPermutation);
  EXPECT_NO_THROW(Permutation::from_one_based({3, 1, 2}));
}

TEST(Permutation, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto pi = permform::testing::random_permutation(7, rng);
    EXPECT_TRUE(compose(pi, invert(pi)).is_identity());
    EXPECT_TRUE(compose(invert(pi), pi).is_identity());
  }
}

TEST(PermMatrix, WorkedFiveElementExample) {
  const auto p = perm_matrix(Permutation::from_one_based({3, 5, 1, 4, 2}));
  const IntMatrix expected = {{0, 0, 1, 0, 0},
                              {0, 0, 0, 0, 1},
                              {1, 0, 0, 0, 0},
                              {0, 0, 0, 1, 0},
                              {0, 1, 0, 0, 0}};
  EXPECT_EQ(p, expected);
}

TEST(PermMatrix, IdentityAndTransposition) {
  EXPECT_EQ(perm_matrix(Permutation::identity(4)), IntMatrix::identity(4));
  EXPECT_EQ(perm_matrix(Permutation::from_one_based({2, 1})), (IntMatrix{{0, 1}, {1, 0}}));
}

TEST(PermMatrix, OneEntryPerRowAndColumnAndInverseIsTranspose) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto pi = permform::testing::random_permutation(6, rng);
    const auto p = perm_matrix(pi);
    for (std::size_t i = 0; i < 6; ++i) {
      std::int64_t r = 0, c = 0;
      for (std::size_t j = 0; j < 6; ++j) r += p(i, j), c += p(j, i);
      EXPECT_EQ(r, 1);
      EXPECT_EQ(c, 1);
    }
    EXPECT_EQ(perm_matrix(invert(pi)), p.transpose());
  }
}

TEST(Relabel, ExampleGraphGetsZeroBlock) {
  const auto a1 = g5_graph().adjacency();
  const auto a2 = relabel(a1, Permutation::from_one_based({1, 4, 5, 2, 3}));
  const IntMatrix expected = {{0, 0, 0, 1, 1},
                              {0, 0, 0, 1, 1},
                              {0, 0, 0, 1, 1},
                              {1, 1, 1, 0, 1},
                              {1, 1, 1, 1, 0}};
  EXPECT_EQ(a2, expected);
}

TEST(Relabel, MatchesConjugationAndRoundTrips) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto g = permform::testing::random_graph(6, 0.5, 100 + t);
    const auto pi = permform::testing::random_permutation(6, rng);
    const auto p = perm_matrix(pi);
    const auto m = relabel(g.adjacency(), pi);
    EXPECT_EQ(m, p * g.adjacency() * p.transpose());
    EXPECT_EQ(relabel(m, invert(pi)), g.adjacency());
    EXPECT_TRUE(m.is_symmetric());
    EXPECT_EQ(m.trace(), 0);
    EXPECT_EQ(m.sum(), g.adjacency().sum());
  }
  EXPECT_EQ(relabel(g5_graph().adjacency(), Permutation::identity(5)), g5_graph().adjacency());
}

TEST(Relabel, DimensionMismatchThrows) {
  EXPECT_THROW(relabel(IntMatrix(3, 3), Permutation::identity(4)), DimensionError);
}

TEST(TruncationMatrix, PrefixBlock) {
  const auto c = truncation_matrix(TruncationSpec::prefix(3), 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(c(i, j), (i < 3 && j < 3) ? 1 : 0);
}

TEST(TruncationMatrix, CrossBlockAtBoundary) {
  const std::size_t n = 5;
  const auto c = truncation_matrix(TruncationSpec::cross(n - 1), n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      EXPECT_EQ(c(i, j), ((i == n - 1) != (j == n - 1)) ? 1 : 0);
}

TEST(TruncationMatrix, SingletonBlocksGiveIdentity) {
  EXPECT_EQ(truncation_matrix(TruncationSpec::diagonal({1, 1, 1, 1}), 4), IntMatrix::identity(4));
}

TEST(TruncationMatrix, SuffixBlock) {
  const auto c = truncation_matrix(TruncationSpec::suffix(2), 4);
  EXPECT_EQ(c, (IntMatrix{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}}));
  EXPECT_EQ(truncation_matrix(TruncationSpec::suffix(0), 3), IntMatrix(3, 3, 1));
}

TEST(TruncationMatrix, InvalidSpecsThrow) {
  EXPECT_THROW(truncation_matrix(TruncationSpec::prefix(0), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::prefix(5), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::cross(4), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::suffix(5), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::diagonal({2, 1}), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::diagonal({2, 0, 2}), 4), OutOfRange);
  EXPECT_THROW(truncation_matrix(TruncationSpec::diagonal({}), 4), OutOfRange);
}

TEST(TraceProduct, IdentityAgainstPrefixGivesK) {
  for (std::size_t k = 1; k <= 6; ++k)
    EXPECT_EQ(trace_product(IntMatrix::identity(6), TruncationSpec::prefix(k)), static_cast<std::int64_t>(k));
}

TEST(TraceProduct, ExampleGraphZeroBlock) {
  const auto m = relabel(g5_graph().adjacency(), Permutation::from_one_based({1, 4, 5, 2, 3}));
  EXPECT_EQ(trace_product(m, TruncationSpec::prefix(3)), 0);
}

TEST(TraceProduct, PrefixCountsUpperTriangleTwice) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = permform::testing::random_graph(7, 0.5, seed).adjacency();
    for (std::size_t k = 1; k <= 7; ++k) {
      std::int64_t upper = 0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) upper += a(i, j);
      EXPECT_EQ(trace_product(a, TruncationSpec::prefix(k)), 2 * upper);
    }
  }
}

TEST(TraceProduct, StructuredMatchesDenseOnRandomPairs) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> val(-3, 3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 7);
    IntMatrix m(n, n);
    for (auto& v : m.data()) v = val(rng);
    TruncationSpec spec;
    switch (t % 4) {
      case 0: spec = TruncationSpec::prefix(1 + rng() % n); break;
      case 1: spec = TruncationSpec::cross(1 + rng() % (n - 1)); break;
      case 2: spec = TruncationSpec::suffix(rng() % (n + 1)); break;
      default: {
        std::vector<std::size_t> blocks;
        std::size_t left = n;
        while (left > 0) {
          const std::size_t b = 1 + rng() % left;
          blocks.push_back(b);
          left -= b;
        }
        spec = TruncationSpec::diagonal(blocks);
      }
    }
    EXPECT_EQ(trace_product(m, spec), trace_product(m, truncation_matrix(spec, n))) << "case " << t;
  }
}

TEST(TraceProduct, RelabelledPrefixTraceIsEven) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto g = permform::testing::random_graph(7, 0.5, 500 + t);
    const auto pi = permform::testing::random_permutation(7, rng);
    for (std::size_t k = 1; k <= 7; ++k) {
      const auto tr = relabelled_trace(g.adjacency(), pi, TruncationSpec::prefix(k));
      EXPECT_EQ(tr % 2, 0);
      EXPECT_EQ(tr, trace_product(relabel(g.adjacency(), pi), TruncationSpec::prefix(k)));
    }
  }
}

TEST(TraceProduct, DimensionMismatchThrows) {
  EXPECT_THROW(trace_product(IntMatrix(3, 3), IntMatrix(4, 4)), DimensionError);
}

TEST(CycleShift, ThreeByThree) {
  EXPECT_EQ(cycle_shift_matrix(3), (IntMatrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
}

TEST(CycleShift, RowAndColumnSumsAreOne) {
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto v = cycle_shift_matrix(n);
    const std::vector<std::int64_t> ones(n, 1);
    EXPECT_EQ(v * ones, ones);
    EXPECT_EQ(v.transpose() * ones, ones);
  }
}

TEST(CycleShift, NthPowerIsIdentity) {
  const auto v = cycle_shift_matrix(4);
  EXPECT_EQ(v * v * v * v, IntMatrix::identity(4));
  EXPECT_NE(v * v * v, IntMatrix::identity(4));
}

TEST(CycleShift, RejectsTinySizes) {
  EXPECT_THROW(cycle_shift_matrix(1), OutOfRange);
  EXPECT_THROW(cycle_shift_matrix(0), OutOfRange);
}

TEST(Graph, RejectsInvalidAdjacency) {
  EXPECT_THROW(Graph(IntMatrix{{0, 1}, {0, 0}}), InvalidGraph);
  EXPECT_THROW(Graph(IntMatrix{{1, 0}, {0, 0}}), InvalidGraph);
  EXPECT_THROW(Graph(IntMatrix{{0, 2}, {2, 0}}), InvalidGraph);
  EXPECT_THROW(Graph::from_edges(3, {{1, 1}}), InvalidGraph);
}

TEST(Graph, ComplementAndEdges) {
  const auto g = g5_graph();
  EXPECT_EQ(g.edge_count(), 7u);
  EXPECT_EQ(g.complement().edge_count(), 3u);
  EXPECT_EQ(g.complement().complement(), g);
  const std::vector<std::pair<int, int>> expected = {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}};
  EXPECT_EQ(g.edges(), expected);
}
