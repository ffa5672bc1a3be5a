#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "fgf/dataset.hpp"
#include "fgf/ejgraph.hpp"
#include "fgf/error.hpp"
#include "oracles.hpp"

namespace {

using fgf::EjgParams;
using fgf::Index;
using fgf::KnnIndex;
using fgf::Matrix;
using fgf::Metric;
using fgf::NeighborTable;
using fgf::WeightMode;

void expect_graph_matches_oracle(const Matrix& x, std::size_t k, std::size_t k1, std::size_t k2,
                                 WeightMode mode) {
  const auto g = fgf::build_ejg(KnnIndex(x, Metric::Euclidean), EjgParams{k, k1, k2, mode});
  const auto want = oracle::ejg(x, k, k1, k2, mode == WeightMode::JaccardScaled);
  ASSERT_EQ(g.n, x.rows());
  for (Index q = 0; q < g.n; ++q) {
    ASSERT_EQ(g.rows[q].size(), want[q].size());
    for (std::size_t j = 0; j < want[q].size(); ++j) {
      EXPECT_EQ(g.rows[q][j].target, want[q][j].first);
      if (mode == WeightMode::Literal) {
        EXPECT_EQ(g.rows[q][j].weight, want[q][j].second);
      } else {
        EXPECT_NEAR(g.rows[q][j].weight, want[q][j].second, 1e-15);
      }
    }
  }
}

TEST(Jaccard, Examples) {
  EXPECT_EQ(fgf::jaccard_sets(std::vector<Index>{1, 2, 3}, std::vector<Index>{1, 2, 3}), 1.0);
  EXPECT_EQ(fgf::jaccard_sets(std::vector<Index>{1, 2}, std::vector<Index>{3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(fgf::jaccard_sets(std::vector<Index>{1, 2, 3, 4}, std::vector<Index>{3, 4, 5, 6}),
                   2.0 / 6.0);
}

TEST(Jaccard, SymmetricAndDuplicateInsensitive) {
  const std::vector<Index> a{5, 1, 1, 9};
  const std::vector<Index> b{9, 2, 5};
  EXPECT_EQ(fgf::jaccard_sets(a, b), fgf::jaccard_sets(b, a));
  EXPECT_DOUBLE_EQ(fgf::jaccard_sets(a, b), 0.5);
}

TEST(Jaccard, BothEmpty) {
  try {
    fgf::jaccard_sets({}, {});
    FAIL();
  } catch (const fgf::Error& e) {
    EXPECT_EQ(e.code(), fgf::ErrorCode::BothEmpty);
  }
  EXPECT_EQ(fgf::jaccard_sets(std::vector<Index>{1}, {}), 0.0);
}

TEST(OutlierIndicator, Cases) {
  const std::vector<Index> first{1, 2, 3};
  EXPECT_EQ(fgf::outlier_indicator(0, 2, first, std::vector<Index>{3, 7}), 1);
  EXPECT_EQ(fgf::outlier_indicator(0, 9, first, std::vector<Index>{1, 2, 3}), 0);
  EXPECT_EQ(fgf::outlier_indicator(0, 2, first, std::vector<Index>{7, 8}), 0);
}

TEST(EdgeWeight, AllConfirmedGivesK1) {
  // q=0 -> c=1; N(1) = {3,4}; both second-level lists overlap N(1).
  const NeighborTable t({{1, 2}, {3, 4}, {0, 1}, {4, 0}, {3, 0}});
  EXPECT_EQ(fgf::edge_weight(1, 0, t, {2, 2, 2, WeightMode::Literal}), 2.0);
}

TEST(EdgeWeight, NoneConfirmedGivesZero) {
  const NeighborTable t({{1, 2}, {3, 4}, {0, 1}, {0, 2}, {0, 2}});
  EXPECT_EQ(fgf::edge_weight(1, 0, t, {2, 2, 2, WeightMode::Literal}), 0.0);
  EXPECT_EQ(fgf::edge_weight(1, 0, t, {2, 2, 2, WeightMode::JaccardScaled}), 0.0);
}

TEST(EdgeWeight, ConfirmingANeighborNeverDecreasesWeight) {
  // N(q=0) = {1,3}, N(1) = {3,4}. Row 3 initially misses N(1), then hits it.
  std::vector<std::vector<Index>> rows{{1, 3}, {3, 4}, {0, 1}, {0, 2}, {2, 0}};
  for (WeightMode mode : {WeightMode::Literal, WeightMode::JaccardScaled}) {
    const EjgParams p{2, 2, 2, mode};
    auto before_rows = rows;
    const double before = fgf::edge_weight(1, 0, NeighborTable(before_rows), p);
    auto after_rows = rows;
    after_rows[3] = {4, 2};
    const double after = fgf::edge_weight(1, 0, NeighborTable(after_rows), p);
    EXPECT_GT(after, before) << fgf::to_string(mode);
  }
}

TEST(EdgeWeight, MissingContext) {
  const NeighborTable t({{1, 2}, {3, 4}, {0, 1}});
  try {
    fgf::edge_weight(1, 0, t, {2, 2, 2, WeightMode::Literal});
    FAIL();
  } catch (const fgf::Error& e) {
    EXPECT_EQ(e.code(), fgf::ErrorCode::ContextIncomplete);
  }
}

TEST(EdgeWeight, NeighborMustBeInQueryKnn) {
  const NeighborTable t({{1, 2}, {3, 4}, {0, 1}, {4, 0}, {3, 0}});
  EXPECT_THROW(fgf::edge_weight(3, 0, t, {2, 2, 2, WeightMode::Literal}), fgf::Error);
}

TEST(BuildEjg, EightPointFixtureMatchesOracle) {
  const Matrix x = oracle::eight_point_fixture();
  expect_graph_matches_oracle(x, 3, 3, 3, WeightMode::Literal);
  expect_graph_matches_oracle(x, 3, 3, 3, WeightMode::JaccardScaled);
}

TEST(BuildEjg, EightPointFixtureHandValues) {
  // Every point's 3-NN is its own cluster, so every second-level list
  // overlaps: all counts equal k1 = 3 and all Jaccard factors are 1/2
  // (two shared members out of four).
  const auto g = fgf::build_ejg(KnnIndex(oracle::eight_point_fixture(), Metric::Euclidean),
                                EjgParams{3, 3, 3, WeightMode::Literal});
  const auto s = fgf::build_ejg(KnnIndex(oracle::eight_point_fixture(), Metric::Euclidean),
                                EjgParams{3, 3, 3, WeightMode::JaccardScaled});
  for (Index q = 0; q < 8; ++q) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(g.rows[q][j].weight, 3.0);
      EXPECT_EQ(s.rows[q][j].weight, 0.5);
      EXPECT_EQ(g.rows[q][j].target / 4, q / 4);
    }
  }
}

TEST(BuildEjg, RandomFixturesMatchOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Matrix x = oracle::random_matrix(12 + seed, 3, 100 + seed);
    expect_graph_matches_oracle(x, 3, 4, 2, WeightMode::Literal);
    expect_graph_matches_oracle(x, 4, 2, 5, WeightMode::JaccardScaled);
  }
}

TEST(BuildEjg, TwoNodes) {
  // N(0) = {1}, N(1) = {0}. The second-level list seen from node 1 is
  // N(0) = {1}, which does not meet N(1) = {0}; both edges carry weight 0.
  const auto g = fgf::build_ejg(KnnIndex(Matrix(2, 1, {0.0, 1.0}), Metric::Euclidean),
                                EjgParams{1, 1, 1, WeightMode::Literal});
  ASSERT_EQ(g.rows.size(), 2u);
  ASSERT_EQ(g.rows[0].size(), 1u);
  ASSERT_EQ(g.rows[1].size(), 1u);
  EXPECT_EQ(g.rows[0][0], (fgf::Edge{1, 0.0}));
  EXPECT_EQ(g.rows[1][0], (fgf::Edge{0, 0.0}));
}

TEST(BuildEjg, DeterministicAndThreadIndependent) {
  const KnnIndex index(oracle::random_matrix(40, 4, 3), Metric::Euclidean);
  const EjgParams p{6, 0, 0, WeightMode::JaccardScaled};
  const auto a = fgf::build_ejg(index, p);
  EXPECT_EQ(a, fgf::build_ejg(index, p));
  EXPECT_EQ(a, fgf::build_ejg(index, p, 3));
}

TEST(BuildEjg, RowsHaveKEntriesAndBoundedWeights) {
  const KnnIndex index(oracle::random_matrix(30, 5, 21), Metric::Euclidean);
  const auto lit = fgf::build_ejg(index, {5, 4, 3, WeightMode::Literal});
  const auto sc = fgf::build_ejg(index, {5, 4, 3, WeightMode::JaccardScaled});
  EXPECT_NO_THROW(lit.validate());
  for (Index q = 0; q < 30; ++q) {
    ASSERT_EQ(lit.rows[q].size(), 5u);
    ASSERT_EQ(sc.rows[q].size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) {
      const double w = lit.rows[q][j].weight;
      EXPECT_EQ(w, std::floor(w));
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 4.0);
      EXPECT_GE(sc.rows[q][j].weight, 0.0);
      EXPECT_LE(sc.rows[q][j].weight, 1.0);
    }
  }
}

TEST(BuildEjg, EdgeWeightAgreesWithGraph) {
  const KnnIndex index(oracle::random_matrix(25, 3, 13), Metric::Euclidean);
  const EjgParams p{4, 6, 3, WeightMode::JaccardScaled};
  const auto g = fgf::build_ejg(index, p);
  const auto table = NeighborTable::from_lists(index.all_knns(6));
  for (Index q = 0; q < 25; ++q) {
    for (const auto& e : g.rows[q]) EXPECT_EQ(fgf::edge_weight(e.target, q, table, p), e.weight);
  }
}

TEST(BuildEjg, IntraClassEdgesOutweighInterClass) {
  const auto s = fgf::synth_multimodal(6, 10, 0.0, 1.0, 5);
  for (const auto* f : {&s.modality_a, &s.modality_b}) {
    const auto g = fgf::build_ejg(KnnIndex(*f, Metric::Euclidean), {10, 0, 0, WeightMode::JaccardScaled});
    double intra = 0, inter = 0;
    std::size_t n_intra = 0, n_inter = 0;
    const auto& cls = s.labels.class_ids();
    for (Index q = 0; q < g.n; ++q) {
      for (const auto& e : g.rows[q]) {
        if (cls[q] == cls[e.target]) {
          intra += e.weight;
          ++n_intra;
        } else {
          inter += e.weight;
          ++n_inter;
        }
      }
    }
    ASSERT_GT(n_intra, 0u);
    ASSERT_GT(n_inter, 0u);
    EXPECT_GT(intra / n_intra, inter / n_inter);
  }
}

TEST(GraphIo, RoundTripBothFormats) {
  const auto dir = oracle::scratch_dir("graph_io");
  const auto g = fgf::build_ejg(KnnIndex(oracle::random_matrix(20, 3, 1), Metric::Euclidean),
                                {4, 0, 0, WeightMode::JaccardScaled}, 1, "rgb");
  fgf::save_graph(g, dir / "g.csv", fgf::FileFormat::Csv);
  fgf::save_graph(g, dir / "g.bin", fgf::FileFormat::Binary);
  EXPECT_EQ(fgf::load_graph(dir / "g.csv", fgf::FileFormat::Csv), g);
  EXPECT_EQ(fgf::load_graph(dir / "g.bin", fgf::FileFormat::Binary), g);
}

TEST(GraphIo, KeepsIsolatedTrailingNodes) {
  const auto dir = oracle::scratch_dir("graph_isolated");
  fgf::SparseGraph g(5);
  g.rows[0].push_back({1, 2.0});
  fgf::save_graph(g, dir / "g.csv", fgf::FileFormat::Csv);
  EXPECT_EQ(fgf::load_graph(dir / "g.csv", fgf::FileFormat::Csv).n, 5u);
}

TEST(GraphIo, RejectsSelfLoops) {
  const auto dir = oracle::scratch_dir("graph_bad");
  std::ofstream(dir / "g.csv") << "src,dst,weight\n0,0,1\n";
  EXPECT_THROW(fgf::load_graph(dir / "g.csv", fgf::FileFormat::Csv), fgf::Error);
}

}  // namespace
