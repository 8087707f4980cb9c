//
// Copyright 2026 The Census DP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "census_dp/mst.h"

#include <cmath>
#include <map>
#include <numeric>

#include <omp.h>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "census_dp/constraints.h"
#include "census_dp/metrics.h"
#include "oracles.h"
#include "test_util.h"

namespace census_dp {
namespace {

using ::census_dp::testing::IsOk;
using ::census_dp::testing::MakePopulation;
using ::census_dp::testing::MakeSchema;
using ::census_dp::testing::MakeTree;
using ::census_dp::testing::StatusIs;

std::vector<std::pair<int, int>> Normalized(const std::vector<Edge>& edges) {
  std::vector<std::pair<int, int>> out;
  for (const Edge& e : edges) {
    out.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<oracles::WeightedEdge> AllEdges(const CorrelationGraph& graph) {
  std::vector<oracles::WeightedEdge> edges;
  for (int a = 0; a < graph.num_nodes(); ++a) {
    for (int b = a + 1; b < graph.num_nodes(); ++b) {
      edges.push_back({a, b, graph.weight(a, b)});
    }
  }
  return edges;
}

TEST(MutualInformationTest, IndependentProductTableIsZero) {
  ContingencyTable counts{{2, 2}, {25, 25, 25, 25}};
  EXPECT_NEAR(MutualInformationFromCounts(counts), 0.0, 1e-15);
}

TEST(MutualInformationTest, PerfectCopyIsLogTwo) {
  ContingencyTable counts{{2, 2}, {50, 0, 0, 50}};
  EXPECT_NEAR(MutualInformationFromCounts(counts), std::log(2.0), 1e-15);
}

TEST(MutualInformationTest, MatchesDoubleLoopOracle) {
  RandomSource rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const int rows = 2 + static_cast<int>(rng.UniformInt(3));
    const int cols = 2 + static_cast<int>(rng.UniformInt(3));
    ContingencyTable counts{{rows, cols},
                            std::vector<double>(rows * cols)};
    for (double& v : counts.values) {
      v = rng.UniformOpen() < 0.2 ? 0.0
                                  : static_cast<double>(rng.UniformInt(30));
    }
    counts.values[0] += 1;
    EXPECT_NEAR(MutualInformationFromCounts(counts),
                oracles::BruteForceMutualInformation(counts.values, rows, cols),
                1e-12);
  }
}

TEST(MutualInformationTest, PlantedPairMatchesAnalytic) {
  FeatureSchema schema = MakeSchema({3, 4});
  RegionTree tree = MakeTree({2});
  const double c = 0.6;
  Population pop = GeneratePopulation(2, 100000, schema, tree, c).value();
  std::vector<double> planted = PlantedPairDistribution(schema, 1, c);
  ContingencyTable analytic{{3, 4}, planted};
  EXPECT_NEAR(MutualInformation(pop, 0, 1).value(),
              MutualInformationFromCounts(analytic), 0.02);
}

TEST(MutualInformationTest, RejectsSameColumn) {
  FeatureSchema schema = MakeSchema({2, 2});
  RegionTree tree = MakeTree({2});
  Population pop = MakePopulation(schema, tree, {{0, 1}}, {0});
  EXPECT_FALSE(MutualInformation(pop, 1, 1).ok());
  EXPECT_FALSE(MutualInformation(pop, 0, 7).ok());
}

TEST(CorrelationGraphTest, ParallelMatchesReferenceAndIsSymmetric) {
  FeatureSchema schema = MakeSchema({3, 2, 4, 2, 3});
  RegionTree tree = MakeTree({3, 2});
  Population pop = GeneratePopulation(6, 3000, schema, tree, 0.5).value();
  CorrelationGraph fast = BuildCorrelationGraph(pop).value();
  CorrelationGraph serial = reference::BuildCorrelationGraph(pop).value();
  EXPECT_EQ(fast, serial);
  for (int a = 0; a < fast.num_nodes(); ++a) {
    EXPECT_EQ(fast.weight(a, a), 0.0);
    for (int b = 0; b < fast.num_nodes(); ++b) {
      EXPECT_EQ(fast.weight(a, b), fast.weight(b, a));
      EXPECT_GE(fast.weight(a, b), 0.0);
    }
  }
}

TEST(SelectTreeTest, LargeEpsilonMatchesKruskal) {
  RandomSource gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    CorrelationGraph graph(4);
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        graph.set_weight(a, b, 0.05 + gen.UniformOpen());
      }
    }
    RandomSource rng(trial);
    std::vector<Edge> tree = SelectTree(graph, 1e6, 1.0, rng).value();
    ASSERT_EQ(Normalized(tree),
              oracles::KruskalMaxSpanningTree(4, AllEdges(graph)));
  }
}

TEST(SelectTreeTest, TwoNodesAlwaysGiveTheEdge) {
  CorrelationGraph graph(2);
  graph.set_weight(0, 1, 0.3);
  RandomSource rng(1);
  for (int i = 0; i < 50; ++i) {
    EXPECT_THAT(SelectTree(graph, 0.01, 1.0, rng).value(),
                ::testing::ElementsAre(Edge{0, 1}));
  }
}

TEST(SelectTreeTest, EqualWeightsGiveUniformSpanningTrees) {
  CorrelationGraph graph(3);
  graph.set_weight(0, 1, 0.2);
  graph.set_weight(0, 2, 0.2);
  graph.set_weight(1, 2, 0.2);
  RandomSource rng(3);
  std::map<std::vector<std::pair<int, int>>, int> counts;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    ++counts[Normalized(SelectTree(graph, 1.0, 1.0, rng).value())];
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [tree, count] : counts) {
    EXPECT_NEAR(static_cast<double>(count) / trials, 1.0 / 3, 0.02);
  }
}

TEST(SelectTreeTest, RejectsSingleNode) {
  CorrelationGraph graph(1);
  RandomSource rng(1);
  EXPECT_FALSE(SelectTree(graph, 1.0, 1.0, rng).ok());
}

TEST(OrientTreeTest, OrientsAwayFromRoot) {
  const Edge edges[] = {{0, 1}, {2, 1}, {3, 2}};
  std::vector<Edge> oriented = OrientTree(edges, 4, 3).value();
  EXPECT_THAT(oriented, ::testing::ElementsAre(Edge{3, 2}, Edge{2, 1},
                                               Edge{1, 0}));
  const Edge cycle[] = {{0, 1}, {1, 0}, {2, 3}};
  EXPECT_FALSE(OrientTree(cycle, 4, 0).ok());
}

class MstModelTest : public ::testing::Test {
 protected:
  MstModelTest()
      : schema_(MakeSchema({3, 2, 4, 3})),
        tree_(MakeTree({3, 4})),
        population_(
            GeneratePopulation(30, 5000, schema_, tree_, 0.6).value()) {}

  std::vector<Edge> ChainTree() const {
    // Region attached to f0, then the feature chain.
    return {{4, 0}, {0, 1}, {1, 2}, {2, 3}};
  }

  FeatureSchema schema_;
  RegionTree tree_;
  Population population_;
};

TEST_F(MstModelTest, NoiselessTablesMatchEmpirical) {
  RandomSource rng(1);
  const double delta = 1.0 / (5000.0 * 5000.0);
  TreeModel model =
      MeasureAndFit(population_, ChainTree(), 1e6, delta, rng).value();
  EXPECT_EQ(model.root, 4);
  for (size_t e = 0; e < model.edges.size(); ++e) {
    const int columns[] = {model.edges[e].a, model.edges[e].b};
    ContingencyTable counts = JointCounts(population_, columns).value();
    for (double& v : counts.values) v /= population_.size();
    EXPECT_LE(TotalVariationDistance(model.edge_tables[e], counts).value(),
              1e-6);
  }
}

TEST_F(MstModelTest, TablesAreDistributionsWithConsistentMargins) {
  for (TableRepair repair :
       {TableRepair::kClampRenormalize, TableRepair::kL2Projection}) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      RandomSource rng(seed);
      TreeModel model = MeasureAndFit(population_, ChainTree(), 0.05, 1e-8,
                                      rng, nullptr, repair)
                            .value();
      for (size_t e = 0; e < model.edges.size(); ++e) {
        const ContingencyTable& t = model.edge_tables[e];
        EXPECT_NEAR(t.Total(), 1.0, 1e-9);
        const int rows = t.shape[0], cols = t.shape[1];
        std::vector<double> row_sum(rows, 0), col_sum(cols, 0);
        for (int i = 0; i < rows; ++i) {
          for (int j = 0; j < cols; ++j) {
            ASSERT_GE(t.values[i * cols + j], 0.0);
            row_sum[i] += t.values[i * cols + j];
            col_sum[j] += t.values[i * cols + j];
          }
        }
        for (int i = 0; i < rows; ++i) {
          EXPECT_NEAR(row_sum[i], model.node_marginals[model.edges[e].a][i],
                      1e-6);
        }
        for (int j = 0; j < cols; ++j) {
          EXPECT_NEAR(col_sum[j], model.node_marginals[model.edges[e].b][j],
                      1e-6);
        }
      }
      for (const auto& marginal : model.node_marginals) {
        EXPECT_NEAR(std::accumulate(marginal.begin(), marginal.end(), 0.0), 1.0,
                    1e-9);
      }
    }
  }
}

TEST_F(MstModelTest, LedgerChargesDeltaOnlyToMeasurement) {
  const double delta = 1.0 / (5000.0 * 5000.0);
  PrivacyBudget ledger = PrivacyBudget::Create(1.0, delta).value();
  MstResult result =
      RunMst(population_, 1.0, delta, MstOptions{}, 5, &ledger).value();
  EXPECT_NEAR(ledger.spent_epsilon(), 1.0, 1e-12);
  EXPECT_LE(ledger.spent_delta(), delta);
  EXPECT_EQ(result.synthetic.size(), population_.size());
}

TEST_F(MstModelTest, OverdraftIsRejected) {
  PrivacyBudget ledger = PrivacyBudget::Create(0.5, 1e-8).value();
  EXPECT_THAT(RunMst(population_, 1.0, 1e-8, MstOptions{}, 5, &ledger),
              StatusIs(absl::StatusCode::kResourceExhausted));
}

TEST(MstSamplingTest, SingleFeatureMarginal) {
  FeatureSchema schema = MakeSchema({2});
  RegionTree tree = MakeTree({2});
  TreeModel model{.schema = schema,
                  .tree = tree,
                  .root = 1,
                  .edges = {{1, 0}},
                  .edge_tables = {ContingencyTable{{2, 2}, {0.1, 0.4, 0.1, 0.4}}},
                  .node_marginals = {{0.2, 0.8}, {0.5, 0.5}},
                  .fallback_rows = 0};
  RandomSource rng(8);
  Population synthetic = SampleSynthetic(model, 100000, rng).value();
  double ones = 0;
  for (int64_t r = 0; r < synthetic.size(); ++r) ones += synthetic.value(r, 0);
  EXPECT_NEAR(ones / synthetic.size(), 0.8, 0.01);
}

TEST(MstSamplingTest, ZeroRowFallsBackToChildMarginal) {
  FeatureSchema schema = MakeSchema({2});
  RegionTree tree = MakeTree({2});
  TreeModel model{.schema = schema,
                  .tree = tree,
                  .root = 1,
                  .edges = {{1, 0}},
                  .edge_tables = {ContingencyTable{{2, 2}, {0.3, 0.2, 0.0, 0.0}}},
                  .node_marginals = {{0.6, 0.4}, {0.5, 0.5}},
                  .fallback_rows = 0};
  RandomSource rng(9);
  int64_t fallbacks = 0;
  Population synthetic = SampleSynthetic(model, 20000, rng, &fallbacks).value();
  EXPECT_GT(fallbacks, 9000);
  EXPECT_LT(fallbacks, 11000);
}

TEST_F(MstModelTest, NoiselessSamplesReproduceEdgeTables) {
  RandomSource rng(2);
  TreeModel model =
      MeasureAndFit(population_, ChainTree(), 1e6, 1e-8, rng).value();
  Population synthetic = SampleSynthetic(model, 100000, rng).value();
  for (size_t e = 0; e < model.edges.size(); ++e) {
    const int columns[] = {model.edges[e].a, model.edges[e].b};
    ContingencyTable counts = JointCounts(synthetic, columns).value();
    for (double& v : counts.values) v /= synthetic.size();
    EXPECT_LE(TotalVariationDistance(counts, model.edge_tables[e]).value(),
              0.01);
  }
}

TEST_F(MstModelTest, SyntheticAnswersSatisfyConstraints) {
  MstResult result = RunMst(population_, 0.5, 1e-8, MstOptions{}, 9).value();
  EXPECT_THAT(result.synthetic.Validate(), IsOk());
  QuerySplit split = SampleQuerySets(1, schema_, 2, 20, 0).value();
  AnswerTable table =
      Evaluate(result.synthetic, split.in_distribution).value();
  EXPECT_TRUE(ValidateConstraints(table).ok());
}

TEST_F(MstModelTest, DeterministicInSeedAcrossThreadCounts) {
  omp_set_num_threads(1);
  MstResult a = RunMst(population_, 1.0, 1e-8, MstOptions{}, 3).value();
  omp_set_num_threads(4);
  MstResult b = RunMst(population_, 1.0, 1e-8, MstOptions{}, 3).value();
  EXPECT_EQ(a.synthetic, b.synthetic);
  EXPECT_EQ(Normalized(a.selected), Normalized(b.selected));
}

TEST_F(MstModelTest, JsonDumpNamesEdges) {
  MstResult result = RunMst(population_, 1.0, 1e-8, MstOptions{}, 3).value();
  const std::string json = TreeModelToJson(result.model);
  EXPECT_THAT(json, ::testing::HasSubstr("\"<region>\""));
  EXPECT_THAT(json, ::testing::HasSubstr("\"edges\""));
}

}  // namespace
}  // namespace census_dp
