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

#ifndef CENSUS_DP_MST_H_
#define CENSUS_DP_MST_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "census_dp/population.h"
#include "census_dp/privacy_budget.h"
#include "census_dp/query.h"
#include "census_dp/random.h"

namespace census_dp {

// Nodes are the population columns: features 0..M-1 and the region at M.
// Weights are pairwise mutual information in nats.
class CorrelationGraph {
 public:
  explicit CorrelationGraph(int num_nodes)
      : num_nodes_(num_nodes), weights_(num_nodes * num_nodes, 0.0) {}

  int num_nodes() const { return num_nodes_; }
  double weight(int a, int b) const { return weights_[a * num_nodes_ + b]; }
  void set_weight(int a, int b, double w) {
    weights_[a * num_nodes_ + b] = w;
    weights_[b * num_nodes_ + a] = w;
  }

  bool operator==(const CorrelationGraph&) const = default;

 private:
  int num_nodes_;
  std::vector<double> weights_;
};

struct Edge {
  int a = 0;
  int b = 0;

  bool operator==(const Edge&) const = default;
};

// I(A;B) = sum p(a,b) ln(p(a,b) / (p(a) p(b))) over a two-way count table,
// with 0 ln 0 = 0.
double MutualInformationFromCounts(const ContingencyTable& counts);

// Columns may include RegionColumn(schema).
absl::StatusOr<double> MutualInformation(const Population& population,
                                         int column_a, int column_b);

// All pairwise MI values; parallel across pairs.
absl::StatusOr<CorrelationGraph> BuildCorrelationGraph(
    const Population& population);

// Private Kruskal-style spanning tree: each of the (nodes - 1) steps runs the
// exponential mechanism over every edge joining two different components,
// scored by weight, with per-step epsilon = epsilon / (nodes - 1).
absl::StatusOr<std::vector<Edge>> SelectTree(const CorrelationGraph& graph,
                                             double epsilon, double sensitivity,
                                             RandomSource& rng);

enum class TableRepair { kClampRenormalize, kL2Projection };

// Tree-structured distribution rooted at the region column. `edges` are
// oriented (parent, child) and listed so each parent precedes its children.
struct TreeModel {
  FeatureSchema schema;
  RegionTree tree;
  int root = 0;
  std::vector<Edge> edges;
  // edge_tables[e] has shape (domain(parent), domain(child)) and equals
  // marginal(parent) * P(child | parent).
  std::vector<ContingencyTable> edge_tables;
  // Indexed by column.
  std::vector<std::vector<double>> node_marginals;
  // Rows of a noisy table that were empty after repair and fell back to the
  // child's marginal.
  int64_t fallback_rows = 0;
};

// Orients an undirected spanning tree away from `root`. Fails if `edges` is
// not a spanning tree over `num_nodes` nodes.
absl::StatusOr<std::vector<Edge>> OrientTree(std::span<const Edge> edges,
                                             int num_nodes, int root);

// Measures every edge's pairwise count table with the Gaussian mechanism
// (sensitivity 1; budget split evenly across edges), repairs each noisy table
// to a distribution, and derives consistent node marginals and edge tables by
// walking outward from the region node. Charges `ledger` when non-null.
absl::StatusOr<TreeModel> MeasureAndFit(const Population& population,
                                        std::span<const Edge> tree_edges,
                                        double epsilon, double delta,
                                        RandomSource& rng,
                                        PrivacyBudget* ledger = nullptr,
                                        TableRepair repair =
                                            TableRepair::kClampRenormalize);

// Ancestral sampling from the region root. Records are generated in chunks,
// each from its own sub-stream of `rng`; the output is independent of the
// thread count. `fallback_count`, when non-null, receives the number of draws
// that hit an all-zero conditional row.
absl::StatusOr<Population> SampleSynthetic(const TreeModel& model,
                                           int64_t n_out, RandomSource& rng,
                                           int64_t* fallback_count = nullptr);

struct MstOptions {
  double selection_fraction = 0.1;
  double mi_sensitivity = 1.0;
  TableRepair repair = TableRepair::kClampRenormalize;
  // 0 means "same size as the input".
  int64_t n_out = 0;
};

struct MstResult {
  std::vector<Edge> selected;
  TreeModel model;
  Population synthetic;
};

// Select, measure and fit, then sample. Charges selection epsilon (no delta)
// and measurement (epsilon, delta) to `ledger` when non-null.
absl::StatusOr<MstResult> RunMst(const Population& population, double epsilon,
                                 double delta, const MstOptions& options,
                                 uint64_t seed, PrivacyBudget* ledger = nullptr);

std::string TreeModelToJson(const TreeModel& model);

namespace reference {

absl::StatusOr<CorrelationGraph> BuildCorrelationGraph(
    const Population& population);

}  // namespace reference

}  // namespace census_dp

#endif  // CENSUS_DP_MST_H_
