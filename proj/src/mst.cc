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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "census_dp/mechanisms.h"
#include "census_dp/simplex.h"
#include "census_dp/status_macros.h"
#include "json.hpp"

namespace census_dp {

double MutualInformationFromCounts(const ContingencyTable& counts) {
  const int rows = counts.shape[0];
  const int cols = counts.shape[1];
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = counts.values[i * cols + j];
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  }
  if (total <= 0.0) return 0.0;
  double mi = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = counts.values[i * cols + j];
      if (v <= 0.0) continue;
      // p(a,b) / (p(a) p(b)) = v * N / (r_i c_j)
      mi += (v / total) * std::log(v * total / (row_sum[i] * col_sum[j]));
    }
  }
  return std::max(mi, 0.0);
}

absl::StatusOr<double> MutualInformation(const Population& population,
                                         int column_a, int column_b) {
  if (column_a == column_b) {
    return absl::InvalidArgumentError(
        "mutual information needs two distinct columns");
  }
  const int columns[] = {column_a, column_b};
  ASSIGN_OR_RETURN(ContingencyTable counts, JointCounts(population, columns));
  return MutualInformationFromCounts(counts);
}

absl::StatusOr<CorrelationGraph> BuildCorrelationGraph(
    const Population& population) {
  const int num_nodes = population.num_features() + 1;
  std::vector<Edge> pairs;
  for (int a = 0; a < num_nodes; ++a) {
    for (int b = a + 1; b < num_nodes; ++b) pairs.push_back({a, b});
  }
  std::vector<double> weights(pairs.size());
  const int64_t num_pairs = static_cast<int64_t>(pairs.size());

#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < num_pairs; ++i) {
    weights[i] = MutualInformation(population, pairs[i].a, pairs[i].b).value();
  }
  CorrelationGraph graph(num_nodes);
  for (size_t i = 0; i < pairs.size(); ++i) {
    graph.set_weight(pairs[i].a, pairs[i].b, weights[i]);
  }
  return graph;
}

absl::StatusOr<std::vector<Edge>> SelectTree(const CorrelationGraph& graph,
                                             double epsilon, double sensitivity,
                                             RandomSource& rng) {
  const int n = graph.num_nodes();
  if (n < 2) {
    return absl::InvalidArgumentError("tree selection needs at least 2 nodes");
  }
  const double step_epsilon = epsilon / (n - 1);
  std::vector<int> component(n);
  std::iota(component.begin(), component.end(), 0);
  std::vector<Edge> selected;
  std::vector<Edge> candidates;
  std::vector<double> scores;
  for (int step = 0; step < n - 1; ++step) {
    candidates.clear();
    scores.clear();
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (component[a] == component[b]) continue;
        candidates.push_back({a, b});
        scores.push_back(graph.weight(a, b));
      }
    }
    ASSIGN_OR_RETURN(size_t pick, ExponentialMechanism(scores, sensitivity,
                                                       step_epsilon, rng));
    const Edge edge = candidates[pick];
    selected.push_back(edge);
    const int from = component[edge.b];
    const int to = component[edge.a];
    for (int& c : component) {
      if (c == from) c = to;
    }
  }
  return selected;
}

absl::StatusOr<std::vector<Edge>> OrientTree(std::span<const Edge> edges,
                                             int num_nodes, int root) {
  if (static_cast<int>(edges.size()) != num_nodes - 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "a spanning tree over ", num_nodes, " nodes needs ", num_nodes - 1,
        " edges, got ", edges.size()));
  }
  std::vector<std::vector<int>> adjacency(num_nodes);
  for (const Edge& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= num_nodes || e.b >= num_nodes ||
        e.a == e.b) {
      return absl::InvalidArgumentError("tree edge endpoint out of range");
    }
    adjacency[e.a].push_back(e.b);
    adjacency[e.b].push_back(e.a);
  }
  for (auto& list : adjacency) std::sort(list.begin(), list.end());
  std::vector<bool> visited(num_nodes, false);
  std::vector<int> queue = {root};
  visited[root] = true;
  std::vector<Edge> oriented;
  for (size_t head = 0; head < queue.size(); ++head) {
    const int node = queue[head];
    for (int next : adjacency[node]) {
      if (visited[next]) continue;
      visited[next] = true;
      oriented.push_back({node, next});
      queue.push_back(next);
    }
  }
  if (static_cast<int>(queue.size()) != num_nodes) {
    return absl::InvalidArgumentError("edges do not form a spanning tree");
  }
  return oriented;
}

namespace {

void RepairTable(std::vector<double>& values, double total,
                 TableRepair repair) {
  if (repair == TableRepair::kL2Projection) {
    values = ProjectOntoScaledSimplex(values, total);
  } else {
    for (double& v : values) v = std::max(v, 0.0);
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  if (sum <= 0.0) {
    std::fill(values.begin(), values.end(), 1.0 / values.size());
    return;
  }
  for (double& v : values) v /= sum;
}

}  // namespace

absl::StatusOr<TreeModel> MeasureAndFit(const Population& population,
                                        std::span<const Edge> tree_edges,
                                        double epsilon, double delta,
                                        RandomSource& rng,
                                        PrivacyBudget* ledger,
                                        TableRepair repair) {
  const int num_nodes = population.num_features() + 1;
  const int root = RegionColumn(population.schema());
  ASSIGN_OR_RETURN(std::vector<Edge> edges,
                   OrientTree(tree_edges, num_nodes, root));
  const double edge_epsilon = epsilon / static_cast<double>(edges.size());
  const double edge_delta = delta / static_cast<double>(edges.size());
  ASSIGN_OR_RETURN(GaussianMechanism mechanism,
                   GaussianMechanism::Create(1.0, edge_epsilon, edge_delta));
  if (ledger != nullptr) RETURN_IF_ERROR(ledger->Spend(epsilon, delta));

  // Noisy, repaired joint distributions in edge order.
  std::vector<ContingencyTable> noisy(edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    const int columns[] = {edges[e].a, edges[e].b};
    ASSIGN_OR_RETURN(noisy[e], JointCounts(population, columns));
    RandomSource edge_rng = rng.Substream(e);
    for (double& v : noisy[e].values) v += mechanism.SampleNoise(edge_rng);
    RepairTable(noisy[e].values, static_cast<double>(population.size()),
                repair);
  }

  TreeModel model{.schema = population.schema(),
                  .tree = population.tree(),
                  .root = root,
                  .edges = edges,
                  .edge_tables = {},
                  .node_marginals = std::vector<std::vector<double>>(num_nodes),
                  .fallback_rows = 0};

  // The root marginal comes from the first edge leaving the root.
  {
    const ContingencyTable& first = noisy.front();
    std::vector<double>& pi = model.node_marginals[root];
    pi.assign(first.shape[0], 0.0);
    for (int i = 0; i < first.shape[0]; ++i) {
      for (int j = 0; j < first.shape[1]; ++j) {
        pi[i] += first.values[i * first.shape[1] + j];
      }
    }
  }
  for (size_t e = 0; e < edges.size(); ++e) {
    const ContingencyTable& table = noisy[e];
    const int rows = table.shape[0];
    const int cols = table.shape[1];
    std::vector<double> child_fallback(cols, 0.0);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) child_fallback[j] += table.values[i * cols + j];
    }
    const std::vector<double>& parent = model.node_marginals[edges[e].a];
    ContingencyTable fitted{table.shape, std::vector<double>(table.size(), 0.0)};
    std::vector<double> child(cols, 0.0);
    for (int i = 0; i < rows; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < cols; ++j) row_sum += table.values[i * cols + j];
      for (int j = 0; j < cols; ++j) {
        const double conditional = row_sum > 0.0
                                       ? table.values[i * cols + j] / row_sum
                                       : child_fallback[j];
        fitted.values[i * cols + j] = parent[i] * conditional;
        child[j] += fitted.values[i * cols + j];
      }
      if (row_sum <= 0.0) ++model.fallback_rows;
    }
    model.node_marginals[edges[e].b] = std::move(child);
    model.edge_tables.push_back(std::move(fitted));
  }
  return model;
}

absl::StatusOr<Population> SampleSynthetic(const TreeModel& model,
                                           int64_t n_out, RandomSource& rng,
                                           int64_t* fallback_count) {
  if (n_out < 1) {
    return absl::InvalidArgumentError("synthetic population size must be >= 1");
  }
  const int m = model.schema.num_features();
  const int num_nodes = m + 1;
  if (static_cast<int>(model.node_marginals.size()) != num_nodes ||
      model.edges.size() != model.edge_tables.size()) {
    return absl::InvalidArgumentError("malformed tree model");
  }
  constexpr int64_t kChunk = 4096;
  const int64_t num_chunks = (n_out + kChunk - 1) / kChunk;
  const RandomSource base = rng.Substream("mst/sample");
  std::vector<int64_t> ids(n_out);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> features(static_cast<size_t>(n_out) * m);
  std::vector<int> leaves(n_out);
  int64_t fallbacks = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : fallbacks)
  for (int64_t chunk = 0; chunk < num_chunks; ++chunk) {
    RandomSource chunk_rng = base.Substream(static_cast<uint64_t>(chunk));
    std::vector<int> value(num_nodes);
    const int64_t end = std::min(n_out, (chunk + 1) * kChunk);
    for (int64_t r = chunk * kChunk; r < end; ++r) {
      value[model.root] =
          static_cast<int>(chunk_rng.Categorical(model.node_marginals[model.root]));
      for (size_t e = 0; e < model.edges.size(); ++e) {
        const ContingencyTable& table = model.edge_tables[e];
        const int cols = table.shape[1];
        std::span<const double> row = std::span<const double>(table.values)
                                          .subspan(value[model.edges[e].a] * cols,
                                                   cols);
        double row_sum = 0.0;
        for (double v : row) row_sum += v;
        if (row_sum > 0.0) {
          value[model.edges[e].b] = static_cast<int>(chunk_rng.Categorical(row));
        } else {
          ++fallbacks;
          value[model.edges[e].b] = static_cast<int>(
              chunk_rng.Categorical(model.node_marginals[model.edges[e].b]));
        }
      }
      std::copy(value.begin(), value.begin() + m, features.begin() + r * m);
      leaves[r] = value[m];
    }
  }
  if (fallback_count != nullptr) *fallback_count = fallbacks;
  return Population::Create(model.schema, model.tree, std::move(ids),
                            std::move(features), std::move(leaves));
}

absl::StatusOr<MstResult> RunMst(const Population& population, double epsilon,
                                 double delta, const MstOptions& options,
                                 uint64_t seed, PrivacyBudget* ledger) {
  if (!(options.selection_fraction > 0.0 && options.selection_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        "MST selection fraction must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError("MST epsilon must be positive");
  }
  const double selection_epsilon = epsilon * options.selection_fraction;
  const double measurement_epsilon = epsilon - selection_epsilon;
  // Validate the measurement parameters before spending anything.
  RETURN_IF_ERROR(
      GaussianSigma(1.0, measurement_epsilon, delta).status());

  RandomSource rng = RandomSource(seed).Substream("mst");
  ASSIGN_OR_RETURN(CorrelationGraph graph, BuildCorrelationGraph(population));
  if (ledger != nullptr) RETURN_IF_ERROR(ledger->Spend(selection_epsilon, 0.0));
  RandomSource select_rng = rng.Substream("select");
  ASSIGN_OR_RETURN(std::vector<Edge> selected,
                   SelectTree(graph, selection_epsilon, options.mi_sensitivity,
                              select_rng));
  RandomSource measure_rng = rng.Substream("measure");
  ASSIGN_OR_RETURN(TreeModel model,
                   MeasureAndFit(population, selected, measurement_epsilon,
                                 delta, measure_rng, ledger, options.repair));
  RandomSource sample_rng = rng.Substream("sample");
  ASSIGN_OR_RETURN(
      Population synthetic,
      SampleSynthetic(model,
                      options.n_out > 0 ? options.n_out : population.size(),
                      sample_rng));
  return MstResult{std::move(selected), std::move(model), std::move(synthetic)};
}

std::string TreeModelToJson(const TreeModel& model) {
  auto column_name = [&model](int column) -> std::string {
    return column == model.schema.num_features()
               ? std::string("<region>")
               : model.schema.feature(column).name;
  };
  nlohmann::json doc;
  doc["root"] = column_name(model.root);
  doc["fallback_rows"] = model.fallback_rows;
  nlohmann::json edges = nlohmann::json::array();
  for (size_t e = 0; e < model.edges.size(); ++e) {
    edges.push_back({{"parent", column_name(model.edges[e].a)},
                     {"child", column_name(model.edges[e].b)},
                     {"shape", model.edge_tables[e].shape},
                     {"table", model.edge_tables[e].values}});
  }
  doc["edges"] = std::move(edges);
  nlohmann::json marginals = nlohmann::json::object();
  for (size_t c = 0; c < model.node_marginals.size(); ++c) {
    marginals[column_name(static_cast<int>(c))] = model.node_marginals[c];
  }
  doc["node_marginals"] = std::move(marginals);
  return doc.dump(2);
}

}  // namespace census_dp
