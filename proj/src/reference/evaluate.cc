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

#include "absl/strings/str_cat.h"
#include "census_dp/query.h"

namespace census_dp::reference {

absl::StatusOr<AnswerTable> Evaluate(const Population& population,
                                     const QuerySet& queries) {
  const FeatureSchema& schema = population.schema();
  const RegionTree& tree = population.tree();
  AnswerTable table(queries, tree);
  std::vector<double> leaf_counts(tree.num_leaves());
  for (size_t q = 0; q < queries.size(); ++q) {
    for (const Predicate& p : queries[q].predicates()) {
      if (p.feature >= schema.num_features() ||
          p.value >= schema.domain_size(p.feature)) {
        return absl::InvalidArgumentError(
            absl::StrCat("schema mismatch in query ", q));
      }
    }
    std::fill(leaf_counts.begin(), leaf_counts.end(), 0.0);
    for (int64_t r = 0; r < population.size(); ++r) {
      if (queries[q].Matches(population.row(r))) {
        leaf_counts[population.leaf_ordinal(r)] += 1.0;
      }
    }
    for (int leaf = 0; leaf < tree.num_leaves(); ++leaf) {
      table.at(q, tree.leaf_node(leaf)) = leaf_counts[leaf];
    }
    for (int level = tree.num_levels() - 2; level >= 0; --level) {
      for (int node : tree.level_nodes(level)) {
        double sum = 0.0;
        for (int child : tree.children(node)) sum += table.at(q, child);
        table.at(q, node) = sum;
      }
    }
  }
  return table;
}

}  // namespace census_dp::reference
