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

#include <cmath>

#include "census_dp/status_macros.h"
#include "census_dp/topdown.h"

namespace census_dp::reference {

absl::StatusOr<AnswerTable> PostProcess(const NoisyAnswerTable& noisy,
                                        const AnswerTable& truth) {
  if (!noisy.table().SameShape(truth)) {
    return absl::InvalidArgumentError(
        "noisy and truth tables have different shapes");
  }
  const RegionTree& tree = truth.tree();
  AnswerTable released(truth.queries(), tree);
  for (size_t q = 0; q < truth.num_queries(); ++q) {
    const double g = truth.at(q, tree.root());
    if (!(g >= 0.0) || g != std::floor(g)) {
      return absl::InvalidArgumentError("true root total is not a count");
    }
    released.at(q, tree.root()) = g;
    for (int level = 0; level + 1 < tree.num_levels(); ++level) {
      for (int node : tree.level_nodes(level)) {
        std::vector<double> children;
        for (int child : tree.children(node)) {
          children.push_back(noisy.table().at(q, child));
        }
        const double parent = released.at(q, node);
        ASSIGN_OR_RETURN(std::vector<int64_t> rounded,
                         RoundPreservingSum(ProjectChildren(children, parent),
                                            static_cast<int64_t>(parent)));
        size_t i = 0;
        for (int child : tree.children(node)) {
          released.at(q, child) = static_cast<double>(rounded[i++]);
        }
      }
    }
  }
  return released;
}

}  // namespace census_dp::reference
