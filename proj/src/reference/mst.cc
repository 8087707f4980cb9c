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
#include "census_dp/status_macros.h"

namespace census_dp {
namespace reference {

absl::StatusOr<CorrelationGraph> BuildCorrelationGraph(
    const Population& population) {
  const int num_nodes = population.num_features() + 1;
  CorrelationGraph graph(num_nodes);
  for (int a = 0; a < num_nodes; ++a) {
    for (int b = a + 1; b < num_nodes; ++b) {
      ASSIGN_OR_RETURN(double mi, MutualInformation(population, a, b));
      graph.set_weight(a, b, mi);
    }
  }
  return graph;
}

}  // namespace reference
}  // namespace census_dp
