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

#include "census_dp/constraints.h"

#include <cmath>

#include "json.hpp"

namespace census_dp {

ConstraintReport ValidateConstraints(const AnswerTable& table) {
  ConstraintReport report;
  const RegionTree& tree = table.tree();
  for (size_t q = 0; q < table.num_queries(); ++q) {
    std::span<const double> row = table.row(q);
    for (double v : row) {
      if (!(v >= 0.0) || v != std::floor(v)) ++report.validity;
    }
    for (int node = 0; node < tree.num_nodes(); ++node) {
      if (tree.is_leaf(node)) continue;
      double sum = 0.0;
      for (int child : tree.children(node)) sum += row[child];
      if (sum != row[node]) ++report.consistency;
    }
    const double root = row[tree.root()];
    for (int level = 1; level < tree.num_levels(); ++level) {
      double sum = 0.0;
      for (int node : tree.level_nodes(level)) sum += row[node];
      if (sum != root) ++report.faithfulness;
    }
  }
  return report;
}

ConstraintReport ValidateConstraints(const AnswerTable& table,
                                     const AnswerTable& truth) {
  ConstraintReport report = ValidateConstraints(table);
  const int root = table.tree().root();
  if (!table.SameShape(truth)) {
    report.faithfulness += static_cast<int64_t>(table.num_queries());
    return report;
  }
  for (size_t q = 0; q < table.num_queries(); ++q) {
    if (table.at(q, root) != truth.at(q, root)) ++report.faithfulness;
  }
  return report;
}

std::string ConstraintReportToJson(const ConstraintReport& report) {
  nlohmann::json doc = {{"consistency", report.consistency},
                        {"validity", report.validity},
                        {"faithfulness", report.faithfulness},
                        {"total", report.total()}};
  return doc.dump(2);
}

}  // namespace census_dp
