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

#include "census_dp/simplex.h"

#include <algorithm>
#include <functional>

namespace census_dp {

std::vector<double> ProjectOntoScaledSimplex(std::span<const double> point,
                                             double total) {
  const size_t n = point.size();
  std::vector<double> x(n, 0.0);
  if (n == 0 || total <= 0.0) return x;
  std::vector<bool> active(n, true);
  size_t num_active = n;
  for (;;) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (active[i]) sum += point[i];
    }
    const double shift = (total - sum) / static_cast<double>(num_active);
    bool dropped = false;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      x[i] = point[i] + shift;
      if (x[i] < 0.0) {
        active[i] = false;
        x[i] = 0.0;
        --num_active;
        dropped = true;
      }
    }
    if (!dropped) break;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) x[i] = 0.0;
    }
  }
  return x;
}

void ProjectOntoProbabilitySimplex(std::span<double> point) {
  if (point.empty()) return;
  std::vector<double> sorted(point.begin(), point.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) threshold = candidate;
  }
  for (double& v : point) v = std::max(v - threshold, 0.0);
}

}  // namespace census_dp
