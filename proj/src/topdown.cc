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

#include "census_dp/topdown.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "census_dp/mechanisms.h"
#include "census_dp/random.h"
#include "census_dp/simplex.h"
#include "census_dp/status_macros.h"

namespace census_dp {

double TopDownNoiseScale(int num_levels, double epsilon) {
  return 2.0 * num_levels / epsilon;
}

absl::StatusOr<NoisyAnswerTable> AddNoise(const AnswerTable& truth,
                                          const TopDownConfig& config) {
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("TopDown epsilon must be positive, got ", config.epsilon));
  }
  ASSIGN_OR_RETURN(
      DoubleGeometricMechanism mechanism,
      DoubleGeometricMechanism::Create(
          TopDownNoiseScale(truth.tree().num_levels(), config.epsilon)));
  AnswerTable noisy = truth;
  const RandomSource base = RandomSource(config.seed).Substream("topdown/noise");
  const int64_t num_queries = static_cast<int64_t>(truth.num_queries());

#pragma omp parallel for schedule(static)
  for (int64_t q = 0; q < num_queries; ++q) {
    RandomSource rng = base.Substream(static_cast<uint64_t>(q));
    for (double& cell : noisy.row(q)) {
      cell += static_cast<double>(mechanism.Sample(rng));
    }
  }
  return NoisyAnswerTable(std::move(noisy));
}

std::vector<double> ProjectChildren(std::span<const double> noisy_children,
                                    double parent_value) {
  return ProjectOntoScaledSimplex(noisy_children, std::max(parent_value, 0.0));
}

absl::StatusOr<std::vector<int64_t>> RoundPreservingSum(
    std::span<const double> values, int64_t target_sum) {
  const size_t n = values.size();
  if (target_sum < 0) {
    return absl::InvalidArgumentError("target sum must be non-negative");
  }
  if (n == 0) {
    if (target_sum == 0) return std::vector<int64_t>();
    return absl::InvalidArgumentError("cannot reach a positive sum with no values");
  }
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("values must be finite and non-negative, got ", v));
    }
    sum += v;
  }
  if (std::abs(sum - static_cast<double>(target_sum)) >=
      static_cast<double>(n)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "values sum to ", sum, ", too far from target ", target_sum,
        " for largest-remainder rounding"));
  }

  std::vector<int64_t> out(n);
  std::vector<double> fraction(n);
  int64_t floor_sum = 0;
  for (size_t i = 0; i < n; ++i) {
    const double f = std::floor(values[i]);
    out[i] = static_cast<int64_t>(f);
    fraction[i] = values[i] - f;
    floor_sum += out[i];
  }
  int64_t remaining = target_sum - floor_sum;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (remaining > 0) {
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return fraction[a] > fraction[b];
    });
    for (size_t i = 0; remaining > 0; i = (i + 1) % n, --remaining) {
      ++out[order[i]];
    }
  } else if (remaining < 0) {
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return fraction[a] < fraction[b];
    });
    while (remaining < 0) {
      bool progressed = false;
      for (size_t i = 0; i < n && remaining < 0; ++i) {
        if (out[order[i]] > 0) {
          --out[order[i]];
          ++remaining;
          progressed = true;
        }
      }
      if (!progressed) {
        return absl::InternalError("rounding could not reach the target sum");
      }
    }
  }
  return out;
}

namespace {

absl::Status CheckPostProcessInputs(const NoisyAnswerTable& noisy,
                                    const AnswerTable& truth) {
  if (!noisy.table().SameShape(truth)) {
    return absl::InvalidArgumentError(
        "noisy and truth tables have different shapes");
  }
  const int root = truth.tree().root();
  for (size_t q = 0; q < truth.num_queries(); ++q) {
    const double g = truth.at(q, root);
    if (!(g >= 0.0) || g != std::floor(g)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "true root total for query ", q, " is not a non-negative integer"));
    }
  }
  return absl::OkStatus();
}

absl::Status PostProcessQuery(const RegionTree& tree,
                              std::span<const double> noisy, double root_total,
                              std::span<double> out) {
  out[tree.root()] = root_total;
  std::vector<double> children;
  for (int level = 0; level + 1 < tree.num_levels(); ++level) {
    for (int node : tree.level_nodes(level)) {
      std::span<const int> kids = tree.children(node);
      children.clear();
      for (int child : kids) children.push_back(noisy[child]);
      const std::vector<double> projected = ProjectChildren(children, out[node]);
      ASSIGN_OR_RETURN(
          std::vector<int64_t> rounded,
          RoundPreservingSum(projected, static_cast<int64_t>(out[node])));
      for (size_t i = 0; i < kids.size(); ++i) {
        out[kids[i]] = static_cast<double>(rounded[i]);
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<AnswerTable> PostProcess(const NoisyAnswerTable& noisy,
                                        const AnswerTable& truth) {
  RETURN_IF_ERROR(CheckPostProcessInputs(noisy, truth));
  AnswerTable released(truth.queries(), truth.tree());
  const RegionTree& tree = truth.tree();
  const int64_t num_queries = static_cast<int64_t>(truth.num_queries());
  std::vector<absl::Status> statuses(num_queries);

#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t q = 0; q < num_queries; ++q) {
    statuses[q] = PostProcessQuery(tree, noisy.table().row(q),
                                   truth.at(q, tree.root()), released.row(q));
  }
  for (const absl::Status& status : statuses) RETURN_IF_ERROR(status);
  return released;
}

absl::StatusOr<AnswerTable> RunTopDown(const AnswerTable& truth,
                                       const TopDownConfig& config,
                                       PrivacyBudget* ledger) {
  if (ledger != nullptr) RETURN_IF_ERROR(ledger->Spend(config.epsilon, 0.0));
  ASSIGN_OR_RETURN(NoisyAnswerTable noisy, AddNoise(truth, config));
  return PostProcess(noisy, truth);
}

}  // namespace census_dp
