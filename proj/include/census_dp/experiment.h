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

#ifndef CENSUS_DP_EXPERIMENT_H_
#define CENSUS_DP_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "census_dp/config.h"

namespace census_dp {

// One row of results.csv. A missing value is written as "null".
struct RunRecord {
  Algorithm algorithm = Algorithm::kTopDown;
  double epsilon = 0.0;
  int k = 0;
  // "in", "out", or "all" for whole-population quality metrics.
  std::string distribution;
  int repetition = 0;
  std::string metric;
  std::optional<double> value;
};

struct LedgerAudit {
  double epsilon_budget = 0.0;
  double delta_budget = 0.0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
  bool within_budget = true;
};

// Means over the successful repetitions of one (algorithm, epsilon, k) cell.
struct CellSummary {
  Algorithm algorithm = Algorithm::kTopDown;
  double epsilon = 0.0;
  int k = 0;
  int successful_repetitions = 0;
  // Keys are "<distribution>/<metric>", e.g. "in/mean_abs_error".
  std::map<std::string, double> means;

  // Returns NaN for an absent key.
  double mean(const std::string& key) const;
};

struct ExperimentOutputs {
  std::string results_csv;
  std::string summary_json;
  // File name under cdf/ -> contents.
  std::map<std::string, std::string> cdf_files;
  std::vector<CellSummary> cells;
  int64_t num_runs = 0;
  int64_t num_failures = 0;
  double delta = 0.0;

  const CellSummary* FindCell(Algorithm algorithm, double epsilon, int k) const;
};

// Per-run seed derived from the base seed and the run coordinates.
uint64_t DeriveRunSeed(uint64_t base_seed, Algorithm algorithm, double epsilon,
                       int k, int repetition);

// Number of concurrent runs: CENSUS_DP_WORKERS when set to a positive
// integer, otherwise the OpenMP default.
int ExperimentWorkers();

// Runs every (algorithm, epsilon, k, repetition) in parallel and aggregates
// the results single-threaded in a fixed order. A failing run adds a
// "failure" row and an entry under "failures" in the summary; other runs
// proceed.
absl::StatusOr<ExperimentOutputs> RunExperiment(const ExperimentConfig& config);

// Writes results.csv, summary.json and cdf/*.csv under `directory`.
absl::Status WriteExperimentOutputs(const ExperimentOutputs& outputs,
                                    const std::string& directory);

}  // namespace census_dp

#endif  // CENSUS_DP_EXPERIMENT_H_
