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

#ifndef CENSUS_DP_CONFIG_H_
#define CENSUS_DP_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "census_dp/hpd.h"
#include "census_dp/mst.h"
#include "census_dp/population.h"
#include "census_dp/schema.h"

namespace census_dp {

enum class Algorithm { kTopDown, kMst, kHpdFixed };

std::string AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name);

struct GeneratorSpec {
  int64_t n = 10000;
  uint64_t seed = 0;
  double correlation = 0.6;
};

struct CsvSource {
  std::string path;
  std::string region_column = "region";
};

struct DatasetSpec {
  FeatureSchema schema;
  RegionTree tree;
  // Exactly one of these is set.
  std::optional<GeneratorSpec> generator;
  std::optional<CsvSource> csv;
};

struct QueryCounts {
  int64_t in = 0;
  int64_t out = 0;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Algorithm> algorithms = {};
  std::vector<double> epsilons = {};
  std::vector<int> k_values = {};
  std::map<int, QueryCounts> query_counts = {};
  int repetitions = 1;
  uint64_t base_seed = 0;
  // Unset means 1 / n^2.
  std::optional<double> delta = std::nullopt;
  std::string output_dir = "results";
  MstOptions mst = {};
  HpdOptions hpd = {};
};

// Schema document: [{"name": "age", "domain_size": 4}, ...].
absl::StatusOr<FeatureSchema> ParseSchemaJson(const std::string& json);

// Tree document: either {"root": "US", "fanout": [4, 5]} for a complete tree
// or {"nodes": [{"id": "US"}, {"id": "A", "parent": "US"}, ...]}.
absl::StatusOr<RegionTree> ParseTreeJson(const std::string& json);

// Parses and validates an experiment config. Unknown keys at any level are
// rejected. The accepted layout is documented in README.md.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const std::string& json);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// Generates or ingests the configured population.
absl::StatusOr<Population> LoadDataset(const DatasetSpec& dataset);

}  // namespace census_dp

#endif  // CENSUS_DP_CONFIG_H_
