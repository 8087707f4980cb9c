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

#ifndef CENSUS_DP_POPULATION_H_
#define CENSUS_DP_POPULATION_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "census_dp/schema.h"

namespace census_dp {

// The record table D. Each record holds M feature values and the ordinal of
// its leaf region; ancestor regions are derived from the tree, never stored.
// Immutable after construction.
class Population {
 public:
  // `features` is row-major, n x M. `leaf_ordinals[i]` indexes
  // tree.leaves(). Runs Validate() before returning.
  static absl::StatusOr<Population> Create(FeatureSchema schema,
                                           RegionTree tree,
                                           std::vector<int64_t> person_ids,
                                           std::vector<int> features,
                                           std::vector<int> leaf_ordinals);

  int64_t size() const { return static_cast<int64_t>(leaf_ordinals_.size()); }
  int num_features() const { return schema_.num_features(); }
  const FeatureSchema& schema() const { return schema_; }
  const RegionTree& tree() const { return tree_; }

  int64_t person_id(int64_t row) const { return person_ids_[row]; }
  int value(int64_t row, int feature) const {
    return features_[row * num_features() + feature];
  }
  std::span<const int> row(int64_t row) const {
    return std::span<const int>(features_).subspan(row * num_features(),
                                                   num_features());
  }
  int leaf_ordinal(int64_t row) const { return leaf_ordinals_[row]; }
  int region_node(int64_t row) const {
    return tree_.leaf_node(leaf_ordinals_[row]);
  }

  std::span<const int> feature_data() const { return features_; }
  std::span<const int> leaf_data() const { return leaf_ordinals_; }

  // Full re-validation: n >= 1, domains, leaf regions, unique person ids.
  absl::Status Validate() const;

  bool operator==(const Population&) const = default;

 private:
  Population(FeatureSchema schema, RegionTree tree,
             std::vector<int64_t> person_ids, std::vector<int> features,
             std::vector<int> leaf_ordinals)
      : schema_(std::move(schema)),
        tree_(std::move(tree)),
        person_ids_(std::move(person_ids)),
        features_(std::move(features)),
        leaf_ordinals_(std::move(leaf_ordinals)) {}

  FeatureSchema schema_;
  RegionTree tree_;
  std::vector<int64_t> person_ids_;
  std::vector<int> features_;
  std::vector<int> leaf_ordinals_;
};

// Column index that addresses the region (as a leaf ordinal) wherever a
// function accepts either a feature index or the region.
inline int RegionColumn(const FeatureSchema& schema) {
  return schema.num_features();
}
int ColumnDomainSize(const Population& population, int column);
int ColumnValue(const Population& population, int64_t row, int column);

// CSV with a header row naming every schema feature plus `region_column`
// (any order, no extra columns). Feature cells are integers; region cells are
// leaf region ids. Person ids are assigned 0..n-1 in row order.
absl::StatusOr<Population> ParseCsv(std::istream& in,
                                    const FeatureSchema& schema,
                                    const std::string& region_column,
                                    const RegionTree& tree);
absl::StatusOr<Population> IngestCsv(const std::string& path,
                                     const FeatureSchema& schema,
                                     const std::string& region_column,
                                     const RegionTree& tree);

// Writes the ingestion format: schema features in order, then the region.
absl::Status WriteCsv(const Population& population, std::ostream& out,
                      const std::string& region_column = "region");
absl::Status WriteCsvFile(const Population& population, const std::string& path,
                          const std::string& region_column = "region");

// Planted-correlation population. Feature 0 is uniform; feature m > 0 copies
// (feature m-1 mod domain_size(m)) with probability `correlation` and is
// otherwise uniform. Regions follow a fixed categorical over leaves with
// weight proportional to (ordinal + 1), independent of the features.
absl::StatusOr<Population> GeneratePopulation(uint64_t seed, int64_t n,
                                              const FeatureSchema& schema,
                                              const RegionTree& tree,
                                              double correlation);

// Exact joint distribution of features (m-1, m) under the planted model,
// row-major over (value of m-1, value of m). Requires 1 <= m < M.
std::vector<double> PlantedPairDistribution(const FeatureSchema& schema,
                                            int m, double correlation);
// Exact marginal of feature m under the planted model.
std::vector<double> PlantedMarginal(const FeatureSchema& schema, int m,
                                    double correlation);
// Leaf-ordinal distribution used by the generator.
std::vector<double> PlantedRegionWeights(const RegionTree& tree);

}  // namespace census_dp

#endif  // CENSUS_DP_POPULATION_H_
