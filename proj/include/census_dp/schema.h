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

#ifndef CENSUS_DP_SCHEMA_H_
#define CENSUS_DP_SCHEMA_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace census_dp {

struct Feature {
  std::string name;
  int domain_size = 0;

  bool operator==(const Feature&) const = default;
};

// Ordered list of pre-discretized features. Values of feature m are the
// integers 0..domain_size(m)-1.
class FeatureSchema {
 public:
  // Requires at least one feature, unique names and every domain size >= 2.
  static absl::StatusOr<FeatureSchema> Create(std::vector<Feature> features);

  int num_features() const { return static_cast<int>(features_.size()); }
  const Feature& feature(int index) const { return features_[index]; }
  int domain_size(int index) const { return features_[index].domain_size; }
  const std::vector<Feature>& features() const { return features_; }

  std::optional<int> Find(std::string_view name) const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  explicit FeatureSchema(std::vector<Feature> features)
      : features_(std::move(features)) {}

  std::vector<Feature> features_;
};

// The region hierarchy. Nodes are re-indexed in breadth-first order
// at construction, so every level, every sibling group and the leaves under
// any node occupy contiguous index ranges.
class RegionTree {
 public:
  struct NodeSpec {
    std::string id;
    std::optional<std::string> parent;

    bool operator==(const NodeSpec&) const = default;
  };

  // Validates: exactly one root, unique ids, known parents, no cycles, all
  // leaves at the same depth.
  static absl::StatusOr<RegionTree> Create(const std::vector<NodeSpec>& nodes);

  // Builds a complete tree. fanout[l] is the number of children of every node
  // at level l. Node ids are `root_id`, `root_id.0`, `root_id.0.3`, ...
  static absl::StatusOr<RegionTree> Complete(std::string_view root_id,
                                             const std::vector<int>& fanout);

  int num_nodes() const { return static_cast<int>(ids_.size()); }
  // Counts the root level.
  int num_levels() const { return static_cast<int>(level_begin_.size()) - 1; }
  int root() const { return 0; }

  const std::string& id(int node) const { return ids_[node]; }
  // -1 for the root.
  int parent(int node) const { return parent_[node]; }
  int level(int node) const { return level_[node]; }
  bool is_leaf(int node) const { return level_[node] == num_levels() - 1; }

  std::span<const int> children(int node) const;
  // Node indices at level `l` (0 is the root level).
  std::span<const int> level_nodes(int l) const;
  std::span<const int> leaves() const { return level_nodes(num_levels() - 1); }
  int num_leaves() const { return static_cast<int>(leaves().size()); }

  // Position of a leaf within leaves(); node index for a leaf ordinal.
  int leaf_ordinal(int node) const { return node - leaves().front(); }
  int leaf_node(int ordinal) const { return leaves().front() + ordinal; }
  // Half-open range of leaf ordinals under `node` (itself, for a leaf).
  int leaf_begin(int node) const { return leaf_begin_[node]; }
  int leaf_end(int node) const { return leaf_end_[node]; }

  std::optional<int> Find(std::string_view id) const;

  // Specs in breadth-first order; Create(ToSpecs()) reproduces this tree.
  std::vector<NodeSpec> ToSpecs() const;

  bool operator==(const RegionTree& other) const {
    return ids_ == other.ids_ && parent_ == other.parent_;
  }

 private:
  RegionTree() = default;

  std::vector<std::string> ids_;
  std::vector<int> parent_;
  std::vector<int> level_;
  std::vector<int> order_;  // node indices 0..N-1, sliced by the spans below
  std::vector<int> child_begin_;
  std::vector<int> child_end_;
  std::vector<int> level_begin_;  // size num_levels() + 1
  std::vector<int> leaf_begin_;
  std::vector<int> leaf_end_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace census_dp

#endif  // CENSUS_DP_SCHEMA_H_
