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

#include "census_dp/schema.h"

#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace census_dp {

absl::StatusOr<FeatureSchema> FeatureSchema::Create(
    std::vector<Feature> features) {
  if (features.empty()) {
    return absl::InvalidArgumentError("schema must have at least one feature");
  }
  std::unordered_set<std::string> seen;
  for (const Feature& f : features) {
    if (f.name.empty()) {
      return absl::InvalidArgumentError("feature names must be non-empty");
    }
    if (!seen.insert(f.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate feature name '", f.name, "'"));
    }
    if (f.domain_size < 2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", f.name, "' has domain size ", f.domain_size,
          "; must be at least 2"));
    }
  }
  return FeatureSchema(std::move(features));
}

std::optional<int> FeatureSchema::Find(std::string_view name) const {
  for (int i = 0; i < num_features(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

absl::StatusOr<RegionTree> RegionTree::Create(
    const std::vector<NodeSpec>& nodes) {
  if (nodes.empty()) {
    return absl::InvalidArgumentError("region tree must have a root");
  }
  std::unordered_map<std::string, int> input_index;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (nodes[i].id.empty()) {
      return absl::InvalidArgumentError("region ids must be non-empty");
    }
    if (!input_index.emplace(nodes[i].id, i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate region id '", nodes[i].id, "'"));
    }
  }

  int root = -1;
  std::vector<std::vector<int>> input_children(nodes.size());
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (!nodes[i].parent.has_value()) {
      if (root != -1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "region tree has more than one root: '", nodes[root].id, "' and '",
            nodes[i].id, "'"));
      }
      root = i;
      continue;
    }
    auto it = input_index.find(*nodes[i].parent);
    if (it == input_index.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "region '", nodes[i].id, "' has unknown parent '", *nodes[i].parent,
          "'"));
    }
    input_children[it->second].push_back(i);
  }
  if (root == -1) {
    return absl::InvalidArgumentError("region tree has no root");
  }

  // Breadth-first relabeling; children keep their input order.
  RegionTree tree;
  std::vector<int> new_index(nodes.size(), -1);
  std::vector<int> bfs = {root};
  std::vector<int> depth = {0};
  new_index[root] = 0;
  for (size_t head = 0; head < bfs.size(); ++head) {
    for (int child : input_children[bfs[head]]) {
      new_index[child] = static_cast<int>(bfs.size());
      bfs.push_back(child);
      depth.push_back(depth[head] + 1);
    }
  }
  if (bfs.size() != nodes.size()) {
    return absl::InvalidArgumentError(
        "region tree contains nodes unreachable from the root (cycle)");
  }

  const int n = static_cast<int>(nodes.size());
  tree.ids_.resize(n);
  tree.parent_.assign(n, -1);
  tree.level_ = depth;
  tree.child_begin_.assign(n, 0);
  tree.child_end_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const NodeSpec& spec = nodes[bfs[i]];
    tree.ids_[i] = spec.id;
    if (spec.parent.has_value()) {
      tree.parent_[i] = new_index[input_index.at(*spec.parent)];
    }
  }
  tree.order_.resize(n);
  std::iota(tree.order_.begin(), tree.order_.end(), 0);
  // Children of each node are contiguous in BFS order.
  tree.child_end_.assign(n, -1);
  for (int i = n - 1; i >= 1; --i) {
    const int p = tree.parent_[i];
    tree.child_begin_[p] = i;
    if (tree.child_end_[p] == -1) tree.child_end_[p] = i + 1;
  }
  for (int i = 0; i < n; ++i) {
    if (tree.child_end_[i] == -1) tree.child_begin_[i] = tree.child_end_[i] = 0;
  }
  for (int i = 0; i < n; ++i) tree.index_.emplace(tree.ids_[i], i);

  const int max_depth = tree.level_.back();
  for (int i = 0; i < n; ++i) {
    if (tree.child_begin_[i] == tree.child_end_[i] &&
        tree.level_[i] != max_depth) {
      return absl::InvalidArgumentError(absl::StrCat(
          "leaf region '", tree.ids_[i], "' is at depth ", tree.level_[i],
          " but other leaves are at depth ", max_depth));
    }
  }
  tree.level_begin_.assign(max_depth + 2, n);
  for (int i = n - 1; i >= 0; --i) tree.level_begin_[tree.level_[i]] = i;

  const int first_leaf = tree.level_begin_[max_depth];
  tree.leaf_begin_.assign(n, 0);
  tree.leaf_end_.assign(n, 0);
  for (int i = n - 1; i >= 0; --i) {
    if (tree.level_[i] == max_depth) {
      tree.leaf_begin_[i] = i - first_leaf;
      tree.leaf_end_[i] = i - first_leaf + 1;
    } else {
      tree.leaf_begin_[i] = tree.leaf_begin_[tree.child_begin_[i]];
      tree.leaf_end_[i] = tree.leaf_end_[tree.child_end_[i] - 1];
    }
  }
  return tree;
}

absl::StatusOr<RegionTree> RegionTree::Complete(std::string_view root_id,
                                                const std::vector<int>& fanout) {
  std::vector<NodeSpec> specs = {{std::string(root_id), std::nullopt}};
  std::vector<std::string> frontier = {std::string(root_id)};
  for (int width : fanout) {
    if (width < 1) {
      return absl::InvalidArgumentError("fanout entries must be positive");
    }
    std::vector<std::string> next;
    for (const std::string& parent : frontier) {
      for (int c = 0; c < width; ++c) {
        std::string id = absl::StrCat(parent, ".", c);
        specs.push_back({id, parent});
        next.push_back(std::move(id));
      }
    }
    frontier = std::move(next);
  }
  return Create(specs);
}

std::span<const int> RegionTree::children(int node) const {
  return std::span<const int>(order_).subspan(
      child_begin_[node], child_end_[node] - child_begin_[node]);
}

std::span<const int> RegionTree::level_nodes(int l) const {
  return std::span<const int>(order_).subspan(
      level_begin_[l], level_begin_[l + 1] - level_begin_[l]);
}

std::optional<int> RegionTree::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<RegionTree::NodeSpec> RegionTree::ToSpecs() const {
  std::vector<NodeSpec> specs;
  specs.reserve(ids_.size());
  for (int i = 0; i < num_nodes(); ++i) {
    specs.push_back({ids_[i], parent_[i] < 0
                                  ? std::nullopt
                                  : std::optional<std::string>(ids_[parent_[i]])});
  }
  return specs;
}

}  // namespace census_dp
