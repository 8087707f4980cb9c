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

#ifndef CENSUS_DP_QUERY_H_
#define CENSUS_DP_QUERY_H_

#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "census_dp/population.h"
#include "census_dp/schema.h"

namespace census_dp {

struct Predicate {
  int feature = 0;
  int value = 0;

  auto operator<=>(const Predicate&) const = default;
};

// A k-way conjunction of (feature = value) predicates. Predicates are kept
// sorted by feature, so two queries with the same predicate set compare
// equal regardless of construction order. The region is never a predicate.
class MarginalQuery {
 public:
  static absl::StatusOr<MarginalQuery> Create(std::vector<Predicate> predicates,
                                              const FeatureSchema& schema);

  int k() const { return static_cast<int>(predicates_.size()); }
  std::span<const Predicate> predicates() const { return predicates_; }

  bool Matches(std::span<const int> row) const {
    for (const Predicate& p : predicates_) {
      if (row[p.feature] != p.value) return false;
    }
    return true;
  }

  std::string DebugString(const FeatureSchema& schema) const;

  auto operator<=>(const MarginalQuery&) const = default;

 private:
  explicit MarginalQuery(std::vector<Predicate> predicates)
      : predicates_(std::move(predicates)) {}

  std::vector<Predicate> predicates_;
};

class QuerySet {
 public:
  // Rejects duplicate queries.
  static absl::StatusOr<QuerySet> Create(std::vector<MarginalQuery> queries);

  QuerySet() = default;

  size_t size() const { return queries_.size(); }
  bool empty() const { return queries_.empty(); }
  const MarginalQuery& operator[](size_t i) const { return queries_[i]; }
  auto begin() const { return queries_.begin(); }
  auto end() const { return queries_.end(); }

  bool operator==(const QuerySet&) const = default;

 private:
  explicit QuerySet(std::vector<MarginalQuery> queries)
      : queries_(std::move(queries)) {}

  std::vector<MarginalQuery> queries_;
};

// Dense |Q| x |nodes| matrix of answers, one row per query, one column per
// region-tree node (in the tree's breadth-first index order).
class AnswerTable {
 public:
  AnswerTable(QuerySet queries, RegionTree tree);
  // For tables read back without their query definitions; queries() is
  // empty.
  AnswerTable(size_t num_queries, RegionTree tree);

  size_t num_queries() const { return num_queries_; }
  int num_nodes() const { return tree_.num_nodes(); }
  const QuerySet& queries() const { return queries_; }
  const RegionTree& tree() const { return tree_; }

  double at(size_t query, int node) const {
    return values_[query * num_nodes() + node];
  }
  double& at(size_t query, int node) {
    return values_[query * num_nodes() + node];
  }
  std::span<const double> row(size_t query) const {
    return std::span<const double>(values_).subspan(query * num_nodes(),
                                                    num_nodes());
  }
  std::span<double> row(size_t query) {
    return std::span<double>(values_).subspan(query * num_nodes(), num_nodes());
  }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool SameShape(const AnswerTable& other) const {
    return num_queries() == other.num_queries() && tree_ == other.tree_;
  }

  bool operator==(const AnswerTable&) const = default;

 private:
  QuerySet queries_;
  size_t num_queries_;
  RegionTree tree_;
  std::vector<double> values_;
};

// Ground-truth answers for every (query, node). Counts leaves once per query
// and aggregates bottom-up; parallel across queries.
absl::StatusOr<AnswerTable> Evaluate(const Population& population,
                                     const QuerySet& queries);

// Number of distinct k-way queries over the schema (saturates at UINT64_MAX).
uint64_t CountKWayQueries(const FeatureSchema& schema, int k);

struct QuerySplit {
  QuerySet in_distribution;
  QuerySet out_of_distribution;
};

// Draws count_in + count_out distinct k-way queries uniformly without
// replacement over all (feature subset, value assignment) combinations; the
// first count_in form the in-distribution set.
absl::StatusOr<QuerySplit> SampleQuerySets(uint64_t seed,
                                           const FeatureSchema& schema, int k,
                                           int64_t count_in, int64_t count_out);

// Row-major table over the value grid of a list of columns; used both for
// counts and for normalized probabilities.
struct ContingencyTable {
  std::vector<int> shape;
  std::vector<double> values;

  size_t size() const { return values.size(); }
  double Total() const;
  bool operator==(const ContingencyTable&) const = default;
};

// Counts over `columns`, which may include RegionColumn(schema) to address
// the leaf region.
absl::StatusOr<ContingencyTable> JointCounts(const Population& population,
                                             std::span<const int> columns);

// Normalized empirical distribution over a non-empty distinct feature
// subset.
absl::StatusOr<ContingencyTable> MarginalTable(
    const Population& population, std::span<const int> feature_subset);

// JSON: [[{"feature": name, "value": v}, ...], ...].
std::string QuerySetToJson(const QuerySet& queries,
                           const FeatureSchema& schema);
absl::StatusOr<QuerySet> QuerySetFromJson(const std::string& json,
                                          const FeatureSchema& schema);

// CSV with header query_id,region_id,value.
absl::Status WriteAnswerTableCsv(const AnswerTable& table, std::ostream& out);
// Reads the CSV back. Query ids must be 0..Q-1 and every (query, node) cell
// must appear exactly once.
absl::StatusOr<AnswerTable> ReadAnswerTableCsv(std::istream& in,
                                               const RegionTree& tree);

namespace reference {

// Serial kernel with the same leaf-count-then-aggregate structure.
absl::StatusOr<AnswerTable> Evaluate(const Population& population,
                                     const QuerySet& queries);

}  // namespace reference

}  // namespace census_dp

#endif  // CENSUS_DP_QUERY_H_
