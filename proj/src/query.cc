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

#include "census_dp/query.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "census_dp/random.h"
#include "census_dp/status_macros.h"
#include "json.hpp"

namespace census_dp {

absl::StatusOr<MarginalQuery> MarginalQuery::Create(
    std::vector<Predicate> predicates, const FeatureSchema& schema) {
  if (predicates.empty()) {
    return absl::InvalidArgumentError("a marginal query needs k >= 1 predicates");
  }
  std::sort(predicates.begin(), predicates.end());
  for (size_t i = 0; i < predicates.size(); ++i) {
    const Predicate& p = predicates[i];
    if (p.feature < 0 || p.feature >= schema.num_features()) {
      return absl::InvalidArgumentError(
          absl::StrCat("predicate feature index ", p.feature, " out of range"));
    }
    if (p.value < 0 || p.value >= schema.domain_size(p.feature)) {
      return absl::OutOfRangeError(absl::StrCat(
          "predicate value ", p.value, " outside domain of feature '",
          schema.feature(p.feature).name, "'"));
    }
    if (i > 0 && predicates[i - 1].feature == p.feature) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", schema.feature(p.feature).name,
          "' appears twice in one query"));
    }
  }
  return MarginalQuery(std::move(predicates));
}

std::string MarginalQuery::DebugString(const FeatureSchema& schema) const {
  return absl::StrJoin(predicates_, " AND ",
                       [&schema](std::string* out, const Predicate& p) {
                         absl::StrAppend(out, schema.feature(p.feature).name,
                                         "=", p.value);
                       });
}

absl::StatusOr<QuerySet> QuerySet::Create(std::vector<MarginalQuery> queries) {
  std::set<MarginalQuery> seen;
  for (const MarginalQuery& q : queries) {
    if (!seen.insert(q).second) {
      return absl::InvalidArgumentError("query set contains a duplicate query");
    }
  }
  return QuerySet(std::move(queries));
}

AnswerTable::AnswerTable(QuerySet queries, RegionTree tree)
    : queries_(std::move(queries)),
      num_queries_(queries_.size()),
      tree_(std::move(tree)),
      values_(num_queries_ * tree_.num_nodes(), 0.0) {}

AnswerTable::AnswerTable(size_t num_queries, RegionTree tree)
    : num_queries_(num_queries),
      tree_(std::move(tree)),
      values_(num_queries_ * tree_.num_nodes(), 0.0) {}

namespace {

absl::Status CheckQueriesAgainstSchema(const QuerySet& queries,
                                       const FeatureSchema& schema) {
  for (size_t i = 0; i < queries.size(); ++i) {
    for (const Predicate& p : queries[i].predicates()) {
      if (p.feature >= schema.num_features() ||
          p.value >= schema.domain_size(p.feature)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "schema mismatch: query ", i, " references feature ", p.feature,
            " value ", p.value));
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<AnswerTable> Evaluate(const Population& population,
                                     const QuerySet& queries) {
  RETURN_IF_ERROR(CheckQueriesAgainstSchema(queries, population.schema()));
  const RegionTree& tree = population.tree();
  AnswerTable table(queries, tree);
  const int64_t num_queries = static_cast<int64_t>(queries.size());
  const int64_t n = population.size();
  const int first_leaf = tree.leaves().front();

#pragma omp parallel for schedule(dynamic, 4)
  for (int64_t q = 0; q < num_queries; ++q) {
    const MarginalQuery& query = queries[q];
    std::span<double> row = table.row(q);
    for (int64_t r = 0; r < n; ++r) {
      if (query.Matches(population.row(r))) {
        row[first_leaf + population.leaf_ordinal(r)] += 1.0;
      }
    }
    for (int node = first_leaf - 1; node >= 0; --node) {
      double sum = 0.0;
      for (int child : tree.children(node)) sum += row[child];
      row[node] = sum;
    }
  }
  return table;
}

namespace {

uint64_t SaturatingMul(uint64_t a, uint64_t b) {
  if (a != 0 && b > std::numeric_limits<uint64_t>::max() / a) {
    return std::numeric_limits<uint64_t>::max();
  }
  return a * b;
}

uint64_t SaturatingAdd(uint64_t a, uint64_t b) {
  return a > std::numeric_limits<uint64_t>::max() - b
             ? std::numeric_limits<uint64_t>::max()
             : a + b;
}

// Calls fn(subset) for each k-subset of [0, m) in lexicographic order.
template <typename Fn>
void ForEachSubset(int m, int k, Fn&& fn) {
  if (k > m || k < 1) return;
  std::vector<int> subset(k);
  for (int i = 0; i < k; ++i) subset[i] = i;
  for (;;) {
    fn(std::span<const int>(subset));
    int i = k - 1;
    while (i >= 0 && subset[i] == m - k + i) --i;
    if (i < 0) return;
    ++subset[i];
    for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
}

constexpr uint64_t kMaxSubsets = 10'000'000;

uint64_t Binomial(int m, int k) {
  if (k < 0 || k > m) return 0;
  uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // Exact at every step: result * (m - k + i) is divisible by i.
    const uint64_t numerator = SaturatingMul(result, m - k + i);
    if (numerator == std::numeric_limits<uint64_t>::max()) return numerator;
    result = numerator / i;
  }
  return result;
}

}  // namespace

uint64_t CountKWayQueries(const FeatureSchema& schema, int k) {
  if (Binomial(schema.num_features(), k) > kMaxSubsets) {
    return std::numeric_limits<uint64_t>::max();
  }
  uint64_t total = 0;
  ForEachSubset(schema.num_features(), k, [&](std::span<const int> subset) {
    uint64_t cells = 1;
    for (int f : subset) cells = SaturatingMul(cells, schema.domain_size(f));
    total = SaturatingAdd(total, cells);
  });
  return total;
}

absl::StatusOr<QuerySplit> SampleQuerySets(uint64_t seed,
                                           const FeatureSchema& schema, int k,
                                           int64_t count_in,
                                           int64_t count_out) {
  if (k < 1 || k > schema.num_features()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k must lie in [1, ", schema.num_features(), "], got ", k));
  }
  if (count_in < 0 || count_out < 0) {
    return absl::InvalidArgumentError("query counts must be non-negative");
  }
  if (Binomial(schema.num_features(), k) > kMaxSubsets) {
    return absl::UnimplementedError(
        "too many feature subsets to enumerate for this k");
  }
  std::vector<std::vector<int>> subsets;
  std::vector<uint64_t> cumulative;  // exclusive prefix sums of subset sizes
  uint64_t universe = 0;
  ForEachSubset(schema.num_features(), k, [&](std::span<const int> subset) {
    subsets.emplace_back(subset.begin(), subset.end());
    cumulative.push_back(universe);
    uint64_t cells = 1;
    for (int f : subset) cells = SaturatingMul(cells, schema.domain_size(f));
    universe = SaturatingAdd(universe, cells);
  });
  const uint64_t requested =
      static_cast<uint64_t>(count_in) + static_cast<uint64_t>(count_out);
  if (universe == std::numeric_limits<uint64_t>::max()) {
    return absl::UnimplementedError("k-way query universe overflows 64 bits");
  }
  if (requested > universe) {
    return absl::InvalidArgumentError(absl::StrCat(
        "requested ", requested, " distinct ", k, "-way queries but only ",
        universe, " exist"));
  }

  auto unrank = [&](uint64_t index) -> MarginalQuery {
    const size_t s =
        std::upper_bound(cumulative.begin(), cumulative.end(), index) -
        cumulative.begin() - 1;
    uint64_t offset = index - cumulative[s];
    std::vector<Predicate> predicates(k);
    for (int i = k - 1; i >= 0; --i) {
      const int f = subsets[s][i];
      const uint64_t d = schema.domain_size(f);
      predicates[i] = {f, static_cast<int>(offset % d)};
      offset /= d;
    }
    return MarginalQuery::Create(std::move(predicates), schema).value();
  };

  // Partial Fisher-Yates over the implicit array [0, universe).
  RandomSource rng = RandomSource(seed).Substream(
      absl::StrCat("sample_query_sets/k=", k));
  std::unordered_map<uint64_t, uint64_t> swapped;
  auto slot = [&swapped](uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<MarginalQuery> in;
  std::vector<MarginalQuery> out;
  in.reserve(count_in);
  out.reserve(count_out);
  for (uint64_t i = 0; i < requested; ++i) {
    const uint64_t j = i + rng.UniformInt(universe - i);
    const uint64_t picked = slot(j);
    swapped[j] = slot(i);
    (i < static_cast<uint64_t>(count_in) ? in : out).push_back(unrank(picked));
  }
  QuerySplit split;
  ASSIGN_OR_RETURN(split.in_distribution, QuerySet::Create(std::move(in)));
  ASSIGN_OR_RETURN(split.out_of_distribution, QuerySet::Create(std::move(out)));
  return split;
}

double ContingencyTable::Total() const {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

absl::StatusOr<ContingencyTable> JointCounts(const Population& population,
                                             std::span<const int> columns) {
  if (columns.empty()) {
    return absl::InvalidArgumentError("column subset must be non-empty");
  }
  const int region = RegionColumn(population.schema());
  std::vector<int> sorted(columns.begin(), columns.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return absl::InvalidArgumentError("column subset has duplicates");
  }
  ContingencyTable table;
  size_t cells = 1;
  for (int c : columns) {
    if (c < 0 || c > region) {
      return absl::InvalidArgumentError(
          absl::StrCat("column index ", c, " out of range"));
    }
    table.shape.push_back(ColumnDomainSize(population, c));
    cells *= table.shape.back();
  }
  table.values.assign(cells, 0.0);
  for (int64_t r = 0; r < population.size(); ++r) {
    size_t index = 0;
    for (size_t i = 0; i < columns.size(); ++i) {
      index = index * table.shape[i] + ColumnValue(population, r, columns[i]);
    }
    table.values[index] += 1.0;
  }
  return table;
}

absl::StatusOr<ContingencyTable> MarginalTable(
    const Population& population, std::span<const int> feature_subset) {
  for (int f : feature_subset) {
    if (f < 0 || f >= population.num_features()) {
      return absl::InvalidArgumentError(
          absl::StrCat("feature index ", f, " out of range"));
    }
  }
  ASSIGN_OR_RETURN(ContingencyTable table,
                   JointCounts(population, feature_subset));
  const double n = static_cast<double>(population.size());
  for (double& v : table.values) v /= n;
  return table;
}

std::string QuerySetToJson(const QuerySet& queries,
                           const FeatureSchema& schema) {
  nlohmann::json doc = nlohmann::json::array();
  for (const MarginalQuery& q : queries) {
    nlohmann::json conj = nlohmann::json::array();
    for (const Predicate& p : q.predicates()) {
      conj.push_back({{"feature", schema.feature(p.feature).name},
                      {"value", p.value}});
    }
    doc.push_back(std::move(conj));
  }
  return doc.dump(2);
}

absl::StatusOr<QuerySet> QuerySetFromJson(const std::string& json,
                                          const FeatureSchema& schema) {
  nlohmann::json doc = nlohmann::json::parse(json, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    return absl::InvalidArgumentError("query set JSON must be an array");
  }
  std::vector<MarginalQuery> queries;
  for (const nlohmann::json& conj : doc) {
    if (!conj.is_array()) {
      return absl::InvalidArgumentError("each query must be an array");
    }
    std::vector<Predicate> predicates;
    for (const nlohmann::json& p : conj) {
      if (!p.is_object() || p.size() != 2 || !p.contains("feature") ||
          !p.contains("value") || !p["feature"].is_string() ||
          !p["value"].is_number_integer()) {
        return absl::InvalidArgumentError(
            "predicates must be {\"feature\": name, \"value\": integer}");
      }
      std::optional<int> f = schema.Find(p["feature"].get<std::string>());
      if (!f.has_value()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "unknown feature '", p["feature"].get<std::string>(), "'"));
      }
      predicates.push_back({*f, p["value"].get<int>()});
    }
    ASSIGN_OR_RETURN(MarginalQuery q,
                     MarginalQuery::Create(std::move(predicates), schema));
    queries.push_back(std::move(q));
  }
  return QuerySet::Create(std::move(queries));
}

absl::Status WriteAnswerTableCsv(const AnswerTable& table, std::ostream& out) {
  out << "query_id,region_id,value\n";
  for (size_t q = 0; q < table.num_queries(); ++q) {
    for (int node = 0; node < table.num_nodes(); ++node) {
      out << q << "," << table.tree().id(node) << ","
          << absl::StrFormat("%.17g", table.at(q, node)) << "\n";
    }
  }
  if (!out) return absl::InternalError("failed writing answer table CSV");
  return absl::OkStatus();
}

absl::StatusOr<AnswerTable> ReadAnswerTableCsv(std::istream& in,
                                               const RegionTree& tree) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("answer table CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "query_id,region_id,value") {
    return absl::InvalidArgumentError(
        "answer table CSV header must be query_id,region_id,value");
  }
  struct Cell {
    size_t query;
    int node;
    double value;
  };
  std::vector<Cell> cells;
  size_t num_queries = 0;
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> parts = absl::StrSplit(line, ',');
    if (parts.size() != 3) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 3 cells"));
    }
    size_t query = 0;
    double value = 0.0;
    std::optional<int> node = tree.Find(std::string(absl::StripAsciiWhitespace(parts[1])));
    if (!absl::SimpleAtoi(parts[0], &query) ||
        !absl::SimpleAtod(parts[2], &value) || !node.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": malformed cell '", line, "'"));
    }
    num_queries = std::max(num_queries, query + 1);
    cells.push_back({query, *node, value});
  }
  AnswerTable table(num_queries, tree);
  std::vector<bool> seen(num_queries * tree.num_nodes(), false);
  for (const Cell& c : cells) {
    const size_t index = c.query * tree.num_nodes() + c.node;
    if (seen[index]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "duplicate cell for query ", c.query, " region ", tree.id(c.node)));
    }
    seen[index] = true;
    table.at(c.query, c.node) = c.value;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    return absl::InvalidArgumentError("answer table CSV is missing cells");
  }
  return table;
}

}  // namespace census_dp
