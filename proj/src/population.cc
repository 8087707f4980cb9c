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

#include "census_dp/population.h"

#include <charconv>
#include <fstream>
#include <optional>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "census_dp/random.h"
#include "census_dp/status_macros.h"

namespace census_dp {

absl::StatusOr<Population> Population::Create(FeatureSchema schema,
                                              RegionTree tree,
                                              std::vector<int64_t> person_ids,
                                              std::vector<int> features,
                                              std::vector<int> leaf_ordinals) {
  const size_t n = leaf_ordinals.size();
  if (person_ids.size() != n ||
      features.size() != n * static_cast<size_t>(schema.num_features())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "record table shape mismatch: ", person_ids.size(), " ids, ",
        features.size(), " feature cells, ", n, " regions for ",
        schema.num_features(), " features"));
  }
  Population population(std::move(schema), std::move(tree),
                        std::move(person_ids), std::move(features),
                        std::move(leaf_ordinals));
  RETURN_IF_ERROR(population.Validate());
  return population;
}

absl::Status Population::Validate() const {
  if (size() < 1) {
    return absl::InvalidArgumentError("population must have at least 1 record");
  }
  const int m = num_features();
  for (int64_t r = 0; r < size(); ++r) {
    for (int f = 0; f < m; ++f) {
      const int v = value(r, f);
      if (v < 0 || v >= schema_.domain_size(f)) {
        return absl::OutOfRangeError(absl::StrCat(
            "record ", r, ": feature '", schema_.feature(f).name, "' value ", v,
            " outside domain [0, ", schema_.domain_size(f), ")"));
      }
    }
    if (leaf_ordinals_[r] < 0 || leaf_ordinals_[r] >= tree_.num_leaves()) {
      return absl::OutOfRangeError(absl::StrCat(
          "record ", r, ": region ordinal ", leaf_ordinals_[r],
          " is not a leaf of the region tree"));
    }
  }
  std::unordered_set<int64_t> ids;
  ids.reserve(person_ids_.size());
  for (int64_t id : person_ids_) {
    if (!ids.insert(id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate person id ", id));
    }
  }
  return absl::OkStatus();
}

int ColumnDomainSize(const Population& population, int column) {
  if (column == RegionColumn(population.schema())) {
    return population.tree().num_leaves();
  }
  return population.schema().domain_size(column);
}

int ColumnValue(const Population& population, int64_t row, int column) {
  if (column == RegionColumn(population.schema())) {
    return population.leaf_ordinal(row);
  }
  return population.value(row, column);
}

namespace {

std::optional<int> ParseInt(absl::string_view cell) {
  cell = absl::StripAsciiWhitespace(cell);
  int value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

absl::StatusOr<Population> ParseCsv(std::istream& in,
                                    const FeatureSchema& schema,
                                    const std::string& region_column,
                                    const RegionTree& tree) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("CSV is empty; expected a header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = absl::StrSplit(line, ',');
  const int m = schema.num_features();
  // column position -> feature index, or m for the region.
  std::vector<int> role(header.size(), -1);
  std::vector<bool> found(m + 1, false);
  for (size_t c = 0; c < header.size(); ++c) {
    std::string name(absl::StripAsciiWhitespace(header[c]));
    int target = -1;
    if (name == region_column) {
      target = m;
    } else if (std::optional<int> f = schema.Find(name)) {
      target = *f;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("schema error: unexpected CSV column '", name, "'"));
    }
    if (found[target]) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema error: duplicate CSV column '", name, "'"));
    }
    found[target] = true;
    role[c] = target;
  }
  for (int f = 0; f <= m; ++f) {
    if (!found[f]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema error: missing CSV column '",
          f == m ? region_column : schema.feature(f).name, "'"));
    }
  }

  std::vector<int64_t> ids;
  std::vector<int> features;
  std::vector<int> leaves;
  int64_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", row, ": expected ", header.size(), " cells, found ",
          cells.size()));
    }
    std::vector<int> values(m, 0);
    int leaf = -1;
    for (size_t c = 0; c < cells.size(); ++c) {
      if (role[c] == m) {
        std::string id(absl::StripAsciiWhitespace(cells[c]));
        std::optional<int> node = tree.Find(id);
        if (!node.has_value() || !tree.is_leaf(*node)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "row ", row, ", column '", region_column, "': region '", id,
              "' is not a leaf of the region tree"));
        }
        leaf = tree.leaf_ordinal(*node);
        continue;
      }
      const Feature& feature = schema.feature(role[c]);
      std::optional<int> v = ParseInt(cells[c]);
      if (!v.has_value()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", row, ", column '", feature.name, "': '", cells[c],
            "' is not an integer"));
      }
      if (*v < 0 || *v >= feature.domain_size) {
        return absl::OutOfRangeError(absl::StrCat(
            "row ", row, ", column '", feature.name, "': value ", *v,
            " outside domain [0, ", feature.domain_size, ")"));
      }
      values[role[c]] = *v;
    }
    ids.push_back(row - 1);
    features.insert(features.end(), values.begin(), values.end());
    leaves.push_back(leaf);
  }
  return Population::Create(schema, tree, std::move(ids), std::move(features),
                            std::move(leaves));
}

absl::StatusOr<Population> IngestCsv(const std::string& path,
                                     const FeatureSchema& schema,
                                     const std::string& region_column,
                                     const RegionTree& tree) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open CSV file '", path, "'"));
  }
  return ParseCsv(in, schema, region_column, tree);
}

absl::Status WriteCsv(const Population& population, std::ostream& out,
                      const std::string& region_column) {
  std::vector<std::string> header;
  for (const Feature& f : population.schema().features()) {
    header.push_back(f.name);
  }
  header.push_back(region_column);
  out << absl::StrJoin(header, ",") << "\n";
  for (int64_t r = 0; r < population.size(); ++r) {
    out << absl::StrJoin(population.row(r), ",") << ","
        << population.tree().id(population.region_node(r)) << "\n";
  }
  if (!out) return absl::InternalError("failed writing population CSV");
  return absl::OkStatus();
}

absl::Status WriteCsvFile(const Population& population, const std::string& path,
                          const std::string& region_column) {
  std::ofstream out(path);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open '", path, "' for writing"));
  }
  return WriteCsv(population, out, region_column);
}

std::vector<double> PlantedRegionWeights(const RegionTree& tree) {
  std::vector<double> weights(tree.num_leaves());
  double total = 0.0;
  for (int i = 0; i < tree.num_leaves(); ++i) total += i + 1;
  for (int i = 0; i < tree.num_leaves(); ++i) weights[i] = (i + 1) / total;
  return weights;
}

std::vector<double> PlantedMarginal(const FeatureSchema& schema, int m,
                                    double correlation) {
  std::vector<double> marginal(schema.domain_size(0),
                               1.0 / schema.domain_size(0));
  for (int f = 1; f <= m; ++f) {
    const int d = schema.domain_size(f);
    std::vector<double> next(d, (1.0 - correlation) / d);
    for (size_t a = 0; a < marginal.size(); ++a) {
      next[a % d] += correlation * marginal[a];
    }
    marginal = std::move(next);
  }
  return marginal;
}

std::vector<double> PlantedPairDistribution(const FeatureSchema& schema, int m,
                                            double correlation) {
  const std::vector<double> prev = PlantedMarginal(schema, m - 1, correlation);
  const int d = schema.domain_size(m);
  std::vector<double> joint(prev.size() * d);
  for (size_t a = 0; a < prev.size(); ++a) {
    for (int b = 0; b < d; ++b) {
      const double conditional =
          (1.0 - correlation) / d + (static_cast<int>(a) % d == b ? correlation : 0.0);
      joint[a * d + b] = prev[a] * conditional;
    }
  }
  return joint;
}

absl::StatusOr<Population> GeneratePopulation(uint64_t seed, int64_t n,
                                              const FeatureSchema& schema,
                                              const RegionTree& tree,
                                              double correlation) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("population size must be at least 1, got ", n));
  }
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("correlation must lie in [0, 1], got ", correlation));
  }
  RandomSource rng = RandomSource(seed).Substream("generate_population");
  const int m = schema.num_features();
  const std::vector<double> region_weights = PlantedRegionWeights(tree);
  std::vector<int64_t> ids(n);
  std::vector<int> features(static_cast<size_t>(n) * m);
  std::vector<int> leaves(n);
  for (int64_t r = 0; r < n; ++r) {
    ids[r] = r;
    int* row = &features[r * m];
    row[0] = static_cast<int>(rng.UniformInt(schema.domain_size(0)));
    for (int f = 1; f < m; ++f) {
      const int d = schema.domain_size(f);
      const bool copy = rng.UniformOpen() < correlation;
      const int fresh = static_cast<int>(rng.UniformInt(d));
      row[f] = copy ? row[f - 1] % d : fresh;
    }
    leaves[r] = static_cast<int>(rng.Categorical(region_weights));
  }
  return Population::Create(schema, tree, std::move(ids), std::move(features),
                            std::move(leaves));
}

}  // namespace census_dp
