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

#include "census_dp/config.h"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "census_dp/status_macros.h"
#include "json.hpp"

namespace census_dp {
namespace {

using nlohmann::json;

absl::Status RejectUnknownKeys(const json& object, const std::string& where,
                               std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": expected a JSON object"));
  }
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": unknown key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<json> ParseJson(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(what, ": malformed JSON"));
  }
  return doc;
}

// Typed field access that turns JSON type errors into statuses.
template <typename T>
absl::StatusOr<T> Get(const json& object, const std::string& where,
                      const std::string& key) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ".", key, ": ", e.what()));
  }
}

absl::StatusOr<FeatureSchema> SchemaFromJson(const json& doc) {
  if (!doc.is_array()) {
    return absl::InvalidArgumentError("schema: expected an array of features");
  }
  std::vector<Feature> features;
  for (const json& entry : doc) {
    RETURN_IF_ERROR(RejectUnknownKeys(entry, "schema", {"name", "domain_size"}));
    ASSIGN_OR_RETURN(std::string name, Get<std::string>(entry, "schema", "name"));
    ASSIGN_OR_RETURN(int domain, Get<int>(entry, "schema", "domain_size"));
    features.push_back({std::move(name), domain});
  }
  return FeatureSchema::Create(std::move(features));
}

absl::StatusOr<RegionTree> TreeFromJson(const json& doc) {
  if (doc.is_object() && doc.contains("fanout")) {
    RETURN_IF_ERROR(RejectUnknownKeys(doc, "tree", {"root", "fanout"}));
    std::string root = "root";
    if (doc.contains("root")) {
      ASSIGN_OR_RETURN(root, Get<std::string>(doc, "tree", "root"));
    }
    ASSIGN_OR_RETURN(std::vector<int> fanout,
                     Get<std::vector<int>>(doc, "tree", "fanout"));
    return RegionTree::Complete(root, fanout);
  }
  RETURN_IF_ERROR(RejectUnknownKeys(doc, "tree", {"nodes"}));
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    return absl::InvalidArgumentError(
        "tree: expected \"fanout\" or a \"nodes\" array");
  }
  std::vector<RegionTree::NodeSpec> specs;
  for (const json& entry : doc["nodes"]) {
    RETURN_IF_ERROR(RejectUnknownKeys(entry, "tree.nodes", {"id", "parent"}));
    RegionTree::NodeSpec spec;
    ASSIGN_OR_RETURN(spec.id, Get<std::string>(entry, "tree.nodes", "id"));
    if (entry.contains("parent") && !entry["parent"].is_null()) {
      ASSIGN_OR_RETURN(spec.parent,
                       Get<std::string>(entry, "tree.nodes", "parent"));
    }
    specs.push_back(std::move(spec));
  }
  return RegionTree::Create(specs);
}

absl::StatusOr<DatasetSpec> DatasetFromJson(const json& doc) {
  RETURN_IF_ERROR(RejectUnknownKeys(doc, "dataset",
                                    {"schema", "tree", "generator", "csv"}));
  if (!doc.contains("schema") || !doc.contains("tree")) {
    return absl::InvalidArgumentError(
        "dataset: \"schema\" and \"tree\" are required");
  }
  ASSIGN_OR_RETURN(FeatureSchema schema, SchemaFromJson(doc["schema"]));
  ASSIGN_OR_RETURN(RegionTree tree, TreeFromJson(doc["tree"]));
  DatasetSpec spec{std::move(schema), std::move(tree), std::nullopt,
                   std::nullopt};
  if (doc.contains("generator") == doc.contains("csv")) {
    return absl::InvalidArgumentError(
        "dataset: exactly one of \"generator\" and \"csv\" is required");
  }
  if (doc.contains("generator")) {
    const json& g = doc["generator"];
    RETURN_IF_ERROR(
        RejectUnknownKeys(g, "dataset.generator", {"n", "seed", "correlation"}));
    GeneratorSpec generator;
    if (g.contains("n")) {
      ASSIGN_OR_RETURN(generator.n, Get<int64_t>(g, "dataset.generator", "n"));
    }
    if (g.contains("seed")) {
      ASSIGN_OR_RETURN(generator.seed,
                       Get<uint64_t>(g, "dataset.generator", "seed"));
    }
    if (g.contains("correlation")) {
      ASSIGN_OR_RETURN(generator.correlation,
                       Get<double>(g, "dataset.generator", "correlation"));
    }
    spec.generator = generator;
  } else {
    const json& c = doc["csv"];
    RETURN_IF_ERROR(RejectUnknownKeys(c, "dataset.csv", {"path", "region_column"}));
    CsvSource csv;
    ASSIGN_OR_RETURN(csv.path, Get<std::string>(c, "dataset.csv", "path"));
    if (c.contains("region_column")) {
      ASSIGN_OR_RETURN(csv.region_column,
                       Get<std::string>(c, "dataset.csv", "region_column"));
    }
    spec.csv = csv;
  }
  return spec;
}

absl::Status ParseMstOptions(const json& doc, MstOptions& options) {
  RETURN_IF_ERROR(RejectUnknownKeys(
      doc, "mst", {"selection_fraction", "mi_sensitivity", "repair"}));
  if (doc.contains("selection_fraction")) {
    ASSIGN_OR_RETURN(options.selection_fraction,
                     Get<double>(doc, "mst", "selection_fraction"));
  }
  if (doc.contains("mi_sensitivity")) {
    ASSIGN_OR_RETURN(options.mi_sensitivity,
                     Get<double>(doc, "mst", "mi_sensitivity"));
  }
  if (doc.contains("repair")) {
    ASSIGN_OR_RETURN(std::string repair, Get<std::string>(doc, "mst", "repair"));
    if (repair == "clamp") {
      options.repair = TableRepair::kClampRenormalize;
    } else if (repair == "l2") {
      options.repair = TableRepair::kL2Projection;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "mst.repair: expected \"clamp\" or \"l2\", got '", repair, "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status ParseHpdOptions(const json& doc, HpdOptions& options) {
  RETURN_IF_ERROR(RejectUnknownKeys(
      doc, "hpd", {"components", "rounds", "learning_rate", "inner_steps"}));
  if (doc.contains("components")) {
    ASSIGN_OR_RETURN(options.num_components, Get<int>(doc, "hpd", "components"));
  }
  if (doc.contains("rounds")) {
    ASSIGN_OR_RETURN(options.rounds, Get<int>(doc, "hpd", "rounds"));
  }
  if (doc.contains("learning_rate")) {
    ASSIGN_OR_RETURN(options.learning_rate,
                     Get<double>(doc, "hpd", "learning_rate"));
  }
  if (doc.contains("inner_steps")) {
    ASSIGN_OR_RETURN(options.inner_steps, Get<int>(doc, "hpd", "inner_steps"));
  }
  if (options.num_components < 1 || options.rounds < 1 ||
      options.inner_steps < 1 || !(options.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "hpd: components, rounds and inner_steps must be >= 1 and the "
        "learning rate positive");
  }
  return absl::OkStatus();
}

}  // namespace

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kTopDown:
      return "topdown";
    case Algorithm::kMst:
      return "mst";
    case Algorithm::kHpdFixed:
      return "hpd-fixed";
  }
  return "unknown";
}

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kTopDown, Algorithm::kMst,
                      Algorithm::kHpdFixed}) {
    if (AlgorithmName(a) == name) return a;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown algorithm '", std::string(name),
      "'; expected topdown, mst or hpd-fixed"));
}

absl::StatusOr<FeatureSchema> ParseSchemaJson(const std::string& text) {
  ASSIGN_OR_RETURN(json doc, ParseJson(text, "schema"));
  return SchemaFromJson(doc);
}

absl::StatusOr<RegionTree> ParseTreeJson(const std::string& text) {
  ASSIGN_OR_RETURN(json doc, ParseJson(text, "tree"));
  return TreeFromJson(doc);
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const std::string& text) {
  ASSIGN_OR_RETURN(json doc, ParseJson(text, "config"));
  RETURN_IF_ERROR(RejectUnknownKeys(
      doc, "config",
      {"dataset", "algorithms", "epsilons", "k_values", "query_counts",
       "repetitions", "base_seed", "delta", "output_dir", "mst", "hpd"}));
  for (const char* key :
       {"dataset", "algorithms", "epsilons", "k_values", "query_counts"}) {
    if (!doc.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("config: missing required key '", key, "'"));
    }
  }
  ASSIGN_OR_RETURN(DatasetSpec dataset, DatasetFromJson(doc["dataset"]));
  ExperimentConfig config{.dataset = std::move(dataset)};

  ASSIGN_OR_RETURN(std::vector<std::string> names,
                   Get<std::vector<std::string>>(doc, "config", "algorithms"));
  std::set<std::string> seen;
  for (const std::string& name : names) {
    ASSIGN_OR_RETURN(Algorithm a, ParseAlgorithm(name));
    if (!seen.insert(name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("config.algorithms: duplicate '", name, "'"));
    }
    config.algorithms.push_back(a);
  }
  if (config.algorithms.empty()) {
    return absl::InvalidArgumentError("config.algorithms must be non-empty");
  }

  ASSIGN_OR_RETURN(config.epsilons,
                   Get<std::vector<double>>(doc, "config", "epsilons"));
  if (config.epsilons.empty()) {
    return absl::InvalidArgumentError("config.epsilons must be non-empty");
  }
  for (double e : config.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      return absl::InvalidArgumentError(
          absl::StrCat("config.epsilons: ", e, " is not a positive number"));
    }
  }

  ASSIGN_OR_RETURN(config.k_values,
                   Get<std::vector<int>>(doc, "config", "k_values"));
  if (config.k_values.empty()) {
    return absl::InvalidArgumentError("config.k_values must be non-empty");
  }
  const int m = config.dataset.schema.num_features();
  for (int k : config.k_values) {
    if (k < 1 || k > m) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config.k_values: k=", k, " outside [1, ", m, "]"));
    }
  }

  const json& counts = doc["query_counts"];
  if (!counts.is_object()) {
    return absl::InvalidArgumentError(
        "config.query_counts: expected an object keyed by k");
  }
  for (const auto& [key, value] : counts.items()) {
    int k = 0;
    try {
      size_t used = 0;
      k = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config.query_counts: key '", key, "' is not an integer"));
    }
    const std::string where = absl::StrCat("config.query_counts.", key);
    RETURN_IF_ERROR(RejectUnknownKeys(value, where, {"in", "out"}));
    QueryCounts qc;
    ASSIGN_OR_RETURN(qc.in, Get<int64_t>(value, where, "in"));
    ASSIGN_OR_RETURN(qc.out, Get<int64_t>(value, where, "out"));
    if (qc.in < 1 || qc.out < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": need in >= 1 and out >= 0"));
    }
    config.query_counts[k] = qc;
  }
  for (int k : config.k_values) {
    if (!config.query_counts.contains(k)) {
      return absl::InvalidArgumentError(
          absl::StrCat("config.query_counts: no entry for k=", k));
    }
  }

  if (doc.contains("repetitions")) {
    ASSIGN_OR_RETURN(config.repetitions, Get<int>(doc, "config", "repetitions"));
  }
  if (config.repetitions < 1) {
    return absl::InvalidArgumentError("config.repetitions must be >= 1");
  }
  if (doc.contains("base_seed")) {
    ASSIGN_OR_RETURN(config.base_seed, Get<uint64_t>(doc, "config", "base_seed"));
  }
  if (doc.contains("delta") && !doc["delta"].is_null()) {
    ASSIGN_OR_RETURN(double delta, Get<double>(doc, "config", "delta"));
    if (!(delta > 0.0 && delta < 1.0)) {
      return absl::InvalidArgumentError("config.delta must lie in (0, 1)");
    }
    config.delta = delta;
  }
  if (doc.contains("output_dir")) {
    ASSIGN_OR_RETURN(config.output_dir,
                     Get<std::string>(doc, "config", "output_dir"));
  }
  if (doc.contains("mst")) RETURN_IF_ERROR(ParseMstOptions(doc["mst"], config.mst));
  if (doc.contains("hpd")) RETURN_IF_ERROR(ParseHpdOptions(doc["hpd"], config.hpd));
  return config;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseExperimentConfig(text);
}

absl::StatusOr<Population> LoadDataset(const DatasetSpec& dataset) {
  if (dataset.generator.has_value()) {
    return GeneratePopulation(dataset.generator->seed, dataset.generator->n,
                              dataset.schema, dataset.tree,
                              dataset.generator->correlation);
  }
  if (dataset.csv.has_value()) {
    return IngestCsv(dataset.csv->path, dataset.schema,
                     dataset.csv->region_column, dataset.tree);
  }
  return absl::InvalidArgumentError("dataset has no source");
}

}  // namespace census_dp
