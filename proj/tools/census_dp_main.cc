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

// Command-line front end: run experiments, validate released tables and
// generate seeded populations.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "census_dp/config.h"
#include "census_dp/constraints.h"
#include "census_dp/experiment.h"
#include "census_dp/population.h"
#include "census_dp/query.h"
#include "json.hpp"

namespace {

using census_dp::ConstraintReport;

constexpr int kExitFailure = 1;
constexpr int kExitError = 2;

int ReportError(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return kExitError;
}

int RunCommand(const std::string& config_path, const std::string& output_dir,
               bool constraint_report) {
  auto config = census_dp::LoadExperimentConfig(config_path);
  if (!config.ok()) return ReportError(config.status());
  if (!output_dir.empty()) config->output_dir = output_dir;
  auto outputs = census_dp::RunExperiment(*config);
  if (!outputs.ok()) return ReportError(outputs.status());
  if (absl::Status s =
          census_dp::WriteExperimentOutputs(*outputs, config->output_dir);
      !s.ok()) {
    return ReportError(s);
  }
  std::cout << "runs: " << outputs->num_runs
            << ", failures: " << outputs->num_failures
            << ", output: " << config->output_dir << "\n";
  if (constraint_report) {
    nlohmann::json report = nlohmann::json::object();
    for (const census_dp::CellSummary& cell : outputs->cells) {
      double total = 0.0;
      for (const char* key :
           {"in/constraint_violations", "out/constraint_violations"}) {
        const double mean = cell.mean(key);
        if (!std::isnan(mean)) total += mean * cell.successful_repetitions;
      }
      const std::string name = census_dp::AlgorithmName(cell.algorithm);
      report[name] = report.value(name, 0.0) + total;
    }
    std::cout << report.dump(2) << "\n";
  }
  return outputs->num_failures == 0 ? 0 : kExitFailure;
}

int ValidateCommand(const std::string& table_path, const std::string& tree_path,
                    const std::string& truth_path) {
  auto tree_text = census_dp::ReadFile(tree_path);
  if (!tree_text.ok()) return ReportError(tree_text.status());
  auto tree = census_dp::ParseTreeJson(*tree_text);
  if (!tree.ok()) return ReportError(tree.status());
  auto read_table = [&tree](const std::string& path)
      -> absl::StatusOr<census_dp::AnswerTable> {
    std::ifstream in(path);
    if (!in) return absl::NotFoundError("cannot open '" + path + "'");
    return census_dp::ReadAnswerTableCsv(in, *tree);
  };
  auto table = read_table(table_path);
  if (!table.ok()) return ReportError(table.status());
  ConstraintReport report;
  if (truth_path.empty()) {
    report = census_dp::ValidateConstraints(*table);
  } else {
    auto truth = read_table(truth_path);
    if (!truth.ok()) return ReportError(truth.status());
    report = census_dp::ValidateConstraints(*table, *truth);
  }
  std::cout << census_dp::ConstraintReportToJson(report) << "\n";
  return report.ok() ? 0 : kExitFailure;
}

int GenpopCommand(uint64_t seed, int64_t n, const std::string& schema_path,
                  const std::string& tree_path, const std::string& out_path,
                  double correlation) {
  auto schema_text = census_dp::ReadFile(schema_path);
  if (!schema_text.ok()) return ReportError(schema_text.status());
  auto schema = census_dp::ParseSchemaJson(*schema_text);
  if (!schema.ok()) return ReportError(schema.status());
  auto tree_text = census_dp::ReadFile(tree_path);
  if (!tree_text.ok()) return ReportError(tree_text.status());
  auto tree = census_dp::ParseTreeJson(*tree_text);
  if (!tree.ok()) return ReportError(tree.status());
  auto population =
      census_dp::GeneratePopulation(seed, n, *schema, *tree, correlation);
  if (!population.ok()) return ReportError(population.status());
  if (absl::Status s = census_dp::WriteCsvFile(*population, out_path); !s.ok()) {
    return ReportError(s);
  }
  std::cout << "wrote " << population->size() << " records to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private hierarchical count release toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  bool constraint_report = false;
  CLI::App* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir,
                  "Override the config's output directory");
  run->add_flag("--constraint-report", constraint_report,
                "Print total constraint violations per algorithm");

  std::string table_path;
  std::string tree_path;
  std::string truth_path;
  CLI::App* validate =
      app.add_subcommand("validate", "Check an answer table's constraints");
  validate->add_option("--table", table_path, "Answer table CSV")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--tree", tree_path, "Region tree (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--truth", truth_path,
                       "Ground-truth table; also checks root totals")
      ->check(CLI::ExistingFile);

  uint64_t seed = 0;
  int64_t n = 0;
  std::string schema_path;
  std::string out_path;
  double correlation = 0.6;
  CLI::App* genpop =
      app.add_subcommand("genpop", "Generate a seeded synthetic population");
  genpop->add_option("--seed", seed, "Generator seed")->required();
  genpop->add_option("--n", n, "Number of records")->required();
  genpop->add_option("--schema", schema_path, "Feature schema (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  genpop->add_option("--tree", tree_path, "Region tree (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  genpop->add_option("--out", out_path, "Output CSV path")->required();
  genpop->add_option("--correlation", correlation,
                     "Chain copy probability in [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }
  if (*run) return RunCommand(config_path, output_dir, constraint_report);
  if (*validate) return ValidateCommand(table_path, tree_path, truth_path);
  if (*genpop) {
    return GenpopCommand(seed, n, schema_path, tree_path, out_path, correlation);
  }
  return kExitError;
}
