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

#include "census_dp/experiment.h"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <omp.h>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "census_dp/constraints.h"
#include "census_dp/hpd.h"
#include "census_dp/metrics.h"
#include "census_dp/mst.h"
#include "census_dp/privacy_budget.h"
#include "census_dp/query.h"
#include "census_dp/status_macros.h"
#include "census_dp/topdown.h"
#include "json.hpp"

namespace census_dp {
namespace {

struct RunSpec {
  Algorithm algorithm;
  double epsilon;
  int k;
  int repetition;
};

struct RunOutcome {
  std::vector<RunRecord> records;
  LedgerAudit audit;
  std::optional<std::string> failure;
  std::vector<double> in_errors;
  std::vector<double> out_errors;
};

struct KWorkload {
  QuerySplit split;
  std::optional<AnswerTable> truth_in;
  std::optional<AnswerTable> truth_out;
};

std::string FormatNumber(double value) {
  return absl::StrFormat("%.12g", value);
}

// Error and accuracy rows for one distribution; `errors` receives the cells'
// absolute errors.
absl::Status AppendErrorRecords(const RunSpec& spec, const char* distribution,
                                const AnswerTable& released,
                                const AnswerTable& truth, bool check_root,
                                std::vector<RunRecord>& records,
                                std::vector<double>& errors) {
  ASSIGN_OR_RETURN(ErrorDistribution dist, AbsoluteErrors(released, truth));
  ASSIGN_OR_RETURN(double accuracy, Accuracy(released, truth));
  const ConstraintReport report = check_root
                                      ? ValidateConstraints(released, truth)
                                      : ValidateConstraints(released);
  auto add = [&](const char* metric, double value) {
    records.push_back({spec.algorithm, spec.epsilon, spec.k, distribution,
                       spec.repetition, metric, value});
  };
  add("mean_abs_error", dist.mean);
  add("median_abs_error", dist.median);
  add("p90_abs_error", dist.p90);
  add("p99_abs_error", dist.p99);
  add("accuracy", accuracy);
  add("constraint_violations", static_cast<double>(report.total()));
  errors = std::move(dist.errors);
  return absl::OkStatus();
}

void AppendNullRecords(const RunSpec& spec, const char* distribution,
                       std::vector<RunRecord>& records) {
  for (const char* metric :
       {"mean_abs_error", "median_abs_error", "p90_abs_error", "p99_abs_error",
        "accuracy", "constraint_violations"}) {
    records.push_back({spec.algorithm, spec.epsilon, spec.k, distribution,
                       spec.repetition, metric, std::nullopt});
  }
}

absl::Status RunSynthetic(const RunSpec& spec, const Population& truth_pop,
                          const Population& synthetic, const KWorkload& work,
                          RunOutcome& outcome) {
  ASSIGN_OR_RETURN(AnswerTable in_table,
                   Evaluate(synthetic, work.split.in_distribution));
  RETURN_IF_ERROR(AppendErrorRecords(spec, "in", in_table, *work.truth_in,
                                     false, outcome.records,
                                     outcome.in_errors));
  if (work.split.out_of_distribution.empty()) {
    AppendNullRecords(spec, "out", outcome.records);
  } else {
    ASSIGN_OR_RETURN(AnswerTable out_table,
                     Evaluate(synthetic, work.split.out_of_distribution));
    RETURN_IF_ERROR(AppendErrorRecords(spec, "out", out_table, *work.truth_out,
                                       false, outcome.records,
                                       outcome.out_errors));
  }
  ASSIGN_OR_RETURN(QualityReport quality,
                   ComputeQualityReport(synthetic, truth_pop));
  for (auto [metric, value] : {std::pair{"ind", quality.ind},
                               std::pair{"pair", quality.pair},
                               std::pair{"corr", quality.corr}}) {
    outcome.records.push_back({spec.algorithm, spec.epsilon, spec.k, "all",
                               spec.repetition, metric, value});
  }
  return absl::OkStatus();
}

absl::Status ExecuteRun(const ExperimentConfig& config, const RunSpec& spec,
                        const Population& population, const KWorkload& work,
                        double delta, RunOutcome& outcome) {
  ASSIGN_OR_RETURN(PrivacyBudget ledger,
                   PrivacyBudget::Create(spec.epsilon, delta));
  const uint64_t seed = DeriveRunSeed(config.base_seed, spec.algorithm,
                                      spec.epsilon, spec.k, spec.repetition);
  auto record_audit = [&]() {
    outcome.audit = {spec.epsilon, delta, ledger.spent_epsilon(),
                     ledger.spent_delta(),
                     ledger.spent_epsilon() <= spec.epsilon + 1e-9 &&
                         ledger.spent_delta() <= delta * (1 + 1e-9)};
  };
  absl::Status status = [&]() -> absl::Status {
    switch (spec.algorithm) {
      case Algorithm::kTopDown: {
        ASSIGN_OR_RETURN(AnswerTable released,
                         RunTopDown(*work.truth_in,
                                    TopDownConfig{spec.epsilon, seed}, &ledger));
        RETURN_IF_ERROR(AppendErrorRecords(spec, "in", released,
                                           *work.truth_in, true,
                                           outcome.records, outcome.in_errors));
        AppendNullRecords(spec, "out", outcome.records);
        return absl::OkStatus();
      }
      case Algorithm::kMst: {
        ASSIGN_OR_RETURN(MstResult result,
                         RunMst(population, spec.epsilon, delta, config.mst,
                                seed, &ledger));
        return RunSynthetic(spec, population, result.synthetic, work, outcome);
      }
      case Algorithm::kHpdFixed: {
        ASSIGN_OR_RETURN(HpdResult result,
                         RunHpd(population, work.split.in_distribution,
                                spec.epsilon, delta, config.hpd, seed,
                                &ledger));
        return RunSynthetic(spec, population, result.synthetic, work, outcome);
      }
    }
    return absl::InternalError("unhandled algorithm");
  }();
  record_audit();
  return status;
}

}  // namespace

double CellSummary::mean(const std::string& key) const {
  auto it = means.find(key);
  return it == means.end() ? std::numeric_limits<double>::quiet_NaN()
                           : it->second;
}

const CellSummary* ExperimentOutputs::FindCell(Algorithm algorithm,
                                               double epsilon, int k) const {
  for (const CellSummary& cell : cells) {
    if (cell.algorithm == algorithm && cell.epsilon == epsilon && cell.k == k) {
      return &cell;
    }
  }
  return nullptr;
}

uint64_t DeriveRunSeed(uint64_t base_seed, Algorithm algorithm, double epsilon,
                       int k, int repetition) {
  uint64_t h = MixSeed(base_seed);
  h = MixSeed(h ^ static_cast<uint64_t>(algorithm));
  h = MixSeed(h ^ std::bit_cast<uint64_t>(epsilon));
  h = MixSeed(h ^ static_cast<uint64_t>(k));
  return MixSeed(h ^ static_cast<uint64_t>(repetition));
}

int ExperimentWorkers() {
  if (const char* env = std::getenv("CENSUS_DP_WORKERS"); env != nullptr) {
    int workers = 0;
    if (absl::SimpleAtoi(env, &workers) && workers > 0) return workers;
  }
  return omp_get_max_threads();
}

absl::StatusOr<ExperimentOutputs> RunExperiment(const ExperimentConfig& config) {
  ASSIGN_OR_RETURN(Population population, LoadDataset(config.dataset));
  const double n = static_cast<double>(population.size());
  const double delta = config.delta.value_or(1.0 / (n * n));

  std::map<int, KWorkload> workloads;
  for (int k : config.k_values) {
    const QueryCounts& counts = config.query_counts.at(k);
    KWorkload work;
    ASSIGN_OR_RETURN(work.split,
                     SampleQuerySets(config.base_seed, population.schema(), k,
                                     counts.in, counts.out));
    ASSIGN_OR_RETURN(AnswerTable in,
                     Evaluate(population, work.split.in_distribution));
    work.truth_in = std::move(in);
    if (!work.split.out_of_distribution.empty()) {
      ASSIGN_OR_RETURN(AnswerTable out,
                       Evaluate(population, work.split.out_of_distribution));
      work.truth_out = std::move(out);
    }
    workloads.emplace(k, std::move(work));
  }

  std::vector<RunSpec> runs;
  for (Algorithm algorithm : config.algorithms) {
    for (double epsilon : config.epsilons) {
      for (int k : config.k_values) {
        for (int rep = 0; rep < config.repetitions; ++rep) {
          runs.push_back({algorithm, epsilon, k, rep});
        }
      }
    }
  }
  std::vector<RunOutcome> outcomes(runs.size());
  const int64_t num_runs = static_cast<int64_t>(runs.size());

#pragma omp parallel for schedule(dynamic) num_threads(ExperimentWorkers())
  for (int64_t i = 0; i < num_runs; ++i) {
    absl::Status status = ExecuteRun(config, runs[i], population,
                                     workloads.at(runs[i].k), delta,
                                     outcomes[i]);
    if (!status.ok()) {
      outcomes[i].failure = status.ToString();
      outcomes[i].records.clear();
      outcomes[i].records.push_back({runs[i].algorithm, runs[i].epsilon,
                                     runs[i].k, "all", runs[i].repetition,
                                     "failure", std::nullopt});
      outcomes[i].in_errors.clear();
      outcomes[i].out_errors.clear();
    }
  }

  ExperimentOutputs outputs;
  outputs.num_runs = num_runs;
  outputs.delta = delta;

  std::ostringstream csv;
  csv << "algorithm,epsilon,k,distribution,repetition,metric,value\n";
  for (const RunOutcome& outcome : outcomes) {
    for (const RunRecord& r : outcome.records) {
      csv << AlgorithmName(r.algorithm) << ',' << FormatNumber(r.epsilon) << ','
          << r.k << ',' << r.distribution << ',' << r.repetition << ','
          << r.metric << ','
          << (r.value.has_value() ? absl::StrFormat("%.17g", *r.value)
                                  : std::string("null"))
          << '\n';
    }
  }
  outputs.results_csv = csv.str();

  nlohmann::json cells = nlohmann::json::array();
  nlohmann::json ledger = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  bool all_within_budget = true;
  // Runs are laid out cell by cell, repetitions contiguous.
  const int reps = config.repetitions;
  for (size_t begin = 0; begin < runs.size(); begin += reps) {
    const RunSpec& head = runs[begin];
    CellSummary cell{head.algorithm, head.epsilon, head.k, 0, {}};
    std::map<std::string, std::pair<double, int>> sums;
    std::vector<double> pooled_in;
    std::vector<double> pooled_out;
    for (int rep = 0; rep < reps; ++rep) {
      const RunOutcome& outcome = outcomes[begin + rep];
      const RunSpec& spec = runs[begin + rep];
      all_within_budget = all_within_budget && outcome.audit.within_budget;
      ledger.push_back({{"algorithm", AlgorithmName(spec.algorithm)},
                        {"epsilon", spec.epsilon},
                        {"k", spec.k},
                        {"repetition", spec.repetition},
                        {"epsilon_budget", outcome.audit.epsilon_budget},
                        {"epsilon_spent", outcome.audit.epsilon_spent},
                        {"delta_budget", outcome.audit.delta_budget},
                        {"delta_spent", outcome.audit.delta_spent},
                        {"within_budget", outcome.audit.within_budget}});
      if (outcome.failure.has_value()) {
        ++outputs.num_failures;
        failures.push_back({{"algorithm", AlgorithmName(spec.algorithm)},
                            {"epsilon", spec.epsilon},
                            {"k", spec.k},
                            {"repetition", spec.repetition},
                            {"message", *outcome.failure}});
        continue;
      }
      ++cell.successful_repetitions;
      for (const RunRecord& r : outcome.records) {
        std::string key = absl::StrCat(r.distribution, "/", r.metric);
        double value = 0.0;
        if (r.value.has_value()) {
          value = *r.value;
        } else if (r.metric == "accuracy") {
          value = 0.0;
        } else {
          continue;
        }
        auto& [sum, count] = sums[key];
        sum += value;
        ++count;
      }
      pooled_in.insert(pooled_in.end(), outcome.in_errors.begin(),
                       outcome.in_errors.end());
      pooled_out.insert(pooled_out.end(), outcome.out_errors.begin(),
                        outcome.out_errors.end());
    }
    for (const auto& [key, sc] : sums) cell.means[key] = sc.first / sc.second;

    const std::string stem =
        absl::StrCat(AlgorithmName(cell.algorithm), "_eps",
                     FormatNumber(cell.epsilon), "_k", cell.k);
    for (auto [distribution, pooled] :
         {std::pair{"in", &pooled_in}, std::pair{"out", &pooled_out}}) {
      if (pooled->empty()) continue;
      std::ostringstream out;
      RETURN_IF_ERROR(
          WriteCdfCsv(SummarizeErrors(std::move(*pooled)).cdf, out));
      outputs.cdf_files[absl::StrCat(stem, "_", distribution, ".csv")] =
          out.str();
    }

    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [key, value] : cell.means) metrics[key] = value;
    cells.push_back({{"algorithm", AlgorithmName(cell.algorithm)},
                     {"epsilon", cell.epsilon},
                     {"k", cell.k},
                     {"successful_repetitions", cell.successful_repetitions},
                     {"metrics", std::move(metrics)}});
    outputs.cells.push_back(std::move(cell));
  }

  // TopDown minus each synthetic method, per cell, over repetitions where
  // both succeeded.
  auto find_run = [&](Algorithm a, double eps, int k, int rep) -> const RunOutcome* {
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].algorithm == a && runs[i].epsilon == eps && runs[i].k == k &&
          runs[i].repetition == rep) {
        return &outcomes[i];
      }
    }
    return nullptr;
  };
  for (Algorithm other : config.algorithms) {
    if (other == Algorithm::kTopDown) continue;
    for (double epsilon : config.epsilons) {
      for (int k : config.k_values) {
        std::vector<double> diff;
        for (int rep = 0; rep < reps; ++rep) {
          const RunOutcome* td = find_run(Algorithm::kTopDown, epsilon, k, rep);
          const RunOutcome* syn = find_run(other, epsilon, k, rep);
          if (td == nullptr || syn == nullptr || td->failure || syn->failure) {
            continue;
          }
          for (size_t i = 0; i < td->in_errors.size(); ++i) {
            diff.push_back(td->in_errors[i] - syn->in_errors[i]);
          }
        }
        if (diff.empty()) continue;
        std::ostringstream out;
        RETURN_IF_ERROR(WriteCdfCsv(SummarizeErrors(std::move(diff)).cdf, out));
        outputs.cdf_files[absl::StrCat("diff_topdown_minus_",
                                       AlgorithmName(other), "_eps",
                                       FormatNumber(epsilon), "_k", k,
                                       "_in.csv")] = out.str();
      }
    }
  }

  nlohmann::json summary = {{"n", population.size()},
                            {"delta", delta},
                            {"repetitions", reps},
                            {"num_runs", outputs.num_runs},
                            {"num_failures", outputs.num_failures},
                            {"cells", std::move(cells)},
                            {"ledger", std::move(ledger)},
                            {"ledger_within_budget", all_within_budget},
                            {"failures", std::move(failures)}};
  outputs.summary_json = summary.dump(2) + "\n";
  return outputs;
}

absl::Status WriteExperimentOutputs(const ExperimentOutputs& outputs,
                                    const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(directory) / "cdf", ec);
  if (ec) {
    return absl::InternalError(absl::StrCat("cannot create '", directory,
                                            "': ", ec.message()));
  }
  auto write = [](const fs::path& path, const std::string& text) -> absl::Status {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
      return absl::InternalError(
          absl::StrCat("failed writing '", path.string(), "'"));
    }
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(write(fs::path(directory) / "results.csv", outputs.results_csv));
  RETURN_IF_ERROR(
      write(fs::path(directory) / "summary.json", outputs.summary_json));
  for (const auto& [name, text] : outputs.cdf_files) {
    RETURN_IF_ERROR(write(fs::path(directory) / "cdf" / name, text));
  }
  return absl::OkStatus();
}

}  // namespace census_dp
