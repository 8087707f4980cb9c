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

#ifndef CENSUS_DP_HPD_H_
#define CENSUS_DP_HPD_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "census_dp/population.h"
#include "census_dp/privacy_budget.h"
#include "census_dp/query.h"
#include "census_dp/random.h"

namespace census_dp {

// Free parameters of a mixture of hierarchical product distributions. Every
// row below is a probability vector.
struct HpdParameters {
  // num_components mixture weights.
  std::vector<double> weights;
  // num_components x num_leaves, row-major: component c's distribution over leaf regions.
  std::vector<double> region;
  // features[m] is num_components x domain_size(m), row-major.
  std::vector<std::vector<double>> features;

  bool operator==(const HpdParameters&) const = default;
};

struct HpdModel {
  FeatureSchema schema;
  RegionTree tree;
  int num_components = 0;
  HpdParameters params;

  std::span<const double> region_probs(int c) const {
    const int leaves = tree.num_leaves();
    return std::span<const double>(params.region).subspan(c * leaves, leaves);
  }
  std::span<const double> feature_probs(int c, int m) const {
    const int d = schema.domain_size(m);
    return std::span<const double>(params.features[m]).subspan(c * d, d);
  }
};

// Checks shapes and that every vector is non-negative and sums to 1 within
// `tolerance`.
absl::Status CheckModel(const HpdModel& model, double tolerance = 1e-9);

// Largest distance of any parameter vector from the probability simplex:
// the max over vectors of max(|sum - 1|, -min entry, 0).
double SimplexViolation(const HpdModel& model);

// Near-uniform starting point; every vector is uniform times (1 + u/2),
// u ~ U(0, 1), renormalized. The perturbation breaks component symmetry.
absl::StatusOr<HpdModel> InitializeModel(const FeatureSchema& schema,
                                         const RegionTree& tree,
                                         int num_components, RandomSource& rng);

// Expected count of `query` within the subtree of `node` for a population of
// `n_total` records drawn from the mixture.
absl::StatusOr<double> ModelAnswer(const HpdModel& model,
                                   const MarginalQuery& query, int node,
                                   double n_total);

// Model answers for every (query, node) cell at once.
absl::StatusOr<AnswerTable> ModelAnswerTable(const HpdModel& model,
                                             const QuerySet& queries,
                                             double n_total);

// Exponential-mechanism choice of one (query, node) cell, returned flattened
// as query * num_nodes + node. Scores are |model - truth| with sensitivity 1.
absl::StatusOr<size_t> SelectMeasurement(const AnswerTable& model_answers,
                                         const AnswerTable& truth,
                                         double epsilon, RandomSource& rng);

struct Measurement {
  size_t query = 0;
  int node = 0;
  double noisy_answer = 0.0;
  double epsilon_spent = 0.0;
  int round = 0;

  bool operator==(const Measurement&) const = default;
};

// Append-only record of Adaptive Measurements rounds. Rounds start at 1 and
// each entry's round equals the previous round or the one after it.
class MeasurementLog {
 public:
  absl::Status Append(const Measurement& measurement);
  size_t size() const { return entries_.size(); }
  std::span<const Measurement> entries() const { return entries_; }
  int last_round() const { return entries_.empty() ? 0 : entries_.back().round; }

 private:
  std::vector<Measurement> entries_;
};

// sum_j ((model_answer_j - noisy_answer_j) / n_total)^2 over the log.
absl::StatusOr<double> MeasurementLoss(const HpdModel& model,
                                       const QuerySet& queries,
                                       std::span<const Measurement> log,
                                       double n_total);

// Gradient of MeasurementLoss with respect to every entry of model.params.
// Measurements are reduced in fixed blocks, in parallel, and the block sums
// are added in block order; the result is independent of thread count.
absl::StatusOr<HpdParameters> LossGradient(const HpdModel& model,
                                           const QuerySet& queries,
                                           std::span<const Measurement> log,
                                           double n_total);

struct HpdOptions {
  int num_components = 32;
  int rounds = 100;
  double learning_rate = 0.1;
  // Projected gradient steps per round. A step whose loss is higher than the
  // current one is retried at half the step size.
  int inner_steps = 10;
  // Skips measurement noise; selection and budget accounting are unchanged.
  bool noiseless = false;
  // 0 means "same size as the input".
  int64_t n_out = 0;
};

struct HpdFitResult {
  HpdModel model;
  MeasurementLog log;
  // Loss over the log at the start and at the end of each round's optimizer.
  std::vector<double> loss_before;
  std::vector<double> loss_after;
  // Largest SimplexViolation seen after any optimizer step.
  double max_simplex_violation = 0.0;
};

// Adaptive Measurements. Each round spends epsilon / rounds: half on
// exponential-mechanism selection of a (query, node) cell scored by
// |model - truth| with sensitivity 1, half with delta / rounds on a Gaussian
// measurement of that cell, followed by projected gradient descent on the
// full log.
absl::StatusOr<HpdFitResult> AdaptiveMeasurementsFit(
    const Population& population, const QuerySet& queries, double epsilon,
    double delta, const HpdOptions& options, uint64_t seed,
    PrivacyBudget* ledger = nullptr);

// Draws component, then leaf region, then each feature independently.
// Chunked sub-streams make the output independent of thread count.
absl::StatusOr<Population> SampleSynthetic(const HpdModel& model,
                                           int64_t n_out, RandomSource& rng);

struct HpdResult {
  HpdFitResult fit;
  Population synthetic;
};

absl::StatusOr<HpdResult> RunHpd(const Population& population,
                                 const QuerySet& queries, double epsilon,
                                 double delta, const HpdOptions& options,
                                 uint64_t seed, PrivacyBudget* ledger = nullptr);

std::string HpdModelToJson(const HpdModel& model);

// query_id,query,region_id,noisy_answer,epsilon_spent,round
absl::Status WriteMeasurementLogCsv(const MeasurementLog& log,
                                    const QuerySet& queries,
                                    const HpdModel& model, std::ostream& out);

namespace reference {

// Single-threaded gradient that accumulates measurements in log order.
absl::StatusOr<HpdParameters> LossGradient(const HpdModel& model,
                                           const QuerySet& queries,
                                           std::span<const Measurement> log,
                                           double n_total);

}  // namespace reference

}  // namespace census_dp

#endif  // CENSUS_DP_HPD_H_
