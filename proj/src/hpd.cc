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

#include "census_dp/hpd.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "census_dp/mechanisms.h"
#include "census_dp/simplex.h"
#include "census_dp/status_macros.h"
#include "hpd_internal.h"
#include "json.hpp"

namespace census_dp {
namespace hpd_internal {

HpdParameters ZeroParameters(const HpdModel& model) {
  HpdParameters zero;
  zero.weights.assign(model.params.weights.size(), 0.0);
  zero.region.assign(model.params.region.size(), 0.0);
  zero.features.reserve(model.params.features.size());
  for (const auto& f : model.params.features) {
    zero.features.emplace_back(f.size(), 0.0);
  }
  return zero;
}

absl::Status CheckMeasurements(const HpdModel& model, const QuerySet& queries,
                               std::span<const Measurement> log) {
  for (const Measurement& m : log) {
    if (m.query >= queries.size() || m.node < 0 ||
        m.node >= model.tree.num_nodes()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "measurement refers to unknown cell (query ", m.query, ", node ",
          m.node, ")"));
    }
  }
  return absl::OkStatus();
}

void AccumulateGradient(const HpdModel& model, const MarginalQuery& query,
                        int node, double noisy_answer, double n_total,
                        HpdParameters& gradient) {
  const int num_components = model.num_components;
  const int num_leaves = model.tree.num_leaves();
  const int leaf_begin = model.tree.leaf_begin(node);
  const int leaf_end = model.tree.leaf_end(node);
  std::span<const Predicate> predicates = query.predicates();
  const size_t k = predicates.size();

  std::vector<double> region_mass(num_components);
  std::vector<double> product(num_components);
  double fraction = 0.0;
  for (int c = 0; c < num_components; ++c) {
    std::span<const double> r = model.region_probs(c);
    region_mass[c] = std::accumulate(r.begin() + leaf_begin,
                                     r.begin() + leaf_end, 0.0);
    double p = 1.0;
    for (const Predicate& pred : predicates) {
      p *= model.feature_probs(c, pred.feature)[pred.value];
    }
    product[c] = p;
    fraction += model.params.weights[c] * region_mass[c] * p;
  }
  const double coefficient = 2.0 * (fraction - noisy_answer / n_total);

  std::vector<double> prefix(k + 1);
  std::vector<double> suffix(k + 1);
  for (int c = 0; c < num_components; ++c) {
    const double w = model.params.weights[c];
    gradient.weights[c] += coefficient * region_mass[c] * product[c];
    const double region_term = coefficient * w * product[c];
    for (int leaf = leaf_begin; leaf < leaf_end; ++leaf) {
      gradient.region[c * num_leaves + leaf] += region_term;
    }
    prefix[0] = 1.0;
    for (size_t i = 0; i < k; ++i) {
      prefix[i + 1] = prefix[i] * model.feature_probs(c, predicates[i].feature)
                                      [predicates[i].value];
    }
    suffix[k] = 1.0;
    for (size_t i = k; i-- > 0;) {
      suffix[i] = suffix[i + 1] * model.feature_probs(c, predicates[i].feature)
                                      [predicates[i].value];
    }
    for (size_t i = 0; i < k; ++i) {
      const int m = predicates[i].feature;
      const int d = model.schema.domain_size(m);
      gradient.features[m][c * d + predicates[i].value] +=
          coefficient * w * region_mass[c] * prefix[i] * suffix[i + 1];
    }
  }
}

void AddInto(const HpdParameters& term, HpdParameters& total) {
  for (size_t i = 0; i < term.weights.size(); ++i) {
    total.weights[i] += term.weights[i];
  }
  for (size_t i = 0; i < term.region.size(); ++i) {
    total.region[i] += term.region[i];
  }
  for (size_t m = 0; m < term.features.size(); ++m) {
    for (size_t i = 0; i < term.features[m].size(); ++i) {
      total.features[m][i] += term.features[m][i];
    }
  }
}

}  // namespace hpd_internal

namespace {

using hpd_internal::AccumulateGradient;
using hpd_internal::AddInto;
using hpd_internal::CheckMeasurements;
using hpd_internal::ZeroParameters;

constexpr size_t kGradientBlock = 16;
constexpr int kMaxHalvings = 40;

// Applies `fn` to every probability vector of `params`.
template <typename Fn>
void ForEachVector(const HpdModel& shape, HpdParameters& params, Fn fn) {
  const int num_components = shape.num_components;
  fn(std::span<double>(params.weights));
  const int leaves = shape.tree.num_leaves();
  for (int c = 0; c < num_components; ++c) {
    fn(std::span<double>(params.region).subspan(c * leaves, leaves));
  }
  for (int m = 0; m < shape.schema.num_features(); ++m) {
    const int d = shape.schema.domain_size(m);
    for (int c = 0; c < num_components; ++c) {
      fn(std::span<double>(params.features[m]).subspan(c * d, d));
    }
  }
}

void NormalizeInPlace(std::span<double> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
}

}  // namespace

absl::Status CheckModel(const HpdModel& model, double tolerance) {
  const int num_components = model.num_components;
  const int m = model.schema.num_features();
  if (num_components < 1) {
    return absl::InvalidArgumentError("HPD model needs at least one component");
  }
  if (model.params.weights.size() != static_cast<size_t>(num_components) ||
      model.params.region.size() !=
          static_cast<size_t>(num_components) * model.tree.num_leaves() ||
      model.params.features.size() != static_cast<size_t>(m)) {
    return absl::InvalidArgumentError("HPD parameter shapes do not match");
  }
  for (int f = 0; f < m; ++f) {
    if (model.params.features[f].size() !=
        static_cast<size_t>(num_components) * model.schema.domain_size(f)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "HPD vectors for feature '", model.schema.feature(f).name,
          "' have the wrong size"));
    }
  }
  const double violation = SimplexViolation(model);
  if (!(violation <= tolerance)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "HPD probability vector off the simplex by %.3g", violation));
  }
  return absl::OkStatus();
}

double SimplexViolation(const HpdModel& model) {
  double worst = 0.0;
  HpdParameters copy = model.params;
  ForEachVector(model, copy, [&worst](std::span<double> v) {
    double sum = 0.0;
    for (double x : v) {
      if (!std::isfinite(x)) {
        worst = std::numeric_limits<double>::infinity();
        return;
      }
      sum += x;
      worst = std::max(worst, -x);
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  });
  return worst;
}

absl::StatusOr<HpdModel> InitializeModel(const FeatureSchema& schema,
                                         const RegionTree& tree,
                                         int num_components,
                                         RandomSource& rng) {
  if (num_components < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "number of mixture components must be >= 1, got ", num_components));
  }
  HpdModel model{.schema = schema,
                 .tree = tree,
                 .num_components = num_components,
                 .params = {}};
  model.params.weights.assign(num_components, 0.0);
  model.params.region.assign(
      static_cast<size_t>(num_components) * tree.num_leaves(), 0.0);
  for (int m = 0; m < schema.num_features(); ++m) {
    model.params.features.emplace_back(
        static_cast<size_t>(num_components) * schema.domain_size(m), 0.0);
  }
  ForEachVector(model, model.params, [&rng](std::span<double> v) {
    for (double& x : v) x = 1.0 + 0.5 * rng.UniformOpen();
    NormalizeInPlace(v);
  });
  return model;
}

absl::StatusOr<double> ModelAnswer(const HpdModel& model,
                                   const MarginalQuery& query, int node,
                                   double n_total) {
  if (node < 0 || node >= model.tree.num_nodes()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown region node ", node));
  }
  for (const Predicate& p : query.predicates()) {
    if (p.feature >= model.schema.num_features() ||
        p.value >= model.schema.domain_size(p.feature)) {
      return absl::InvalidArgumentError("query does not match the model schema");
    }
  }
  const int leaf_begin = model.tree.leaf_begin(node);
  const int leaf_end = model.tree.leaf_end(node);
  double fraction = 0.0;
  for (int c = 0; c < model.num_components; ++c) {
    std::span<const double> r = model.region_probs(c);
    double term = model.params.weights[c] *
                  std::accumulate(r.begin() + leaf_begin, r.begin() + leaf_end,
                                  0.0);
    for (const Predicate& p : query.predicates()) {
      term *= model.feature_probs(c, p.feature)[p.value];
    }
    fraction += term;
  }
  return n_total * fraction;
}

absl::StatusOr<AnswerTable> ModelAnswerTable(const HpdModel& model,
                                             const QuerySet& queries,
                                             double n_total) {
  const int num_components = model.num_components;
  const RegionTree& tree = model.tree;
  const int num_nodes = tree.num_nodes();
  const int num_leaves = tree.num_leaves();
  for (const MarginalQuery& q : queries) {
    for (const Predicate& p : q.predicates()) {
      if (p.feature >= model.schema.num_features() ||
          p.value >= model.schema.domain_size(p.feature)) {
        return absl::InvalidArgumentError(
            "query does not match the model schema");
      }
    }
  }
  // region_mass[c * num_nodes + node] = P_c(subtree of node).
  std::vector<double> region_mass(static_cast<size_t>(num_components) *
                                  num_nodes);
  std::vector<double> prefix(num_leaves + 1);
  for (int c = 0; c < num_components; ++c) {
    std::span<const double> r = model.region_probs(c);
    prefix[0] = 0.0;
    for (int l = 0; l < num_leaves; ++l) prefix[l + 1] = prefix[l] + r[l];
    for (int node = 0; node < num_nodes; ++node) {
      region_mass[c * num_nodes + node] =
          prefix[tree.leaf_end(node)] - prefix[tree.leaf_begin(node)];
    }
  }
  AnswerTable table(queries, tree);
  const int64_t num_queries = static_cast<int64_t>(queries.size());

#pragma omp parallel for schedule(static)
  for (int64_t q = 0; q < num_queries; ++q) {
    std::span<double> row = table.row(q);
    std::fill(row.begin(), row.end(), 0.0);
    for (int c = 0; c < num_components; ++c) {
      double product = model.params.weights[c];
      for (const Predicate& p : queries[q].predicates()) {
        product *= model.feature_probs(c, p.feature)[p.value];
      }
      const double* mass = &region_mass[c * num_nodes];
      for (int node = 0; node < num_nodes; ++node) {
        row[node] += product * mass[node];
      }
    }
    for (double& v : row) v *= n_total;
  }
  return table;
}

absl::StatusOr<size_t> SelectMeasurement(const AnswerTable& model_answers,
                                         const AnswerTable& truth,
                                         double epsilon, RandomSource& rng) {
  if (!model_answers.SameShape(truth)) {
    return absl::InvalidArgumentError(
        "model and truth answer tables differ in shape");
  }
  std::vector<double> scores(truth.values().size());
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::abs(model_answers.values()[i] - truth.values()[i]);
  }
  return ExponentialMechanism(scores, 1.0, epsilon, rng);
}

absl::Status MeasurementLog::Append(const Measurement& measurement) {
  const int last = last_round();
  if (measurement.round != last && measurement.round != last + 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "measurement round ", measurement.round, " does not follow round ",
        last));
  }
  if (measurement.round < 1) {
    return absl::InvalidArgumentError("measurement rounds start at 1");
  }
  entries_.push_back(measurement);
  return absl::OkStatus();
}

absl::StatusOr<double> MeasurementLoss(const HpdModel& model,
                                       const QuerySet& queries,
                                       std::span<const Measurement> log,
                                       double n_total) {
  RETURN_IF_ERROR(CheckMeasurements(model, queries, log));
  double loss = 0.0;
  for (const Measurement& m : log) {
    ASSIGN_OR_RETURN(double answer,
                     ModelAnswer(model, queries[m.query], m.node, n_total));
    const double residual = (answer - m.noisy_answer) / n_total;
    loss += residual * residual;
  }
  return loss;
}

absl::StatusOr<HpdParameters> LossGradient(const HpdModel& model,
                                           const QuerySet& queries,
                                           std::span<const Measurement> log,
                                           double n_total) {
  RETURN_IF_ERROR(CheckMeasurements(model, queries, log));
  const int64_t num_blocks =
      static_cast<int64_t>((log.size() + kGradientBlock - 1) / kGradientBlock);
  std::vector<HpdParameters> partial(num_blocks);

#pragma omp parallel for schedule(static)
  for (int64_t b = 0; b < num_blocks; ++b) {
    HpdParameters local = ZeroParameters(model);
    const size_t end = std::min(log.size(), (b + 1) * kGradientBlock);
    for (size_t j = b * kGradientBlock; j < end; ++j) {
      AccumulateGradient(model, queries[log[j].query], log[j].node,
                         log[j].noisy_answer, n_total, local);
    }
    partial[b] = std::move(local);
  }
  HpdParameters gradient = ZeroParameters(model);
  for (const HpdParameters& p : partial) AddInto(p, gradient);
  return gradient;
}

namespace {

// One projected gradient step with step halving: returns the new loss, which
// is never above `current_loss`.
absl::StatusOr<double> DescentStep(HpdModel& model, const QuerySet& queries,
                                   std::span<const Measurement> log,
                                   double n_total, double learning_rate,
                                   double current_loss) {
  ASSIGN_OR_RETURN(HpdParameters gradient,
                   LossGradient(model, queries, log, n_total));
  double step = learning_rate;
  for (int attempt = 0; attempt < kMaxHalvings; ++attempt, step *= 0.5) {
    HpdModel candidate = model;
    HpdParameters& params = candidate.params;
    for (size_t i = 0; i < params.weights.size(); ++i) {
      params.weights[i] -= step * gradient.weights[i];
    }
    for (size_t i = 0; i < params.region.size(); ++i) {
      params.region[i] -= step * gradient.region[i];
    }
    for (size_t m = 0; m < params.features.size(); ++m) {
      for (size_t i = 0; i < params.features[m].size(); ++i) {
        params.features[m][i] -= step * gradient.features[m][i];
      }
    }
    ForEachVector(candidate, params, [](std::span<double> v) {
      ProjectOntoProbabilitySimplex(v);
    });
    ASSIGN_OR_RETURN(double loss,
                     MeasurementLoss(candidate, queries, log, n_total));
    if (loss <= current_loss) {
      model = std::move(candidate);
      return loss;
    }
  }
  return current_loss;
}

}  // namespace

absl::StatusOr<HpdFitResult> AdaptiveMeasurementsFit(
    const Population& population, const QuerySet& queries, double epsilon,
    double delta, const HpdOptions& options, uint64_t seed,
    PrivacyBudget* ledger) {
  if (options.rounds < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("HPD needs at least one round, got ", options.rounds));
  }
  if (!(options.learning_rate > 0.0) || options.inner_steps < 1) {
    return absl::InvalidArgumentError(
        "HPD needs a positive learning rate and at least one inner step");
  }
  if (queries.empty()) {
    return absl::InvalidArgumentError("HPD needs a non-empty query set");
  }
  const double round_epsilon = epsilon / options.rounds;
  const double selection_epsilon = round_epsilon / 2.0;
  const double measurement_epsilon = round_epsilon - selection_epsilon;
  const double round_delta = delta / options.rounds;
  ASSIGN_OR_RETURN(GaussianMechanism gaussian,
                   GaussianMechanism::Create(1.0, measurement_epsilon,
                                             round_delta));
  ASSIGN_OR_RETURN(AnswerTable truth, Evaluate(population, queries));
  const double n_total = static_cast<double>(population.size());

  RandomSource rng = RandomSource(seed).Substream("hpd");
  RandomSource init_rng = rng.Substream("init");
  ASSIGN_OR_RETURN(HpdModel model,
                   InitializeModel(population.schema(), population.tree(),
                                   options.num_components, init_rng));
  HpdFitResult result{.model = model,
                      .log = {},
                      .loss_before = {},
                      .loss_after = {},
                      .max_simplex_violation = SimplexViolation(model)};
  for (int round = 1; round <= options.rounds; ++round) {
    RandomSource round_rng = rng.Substream(static_cast<uint64_t>(round));
    if (ledger != nullptr) {
      RETURN_IF_ERROR(ledger->Spend(selection_epsilon, 0.0));
    }
    ASSIGN_OR_RETURN(AnswerTable current,
                     ModelAnswerTable(result.model, queries, n_total));
    ASSIGN_OR_RETURN(size_t cell, SelectMeasurement(current, truth,
                                                    selection_epsilon,
                                                    round_rng));
    if (ledger != nullptr) {
      RETURN_IF_ERROR(ledger->Spend(measurement_epsilon, round_delta));
    }
    const size_t query = cell / truth.num_nodes();
    const int node = static_cast<int>(cell % truth.num_nodes());
    double answer = truth.at(query, node);
    if (!options.noiseless) answer += gaussian.SampleNoise(round_rng);
    RETURN_IF_ERROR(result.log.Append({.query = query,
                                       .node = node,
                                       .noisy_answer = answer,
                                       .epsilon_spent = round_epsilon,
                                       .round = round}));

    std::span<const Measurement> log = result.log.entries();
    ASSIGN_OR_RETURN(double loss,
                     MeasurementLoss(result.model, queries, log, n_total));
    result.loss_before.push_back(loss);
    for (int step = 0; step < options.inner_steps; ++step) {
      ASSIGN_OR_RETURN(loss, DescentStep(result.model, queries, log, n_total,
                                         options.learning_rate, loss));
      result.max_simplex_violation =
          std::max(result.max_simplex_violation, SimplexViolation(result.model));
    }
    result.loss_after.push_back(loss);
  }
  return result;
}

absl::StatusOr<Population> SampleSynthetic(const HpdModel& model,
                                           int64_t n_out, RandomSource& rng) {
  if (n_out < 1) {
    return absl::InvalidArgumentError("synthetic population size must be >= 1");
  }
  RETURN_IF_ERROR(CheckModel(model, 1e-6));
  const int m = model.schema.num_features();
  constexpr int64_t kChunk = 4096;
  const int64_t num_chunks = (n_out + kChunk - 1) / kChunk;
  const RandomSource base = rng.Substream("hpd/sample");
  std::vector<int64_t> ids(n_out);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> features(static_cast<size_t>(n_out) * m);
  std::vector<int> leaves(n_out);

#pragma omp parallel for schedule(dynamic)
  for (int64_t chunk = 0; chunk < num_chunks; ++chunk) {
    RandomSource chunk_rng = base.Substream(static_cast<uint64_t>(chunk));
    const int64_t end = std::min(n_out, (chunk + 1) * kChunk);
    for (int64_t r = chunk * kChunk; r < end; ++r) {
      const int c = static_cast<int>(chunk_rng.Categorical(model.params.weights));
      leaves[r] = static_cast<int>(chunk_rng.Categorical(model.region_probs(c)));
      for (int f = 0; f < m; ++f) {
        features[r * m + f] =
            static_cast<int>(chunk_rng.Categorical(model.feature_probs(c, f)));
      }
    }
  }
  return Population::Create(model.schema, model.tree, std::move(ids),
                            std::move(features), std::move(leaves));
}

absl::StatusOr<HpdResult> RunHpd(const Population& population,
                                 const QuerySet& queries, double epsilon,
                                 double delta, const HpdOptions& options,
                                 uint64_t seed, PrivacyBudget* ledger) {
  ASSIGN_OR_RETURN(HpdFitResult fit,
                   AdaptiveMeasurementsFit(population, queries, epsilon, delta,
                                           options, seed, ledger));
  RandomSource sample_rng = RandomSource(seed).Substream("hpd").Substream(
      "sample");
  ASSIGN_OR_RETURN(
      Population synthetic,
      SampleSynthetic(fit.model,
                      options.n_out > 0 ? options.n_out : population.size(),
                      sample_rng));
  return HpdResult{std::move(fit), std::move(synthetic)};
}

std::string HpdModelToJson(const HpdModel& model) {
  nlohmann::json components = nlohmann::json::array();
  for (int c = 0; c < model.num_components; ++c) {
    std::span<const double> region = model.region_probs(c);
    nlohmann::json features = nlohmann::json::object();
    for (int m = 0; m < model.schema.num_features(); ++m) {
      std::span<const double> p = model.feature_probs(c, m);
      features[model.schema.feature(m).name] =
          std::vector<double>(p.begin(), p.end());
    }
    nlohmann::json regions = nlohmann::json::object();
    for (int l = 0; l < model.tree.num_leaves(); ++l) {
      regions[model.tree.id(model.tree.leaf_node(l))] = region[l];
    }
    components.push_back({{"weight", model.params.weights[c]},
                          {"region", std::move(regions)},
                          {"features", std::move(features)}});
  }
  nlohmann::json doc = {{"num_components", model.num_components},
                        {"components", std::move(components)}};
  return doc.dump(2);
}

absl::Status WriteMeasurementLogCsv(const MeasurementLog& log,
                                    const QuerySet& queries,
                                    const HpdModel& model, std::ostream& out) {
  out << "query_id,query,region_id,noisy_answer,epsilon_spent,round\n";
  for (const Measurement& m : log.entries()) {
    if (m.query >= queries.size() || m.node >= model.tree.num_nodes()) {
      return absl::InvalidArgumentError("log entry outside the query set");
    }
    out << absl::StrFormat("%d,\"%s\",%s,%.17g,%.17g,%d\n", m.query,
                           queries[m.query].DebugString(model.schema),
                           model.tree.id(m.node), m.noisy_answer,
                           m.epsilon_spent, m.round);
  }
  if (!out) return absl::InternalError("failed writing measurement log");
  return absl::OkStatus();
}

}  // namespace census_dp
