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

#include <cmath>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "census_dp/constraints.h"
#include "census_dp/metrics.h"
#include "test_util.h"

namespace census_dp {
namespace {

using ::census_dp::testing::IsOk;
using ::census_dp::testing::MakeSchema;
using ::census_dp::testing::MakeTree;
using ::census_dp::testing::StatusIs;

MarginalQuery Q(std::vector<Predicate> predicates, const FeatureSchema& schema) {
  return MarginalQuery::Create(std::move(predicates), schema).value();
}

HpdModel FixedModel(const FeatureSchema& schema, const RegionTree& tree,
                    std::vector<double> weights,
                    std::vector<std::vector<double>> features) {
  const int k = static_cast<int>(weights.size());
  HpdModel model{.schema = schema,
                 .tree = tree,
                 .num_components = k,
                 .params = {std::move(weights),
                            std::vector<double>(k * tree.num_leaves(),
                                                1.0 / tree.num_leaves()),
                            std::move(features)}};
  return model;
}

TEST(ModelAnswerTest, UniformBinaryAtRoot) {
  FeatureSchema schema = MakeSchema({2});
  RegionTree tree = MakeTree({3});
  HpdModel model = FixedModel(schema, tree, {1.0}, {{0.5, 0.5}});
  ASSERT_THAT(CheckModel(model), IsOk());
  EXPECT_NEAR(ModelAnswer(model, Q({{0, 1}}, schema), 0, 100).value(), 50.0,
              1e-12);
  EXPECT_NEAR(ModelAnswer(model, Q({{0, 1}}, schema), 2, 90).value(), 15.0,
              1e-12);
}

TEST(ModelAnswerTest, ZeroProbabilityValueGivesZero) {
  FeatureSchema schema = MakeSchema({2, 3});
  RegionTree tree = MakeTree({2});
  HpdModel model = FixedModel(schema, tree, {0.4, 0.6},
                              {{0.5, 0.5, 0.3, 0.7},
                               {0.0, 0.5, 0.5, 0.0, 0.2, 0.8}});
  EXPECT_EQ(ModelAnswer(model, Q({{1, 0}}, schema), 0, 100).value(), 0.0);
}

TEST(ModelAnswerTest, TwoPointMassComponents) {
  FeatureSchema schema = MakeSchema({2});
  RegionTree tree = MakeTree({2});
  HpdModel model = FixedModel(schema, tree, {0.5, 0.5}, {{1, 0, 0, 1}});
  EXPECT_NEAR(ModelAnswer(model, Q({{0, 1}}, schema), 0, 100).value(), 50.0,
              1e-12);
}

TEST(ModelAnswerTest, UnknownNodeIsError) {
  FeatureSchema schema = MakeSchema({2});
  RegionTree tree = MakeTree({2});
  HpdModel model = FixedModel(schema, tree, {1.0}, {{0.5, 0.5}});
  EXPECT_THAT(ModelAnswer(model, Q({{0, 1}}, schema), 3, 100),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

class RandomModelTest : public ::testing::Test {
 protected:
  RandomModelTest()
      : schema_(MakeSchema({3, 2, 4})),
        tree_(MakeTree({2, 3})),
        population_(GeneratePopulation(2, 800, schema_, tree_, 0.5).value()) {
    QuerySplit split = SampleQuerySets(6, schema_, 2, 12, 0).value();
    queries_ = split.in_distribution;
  }

  HpdModel Random(uint64_t seed, int k = 4) {
    RandomSource rng(seed);
    return InitializeModel(schema_, tree_, k, rng).value();
  }

  std::vector<Measurement> RandomLog(uint64_t seed, int size) {
    RandomSource rng(seed);
    std::vector<Measurement> log;
    for (int i = 0; i < size; ++i) {
      log.push_back({.query = rng.UniformInt(queries_.size()),
                     .node = static_cast<int>(rng.UniformInt(tree_.num_nodes())),
                     .noisy_answer = 300.0 * rng.UniformOpen() - 20.0,
                     .epsilon_spent = 0.1,
                     .round = i + 1});
    }
    return log;
  }

  FeatureSchema schema_;
  RegionTree tree_;
  Population population_;
  QuerySet queries_;
};

TEST_F(RandomModelTest, TableMatchesPointwiseAnswers) {
  HpdModel model = Random(1);
  AnswerTable table = ModelAnswerTable(model, queries_, 800).value();
  for (size_t q = 0; q < queries_.size(); ++q) {
    for (int node = 0; node < tree_.num_nodes(); ++node) {
      EXPECT_NEAR(table.at(q, node),
                  ModelAnswer(model, queries_[q], node, 800).value(), 1e-9);
    }
  }
}

TEST_F(RandomModelTest, GradientMatchesCentralDifferences) {
  const double n = 800;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    HpdModel model = Random(seed);
    std::vector<Measurement> log = RandomLog(seed + 100, 20);
    HpdParameters gradient = LossGradient(model, queries_, log, n).value();
    auto check = [&](std::vector<double>& params,
                     const std::vector<double>& grad, const char* what) {
      for (size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        const double h = 1e-6;
        params[i] = saved + h;
        const double up = MeasurementLoss(model, queries_, log, n).value();
        params[i] = saved - h;
        const double down = MeasurementLoss(model, queries_, log, n).value();
        params[i] = saved;
        const double fd = (up - down) / (2 * h);
        ASSERT_LE(std::abs(fd - grad[i]),
                  1e-5 * std::max(std::abs(grad[i]), 1e-3))
            << what << "[" << i << "] seed " << seed;
      }
    };
    check(model.params.weights, gradient.weights, "weights");
    check(model.params.region, gradient.region, "region");
    for (size_t m = 0; m < model.params.features.size(); ++m) {
      check(model.params.features[m], gradient.features[m], "features");
    }
  }
}

TEST_F(RandomModelTest, ParallelGradientMatchesReference) {
  HpdModel model = Random(7, 8);
  std::vector<Measurement> log = RandomLog(8, 100);
  omp_set_num_threads(4);
  HpdParameters fast = LossGradient(model, queries_, log, 800).value();
  HpdParameters serial =
      reference::LossGradient(model, queries_, log, 800).value();
  auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, std::abs(b[i])));
    }
  };
  close(fast.weights, serial.weights);
  close(fast.region, serial.region);
  for (size_t m = 0; m < fast.features.size(); ++m) {
    close(fast.features[m], serial.features[m]);
  }
  omp_set_num_threads(1);
  EXPECT_EQ(LossGradient(model, queries_, log, 800).value(), fast);
}

TEST_F(RandomModelTest, SelectionAtLargeEpsilonPicksMaxError) {
  AnswerTable truth = Evaluate(population_, queries_).value();
  for (int trial = 0; trial < 100; ++trial) {
    HpdModel model = Random(200 + trial);
    AnswerTable answers = ModelAnswerTable(model, queries_, 800).value();
    size_t argmax = 0;
    double best = -1;
    for (size_t i = 0; i < truth.values().size(); ++i) {
      const double err = std::abs(answers.values()[i] - truth.values()[i]);
      if (err > best) {
        best = err;
        argmax = i;
      }
    }
    RandomSource rng(trial);
    ASSERT_EQ(SelectMeasurement(answers, truth, 1e6, rng).value(), argmax);
  }
}

TEST(MeasurementLogTest, RoundsAreContiguousFromOne) {
  MeasurementLog log;
  EXPECT_FALSE(log.Append({.round = 2}).ok());
  EXPECT_THAT(log.Append({.round = 1}), IsOk());
  EXPECT_THAT(log.Append({.round = 1}), IsOk());
  EXPECT_THAT(log.Append({.round = 2}), IsOk());
  EXPECT_FALSE(log.Append({.round = 4}).ok());
  EXPECT_FALSE(log.Append({.round = 1}).ok());
  EXPECT_EQ(log.size(), 3u);
}

TEST(AdaptiveMeasurementsTest, NoiselessSingleQueryFitsTruth) {
  FeatureSchema schema = MakeSchema({2, 3});
  RegionTree tree = MakeTree({4});
  Population pop = GeneratePopulation(3, 2000, schema, tree, 0.5).value();
  QuerySet queries = QuerySet::Create({Q({{1, 2}}, schema)}).value();
  AnswerTable truth = Evaluate(pop, queries).value();
  HpdOptions options;
  options.num_components = 1;
  HpdFitResult fit =
      AdaptiveMeasurementsFit(pop, queries, 1e6, 1e-8, options, 4).value();
  for (const Measurement& m : fit.log.entries()) {
    const double model = ModelAnswer(fit.model, queries[0], m.node, 2000).value();
    EXPECT_LE(std::abs(model - truth.at(0, m.node)), 0.01 * 2000)
        << "node " << m.node;
  }
  const double root = ModelAnswer(fit.model, queries[0], 0, 2000).value();
  EXPECT_LE(std::abs(root - truth.at(0, 0)), 0.01 * 2000);
}

class AdaptiveFitTest : public RandomModelTest {};

TEST_F(AdaptiveFitTest, LossNeverIncreasesWithinARound) {
  HpdOptions options;
  options.num_components = 8;
  options.rounds = 30;
  options.noiseless = true;
  HpdFitResult fit =
      AdaptiveMeasurementsFit(population_, queries_, 1.0, 1e-6, options, 9)
          .value();
  ASSERT_EQ(fit.loss_before.size(), 30u);
  for (size_t t = 0; t < fit.loss_before.size(); ++t) {
    EXPECT_LE(fit.loss_after[t], fit.loss_before[t] + 1e-9) << "round " << t;
  }
  EXPECT_LE(fit.max_simplex_violation, 1e-9);
  EXPECT_THAT(CheckModel(fit.model), IsOk());
}

TEST_F(AdaptiveFitTest, LedgerSpendsEqualAmountsPerRound) {
  HpdOptions options;
  options.num_components = 4;
  options.rounds = 20;
  PrivacyBudget ledger = PrivacyBudget::Create(2.0, 1e-6).value();
  HpdFitResult fit = AdaptiveMeasurementsFit(population_, queries_, 2.0, 1e-6,
                                             options, 3, &ledger)
                         .value();
  EXPECT_LE(ledger.spent_epsilon(), 2.0 + PrivacyBudget::kEpsilonSlack);
  EXPECT_NEAR(ledger.spent_epsilon(), 2.0, 1e-9);
  EXPECT_LE(ledger.spent_delta(), 1e-6 + PrivacyBudget::kDeltaSlack);
  ASSERT_EQ(fit.log.size(), 20u);
  for (size_t i = 0; i < fit.log.size(); ++i) {
    EXPECT_EQ(fit.log.entries()[i].round, static_cast<int>(i) + 1);
    EXPECT_DOUBLE_EQ(fit.log.entries()[i].epsilon_spent, 0.1);
  }
}

TEST_F(AdaptiveFitTest, OverdraftIsRejected) {
  HpdOptions options;
  options.rounds = 5;
  PrivacyBudget ledger = PrivacyBudget::Create(0.5, 1e-6).value();
  EXPECT_THAT(AdaptiveMeasurementsFit(population_, queries_, 1.0, 1e-6,
                                      options, 3, &ledger),
              StatusIs(absl::StatusCode::kResourceExhausted));
}

TEST_F(AdaptiveFitTest, DeterministicInSeed) {
  HpdOptions options;
  options.num_components = 4;
  options.rounds = 10;
  HpdResult a = RunHpd(population_, queries_, 1.0, 1e-6, options, 5).value();
  HpdResult b = RunHpd(population_, queries_, 1.0, 1e-6, options, 5).value();
  EXPECT_EQ(a.fit.model.params, b.fit.model.params);
  EXPECT_EQ(a.synthetic, b.synthetic);
}

TEST(HpdSamplingTest, PointMassModelGivesIdenticalRecords) {
  FeatureSchema schema = MakeSchema({3, 2});
  RegionTree tree = MakeTree({2});
  HpdModel model = FixedModel(schema, tree, {1.0}, {{0, 0, 1}, {1, 0}});
  model.params.region = {0.0, 1.0};
  RandomSource rng(1);
  Population pop = SampleSynthetic(model, 1000, rng).value();
  for (int64_t r = 0; r < pop.size(); ++r) {
    ASSERT_EQ(pop.value(r, 0), 2);
    ASSERT_EQ(pop.value(r, 1), 0);
    ASSERT_EQ(pop.leaf_ordinal(r), 1);
  }
}

TEST(HpdSamplingTest, OneWayMarginalsMatchMixture) {
  FeatureSchema schema = MakeSchema({3, 4});
  RegionTree tree = MakeTree({2, 2});
  RandomSource init(11);
  HpdModel model = InitializeModel(schema, tree, 5, init).value();
  RandomSource rng(12);
  Population pop = SampleSynthetic(model, 100000, rng).value();
  EXPECT_THAT(pop.Validate(), IsOk());
  for (int f = 0; f < schema.num_features(); ++f) {
    const int d = schema.domain_size(f);
    std::vector<double> analytic(d, 0.0);
    for (int c = 0; c < model.num_components; ++c) {
      for (int v = 0; v < d; ++v) {
        analytic[v] += model.params.weights[c] * model.feature_probs(c, f)[v];
      }
    }
    const int subset[] = {f};
    ContingencyTable empirical = MarginalTable(pop, subset).value();
    ContingencyTable expected{{d}, analytic};
    EXPECT_LE(TotalVariationDistance(empirical, expected).value(), 0.01);
  }
  QuerySplit split = SampleQuerySets(1, schema, 2, 10, 0).value();
  EXPECT_EQ(
      ValidateConstraints(Evaluate(pop, split.in_distribution).value()).total(),
      0);
}

TEST_F(RandomModelTest, ExportsJsonAndLog) {
  HpdOptions options;
  options.num_components = 2;
  options.rounds = 3;
  HpdFitResult fit =
      AdaptiveMeasurementsFit(population_, queries_, 1.0, 1e-6, options, 1)
          .value();
  EXPECT_THAT(HpdModelToJson(fit.model), ::testing::HasSubstr("\"weight\""));
  std::ostringstream out;
  ASSERT_THAT(WriteMeasurementLogCsv(fit.log, queries_, fit.model, out), IsOk());
  const std::string csv = out.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace census_dp
