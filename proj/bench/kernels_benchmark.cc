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

// Parallel kernels against their serial references in census_dp::reference.

#include <vector>

#include "benchmark/benchmark.h"
#include "census_dp/hpd.h"
#include "census_dp/mst.h"
#include "census_dp/population.h"
#include "census_dp/query.h"
#include "census_dp/topdown.h"

namespace census_dp {
namespace {

struct Fixture {
  FeatureSchema schema;
  RegionTree tree;
  Population population;
  QuerySet queries;
  AnswerTable truth;
  NoisyAnswerTable noisy;
  HpdModel model;
  std::vector<Measurement> log;

  static const Fixture& Get() {
    static const Fixture* fixture = new Fixture(Build());
    return *fixture;
  }

 private:
  static Fixture Build() {
    FeatureSchema schema =
        FeatureSchema::Create({{"a", 4}, {"b", 3}, {"c", 5}, {"d", 2},
                               {"e", 4}, {"f", 3}, {"g", 5}, {"h", 2}})
            .value();
    RegionTree tree = RegionTree::Complete("US", {5, 8}).value();
    Population population =
        GeneratePopulation(1, 50000, schema, tree, 0.6).value();
    QuerySet queries =
        SampleQuerySets(2, schema, 3, 400, 0).value().in_distribution;
    AnswerTable truth = Evaluate(population, queries).value();
    NoisyAnswerTable noisy = AddNoise(truth, {1.0, 3}).value();
    RandomSource rng(4);
    HpdModel model = InitializeModel(schema, tree, 32, rng).value();
    std::vector<Measurement> log;
    for (int i = 0; i < 100; ++i) {
      log.push_back({.query = static_cast<size_t>(i * 3 % queries.size()),
                     .node = i % tree.num_nodes(),
                     .noisy_answer = 100.0,
                     .epsilon_spent = 0.01,
                     .round = i + 1});
    }
    return Fixture{std::move(schema), std::move(tree),  std::move(population),
                   std::move(queries), std::move(truth), std::move(noisy),
                   std::move(model),  std::move(log)};
  }
};

void BM_Evaluate(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(f.population, f.queries));
  }
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

void BM_EvaluateReference(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::Evaluate(f.population, f.queries));
  }
}
BENCHMARK(BM_EvaluateReference)->Unit(benchmark::kMillisecond);

void BM_PostProcess(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(PostProcess(f.noisy, f.truth));
  }
}
BENCHMARK(BM_PostProcess)->Unit(benchmark::kMillisecond);

void BM_PostProcessReference(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::PostProcess(f.noisy, f.truth));
  }
}
BENCHMARK(BM_PostProcessReference)->Unit(benchmark::kMillisecond);

void BM_CorrelationGraph(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildCorrelationGraph(f.population));
  }
}
BENCHMARK(BM_CorrelationGraph)->Unit(benchmark::kMillisecond);

void BM_CorrelationGraphReference(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::BuildCorrelationGraph(f.population));
  }
}
BENCHMARK(BM_CorrelationGraphReference)->Unit(benchmark::kMillisecond);

void BM_LossGradient(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(LossGradient(f.model, f.queries, f.log, 50000));
  }
}
BENCHMARK(BM_LossGradient)->Unit(benchmark::kMicrosecond);

void BM_LossGradientReference(benchmark::State& state) {
  const Fixture& f = Fixture::Get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::LossGradient(f.model, f.queries, f.log, 50000));
  }
}
BENCHMARK(BM_LossGradientReference)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace census_dp

BENCHMARK_MAIN();
