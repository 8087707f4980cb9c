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

#ifndef CENSUS_DP_METRICS_H_
#define CENSUS_DP_METRICS_H_

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "census_dp/population.h"
#include "census_dp/query.h"

namespace census_dp {

inline constexpr int kCdfGridPoints = 512;

struct CdfPoint {
  double value;
  double cumulative_fraction;
};

// Per-cell absolute errors, flattened in (query, node) order, plus summaries.
struct ErrorDistribution {
  std::vector<double> errors;
  double mean = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  // kCdfGridPoints evenly spaced values over [min, max]; last fraction is 1.
  std::vector<CdfPoint> cdf;
};

// Summaries for an arbitrary sample; quantiles use linear interpolation
// between order statistics.
ErrorDistribution SummarizeErrors(std::vector<double> errors);

double Quantile(std::vector<double> sorted, double q);

absl::StatusOr<ErrorDistribution> AbsoluteErrors(const AnswerTable& released,
                                                 const AnswerTable& truth);

// |a - truth| - |b - truth| per cell; positive means `a` is worse.
absl::StatusOr<std::vector<double>> ErrorDifference(const AnswerTable& a,
                                                    const AnswerTable& b,
                                                    const AnswerTable& truth);

// Fraction of (query, node) cells released exactly.
absl::StatusOr<double> Accuracy(const AnswerTable& released,
                                const AnswerTable& truth);

// 0.5 * L1 distance between two normalized tables of the same shape.
absl::StatusOr<double> TotalVariationDistance(const ContingencyTable& p,
                                              const ContingencyTable& q);

// sqrt(chi^2 / (N (min(rows, cols) - 1))) on a two-way count table, after
// dropping empty rows and columns. No bias correction. A table that collapses
// to a single row or column has V = 0.
absl::StatusOr<double> CramersV(const ContingencyTable& counts);

enum class CorrelationLevel { kLow, kWeak, kMiddle, kStrong };

// [0, .1) low, [.1, .3) weak, [.3, .5) middle, [.5, 1] strong.
CorrelationLevel BucketCramersV(double v);
std::string_view CorrelationLevelName(CorrelationLevel level);

struct QualityReport {
  double ind = 0.0;
  double pair = 0.0;
  double corr = 0.0;
};

// Ind: mean one-way TVD over features. Pair: mean two-way TVD over feature
// pairs. Corr: fraction of pairs whose Cramer's V bucket agrees. With a
// single feature, pair = 0 and corr = 1.
absl::StatusOr<QualityReport> ComputeQualityReport(const Population& synthetic,
                                                   const Population& truth);

std::string QualityReportToJson(const QualityReport& report);
std::string ErrorSummaryToJson(const ErrorDistribution& distribution);
// CSV with header error_value,cumulative_fraction.
absl::Status WriteCdfCsv(const std::vector<CdfPoint>& cdf, std::ostream& out);

}  // namespace census_dp

#endif  // CENSUS_DP_METRICS_H_
