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

#include "census_dp/metrics.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "census_dp/status_macros.h"
#include "json.hpp"

namespace census_dp {
namespace {

// Pairwise summation; the result depends only on the input order.
double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

absl::Status CheckSameShape(const AnswerTable& a, const AnswerTable& b) {
  if (!a.SameShape(b)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "answer table shape mismatch: ", a.num_queries(), "x", a.num_nodes(),
        " vs ", b.num_queries(), "x", b.num_nodes()));
  }
  return absl::OkStatus();
}

}  // namespace

double Quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    std::sort(sorted.begin(), sorted.end());
  }
  const double position = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(position));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = position - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

ErrorDistribution SummarizeErrors(std::vector<double> errors) {
  ErrorDistribution out;
  if (errors.empty()) return out;
  out.mean = PairwiseSum(errors) / static_cast<double>(errors.size());
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  out.median = Quantile(sorted, 0.5);
  out.p90 = Quantile(sorted, 0.9);
  out.p99 = Quantile(sorted, 0.99);
  const double lo = sorted.front();
  const double hi = sorted.back();
  out.cdf.reserve(kCdfGridPoints);
  for (int i = 0; i < kCdfGridPoints; ++i) {
    const double value =
        i == kCdfGridPoints - 1
            ? hi
            : lo + (hi - lo) * static_cast<double>(i) / (kCdfGridPoints - 1);
    const size_t count =
        std::upper_bound(sorted.begin(), sorted.end(), value) - sorted.begin();
    out.cdf.push_back(
        {value, static_cast<double>(count) / static_cast<double>(sorted.size())});
  }
  out.errors = std::move(errors);
  return out;
}

absl::StatusOr<ErrorDistribution> AbsoluteErrors(const AnswerTable& released,
                                                 const AnswerTable& truth) {
  RETURN_IF_ERROR(CheckSameShape(released, truth));
  std::vector<double> errors(released.values().size());
  for (size_t i = 0; i < errors.size(); ++i) {
    errors[i] = std::abs(released.values()[i] - truth.values()[i]);
  }
  return SummarizeErrors(std::move(errors));
}

absl::StatusOr<std::vector<double>> ErrorDifference(const AnswerTable& a,
                                                    const AnswerTable& b,
                                                    const AnswerTable& truth) {
  RETURN_IF_ERROR(CheckSameShape(a, truth));
  RETURN_IF_ERROR(CheckSameShape(b, truth));
  std::vector<double> diff(truth.values().size());
  for (size_t i = 0; i < diff.size(); ++i) {
    const double t = truth.values()[i];
    diff[i] = std::abs(a.values()[i] - t) - std::abs(b.values()[i] - t);
  }
  return diff;
}

absl::StatusOr<double> Accuracy(const AnswerTable& released,
                                const AnswerTable& truth) {
  RETURN_IF_ERROR(CheckSameShape(released, truth));
  if (released.values().empty()) {
    return absl::InvalidArgumentError("accuracy of an empty table is undefined");
  }
  int64_t exact = 0;
  for (size_t i = 0; i < released.values().size(); ++i) {
    if (released.values()[i] == truth.values()[i]) ++exact;
  }
  return static_cast<double>(exact) /
         static_cast<double>(released.values().size());
}

absl::StatusOr<double> TotalVariationDistance(const ContingencyTable& p,
                                              const ContingencyTable& q) {
  if (p.shape != q.shape || p.values.size() != q.values.size()) {
    return absl::InvalidArgumentError("TVD needs tables of the same shape");
  }
  for (const ContingencyTable* t : {&p, &q}) {
    if (std::abs(t->Total() - 1.0) > 1e-6) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "TVD needs normalized tables; got total %.12g", t->Total()));
    }
  }
  std::vector<double> diffs(p.values.size());
  for (size_t i = 0; i < diffs.size(); ++i) {
    diffs[i] = std::abs(p.values[i] - q.values[i]);
  }
  return 0.5 * PairwiseSum(diffs);
}

absl::StatusOr<double> CramersV(const ContingencyTable& counts) {
  if (counts.shape.size() != 2) {
    return absl::InvalidArgumentError("Cramer's V needs a two-way table");
  }
  const int rows = counts.shape[0];
  const int cols = counts.shape[1];
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = counts.values[i * cols + j];
      if (v < 0.0) {
        return absl::InvalidArgumentError("counts must be non-negative");
      }
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  }
  if (!(total > 0.0)) {
    return absl::InvalidArgumentError("Cramer's V needs a positive total");
  }
  int live_rows = 0;
  int live_cols = 0;
  for (double r : row_sum) live_rows += r > 0.0;
  for (double c : col_sum) live_cols += c > 0.0;
  const int min_dim = std::min(live_rows, live_cols);
  if (min_dim < 2) return 0.0;
  double chi2 = 0.0;
  for (int i = 0; i < rows; ++i) {
    if (row_sum[i] <= 0.0) continue;
    for (int j = 0; j < cols; ++j) {
      if (col_sum[j] <= 0.0) continue;
      const double expected = row_sum[i] * col_sum[j] / total;
      const double d = counts.values[i * cols + j] - expected;
      chi2 += d * d / expected;
    }
  }
  return std::min(1.0, std::sqrt(chi2 / (total * (min_dim - 1))));
}

CorrelationLevel BucketCramersV(double v) {
  if (v < 0.1) return CorrelationLevel::kLow;
  if (v < 0.3) return CorrelationLevel::kWeak;
  if (v < 0.5) return CorrelationLevel::kMiddle;
  return CorrelationLevel::kStrong;
}

std::string_view CorrelationLevelName(CorrelationLevel level) {
  switch (level) {
    case CorrelationLevel::kLow:
      return "low";
    case CorrelationLevel::kWeak:
      return "weak";
    case CorrelationLevel::kMiddle:
      return "middle";
    case CorrelationLevel::kStrong:
      return "strong";
  }
  return "unknown";
}

absl::StatusOr<QualityReport> ComputeQualityReport(const Population& synthetic,
                                                   const Population& truth) {
  if (!(synthetic.schema() == truth.schema())) {
    return absl::InvalidArgumentError("quality report needs matching schemas");
  }
  const int m = truth.num_features();
  QualityReport report;

  std::vector<double> one_way(m);
  for (int f = 0; f < m; ++f) {
    const int subset[] = {f};
    ASSIGN_OR_RETURN(ContingencyTable p, MarginalTable(synthetic, subset));
    ASSIGN_OR_RETURN(ContingencyTable q, MarginalTable(truth, subset));
    ASSIGN_OR_RETURN(one_way[f], TotalVariationDistance(p, q));
  }
  report.ind = PairwiseSum(one_way) / m;

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
  }
  if (pairs.empty()) {
    report.pair = 0.0;
    report.corr = 1.0;
    return report;
  }
  std::vector<double> two_way(pairs.size());
  std::vector<double> agree(pairs.size());
  std::vector<absl::Status> statuses(pairs.size());
  const int64_t num_pairs = static_cast<int64_t>(pairs.size());

#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < num_pairs; ++i) {
    statuses[i] = [&]() -> absl::Status {
      const int subset[] = {pairs[i].first, pairs[i].second};
      ASSIGN_OR_RETURN(ContingencyTable syn_counts,
                       JointCounts(synthetic, subset));
      ASSIGN_OR_RETURN(ContingencyTable true_counts, JointCounts(truth, subset));
      ContingencyTable p = syn_counts;
      ContingencyTable q = true_counts;
      for (double& v : p.values) v /= static_cast<double>(synthetic.size());
      for (double& v : q.values) v /= static_cast<double>(truth.size());
      ASSIGN_OR_RETURN(two_way[i], TotalVariationDistance(p, q));
      ASSIGN_OR_RETURN(double v_syn, CramersV(syn_counts));
      ASSIGN_OR_RETURN(double v_true, CramersV(true_counts));
      agree[i] = BucketCramersV(v_syn) == BucketCramersV(v_true) ? 1.0 : 0.0;
      return absl::OkStatus();
    }();
  }
  for (const absl::Status& s : statuses) RETURN_IF_ERROR(s);
  report.pair = PairwiseSum(two_way) / static_cast<double>(pairs.size());
  report.corr = PairwiseSum(agree) / static_cast<double>(pairs.size());
  return report;
}

std::string QualityReportToJson(const QualityReport& report) {
  nlohmann::json doc = {
      {"ind", report.ind}, {"pair", report.pair}, {"corr", report.corr}};
  return doc.dump(2);
}

std::string ErrorSummaryToJson(const ErrorDistribution& distribution) {
  nlohmann::json doc = {{"count", distribution.errors.size()},
                        {"mean", distribution.mean},
                        {"median", distribution.median},
                        {"p90", distribution.p90},
                        {"p99", distribution.p99}};
  return doc.dump(2);
}

absl::Status WriteCdfCsv(const std::vector<CdfPoint>& cdf, std::ostream& out) {
  out << "error_value,cumulative_fraction\n";
  for (const CdfPoint& point : cdf) {
    out << absl::StrFormat("%.17g,%.17g\n", point.value,
                           point.cumulative_fraction);
  }
  if (!out) return absl::InternalError("failed writing CDF CSV");
  return absl::OkStatus();
}

}  // namespace census_dp
