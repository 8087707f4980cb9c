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

// Brute-force reference implementations used only by tests. They share no
// code with the library.

#ifndef CENSUS_DP_TESTS_ORACLES_H_
#define CENSUS_DP_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace census_dp {
namespace oracles {

// Projection onto {x >= 0, sum x = total} by exhausting every support set:
// on support S the minimizer is y_S shifted by a common constant, and the
// projection is the feasible candidate closest to y.
inline std::vector<double> BruteForceProjection(const std::vector<double>& y,
                                                double total) {
  const int n = static_cast<int>(y.size());
  std::vector<double> best(n, 0.0);
  double best_distance = std::numeric_limits<double>::infinity();
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    double sum = 0;
    int size = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += y[i];
        ++size;
      }
    }
    const double shift = (total - sum) / size;
    std::vector<double> x(n, 0.0);
    bool feasible = true;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        x[i] = y[i] + shift;
        feasible = feasible && x[i] >= -1e-12;
      }
    }
    if (!feasible) continue;
    double distance = 0;
    for (int i = 0; i < n; ++i) distance += (x[i] - y[i]) * (x[i] - y[i]);
    if (distance < best_distance) {
      best_distance = distance;
      best = x;
    }
  }
  for (double& v : best) v = std::max(v, 0.0);
  return best;
}

// Smallest squared L2 distance from `y` to any non-negative integer vector
// summing to `total`, by enumeration.
inline double BestIntegerDistance(const std::vector<double>& y, int total) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> x(y.size(), 0);
  auto recurse = [&](auto&& self, size_t i, int remaining) -> void {
    if (i + 1 == y.size()) {
      x[i] = remaining;
      double d = 0;
      for (size_t j = 0; j < y.size(); ++j) d += (x[j] - y[j]) * (x[j] - y[j]);
      best = std::min(best, d);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      x[i] = v;
      self(self, i + 1, remaining - v);
    }
  };
  recurse(recurse, 0, total);
  return best;
}

// Deterministic maximum spanning tree (Kruskal): edges sorted by descending
// weight, ties broken by (a, b).
struct WeightedEdge {
  int a;
  int b;
  double w;
};

inline std::vector<std::pair<int, int>> KruskalMaxSpanningTree(
    int num_nodes, std::vector<WeightedEdge> edges) {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const WeightedEdge& x, const WeightedEdge& y) {
                     return x.w > y.w;
                   });
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };
  std::vector<std::pair<int, int>> tree;
  for (const WeightedEdge& e : edges) {
    const int ra = find(e.a);
    const int rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    tree.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

// Two-way table helpers over a row-major rows x cols count matrix.
inline double TableTotal(const std::vector<double>& t) {
  double s = 0;
  for (double v : t) s += v;
  return s;
}

inline double BruteForceMutualInformation(const std::vector<double>& counts,
                                          int rows, int cols) {
  const double n = TableTotal(counts);
  double mi = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double pij = counts[i * cols + j] / n;
      if (pij == 0) continue;
      double pi = 0, pj = 0;
      for (int jj = 0; jj < cols; ++jj) pi += counts[i * cols + jj] / n;
      for (int ii = 0; ii < rows; ++ii) pj += counts[ii * cols + j] / n;
      mi += pij * std::log(pij / (pi * pj));
    }
  }
  return mi;
}

inline double BruteForceTvd(const std::vector<double>& p,
                            const std::vector<double>& q) {
  double l1 = 0;
  for (size_t i = 0; i < p.size(); ++i) l1 += std::fabs(p[i] - q[i]);
  return l1 / 2;
}

// Cramer's V after removing empty rows and columns; no bias correction.
inline double BruteForceCramersV(const std::vector<double>& counts, int rows,
                                 int cols) {
  std::vector<int> live_rows, live_cols;
  for (int i = 0; i < rows; ++i) {
    double s = 0;
    for (int j = 0; j < cols; ++j) s += counts[i * cols + j];
    if (s > 0) live_rows.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    double s = 0;
    for (int i = 0; i < rows; ++i) s += counts[i * cols + j];
    if (s > 0) live_cols.push_back(j);
  }
  const int r = static_cast<int>(live_rows.size());
  const int c = static_cast<int>(live_cols.size());
  if (std::min(r, c) < 2) return 0.0;
  const double n = TableTotal(counts);
  double chi2 = 0;
  for (int i : live_rows) {
    for (int j : live_cols) {
      double ri = 0, cj = 0;
      for (int jj = 0; jj < cols; ++jj) ri += counts[i * cols + jj];
      for (int ii = 0; ii < rows; ++ii) cj += counts[ii * cols + j];
      const double e = ri * cj / n;
      chi2 += (counts[i * cols + j] - e) * (counts[i * cols + j] - e) / e;
    }
  }
  return std::min(1.0, std::sqrt(chi2 / (n * (std::min(r, c) - 1))));
}

inline int BruteForceBucket(double v) {
  if (v < 0.1) return 0;
  if (v < 0.3) return 1;
  if (v < 0.5) return 2;
  return 3;
}

// Ind / Pair / Corr straight from raw rows (row-major, num_features wide).
struct BruteForceQuality {
  double ind;
  double pair;
  double corr;
};

inline BruteForceQuality BruteForceQualityReport(
    const std::vector<int>& synthetic, const std::vector<int>& truth,
    const std::vector<int>& domains) {
  const int m = static_cast<int>(domains.size());
  const size_t ns = synthetic.size() / m;
  const size_t nt = truth.size() / m;
  BruteForceQuality out{0, 0, 0};
  for (int f = 0; f < m; ++f) {
    std::vector<double> p(domains[f], 0), q(domains[f], 0);
    for (size_t r = 0; r < ns; ++r) p[synthetic[r * m + f]] += 1.0 / ns;
    for (size_t r = 0; r < nt; ++r) q[truth[r * m + f]] += 1.0 / nt;
    out.ind += BruteForceTvd(p, q) / m;
  }
  int pairs = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      ++pairs;
      const int cells = domains[a] * domains[b];
      std::vector<double> cs(cells, 0), ct(cells, 0);
      for (size_t r = 0; r < ns; ++r) {
        cs[synthetic[r * m + a] * domains[b] + synthetic[r * m + b]] += 1;
      }
      for (size_t r = 0; r < nt; ++r) {
        ct[truth[r * m + a] * domains[b] + truth[r * m + b]] += 1;
      }
      std::vector<double> ps(cells), pt(cells);
      for (int i = 0; i < cells; ++i) {
        ps[i] = cs[i] / ns;
        pt[i] = ct[i] / nt;
      }
      out.pair += BruteForceTvd(ps, pt);
      out.corr += BruteForceBucket(BruteForceCramersV(cs, domains[a], domains[b])) ==
                  BruteForceBucket(BruteForceCramersV(ct, domains[a], domains[b]));
    }
  }
  if (pairs == 0) return {out.ind, 0.0, 1.0};
  out.pair /= pairs;
  out.corr /= pairs;
  return out;
}

}  // namespace oracles
}  // namespace census_dp

#endif  // CENSUS_DP_TESTS_ORACLES_H_
