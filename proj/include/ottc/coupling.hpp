// ottc/coupling.hpp
//
// Copyright 2026 OTTC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// One-dimensional optimal transport between weighted bin sequences.
//
// The coupling between source weights a (n bins at integer positions
// 1..n) and target weights b (m bins at 1..m) under the squared distance
// cost |i - j|^2 is unique and monotone. With cumulative sums
// A_i = a_1 + ... + a_i and B_j = b_1 + ... + b_j the optimal plan has the
// closed form
//
//   mass(i, j) = max(0, min(A_i, B_j) - max(A_{i-1}, B_{j-1})),
//
// which a two-pointer sweep enumerates in O(n + m). Ties A_i == B_j follow
// the left-closed convention: the overlap interval is attributed to the
// earlier bin and zero-mass pairs are dropped.

#ifndef OTTC_COUPLING_HPP_
#define OTTC_COUPLING_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/simplex.hpp"

namespace ottc {

// One support entry of a sparse transport plan. Indices are 1-based.
struct CouplingEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;

  friend bool operator==(const CouplingEntry&, const CouplingEntry&) = default;
};

// Sparse monotone transport plan. Entries are sorted by (i, j), the
// support forms a staircase (i < k implies j <= l) and the entry count
// never exceeds n + m - 1.
struct SparseCoupling {
  int n = 0;
  int m = 0;
  std::vector<CouplingEntry> entries;
};

// Optimal coupling between alpha and beta for the |i - j|^2 cost.
inline SparseCoupling compute_coupling(const SimplexWeights& alpha,
                                       const StrictSimplexWeights& beta) {
  const int n = alpha.size();
  const int m = beta.size();
  const std::vector<double> a = prefix_sums(alpha.values());
  const std::vector<double> b = prefix_sums(beta.values());

  SparseCoupling out;
  out.n = n;
  out.m = m;
  out.entries.reserve(static_cast<size_t>(n) + m - 1);

  int i = 0, j = 0;
  while (i < n && j < m) {
    const double lo = std::max(i > 0 ? a[i - 1] : 0.0, j > 0 ? b[j - 1] : 0.0);
    const double hi = std::min(a[i], b[j]);
    const double mass = hi - lo;
    if (mass > 0.0) out.entries.push_back({i + 1, j + 1, mass});
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
  }
  return out;
}

// Exact row and column sums of a plan.
inline std::pair<std::vector<double>, std::vector<double>> marginals(
    const SparseCoupling& coupling) {
  std::vector<double> row(coupling.n, 0.0), row_c(coupling.n, 0.0);
  std::vector<double> col(coupling.m, 0.0), col_c(coupling.m, 0.0);
  auto add = [](double& s, double& c, double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  };
  for (const CouplingEntry& e : coupling.entries) {
    add(row[e.i - 1], row_c[e.i - 1], e.mass);
    add(col[e.j - 1], col_c[e.j - 1], e.mass);
  }
  for (int i = 0; i < coupling.n; ++i) row[i] += row_c[i];
  for (int j = 0; j < coupling.m; ++j) col[j] += col_c[j];
  return {std::move(row), std::move(col)};
}

// Transport cost sum_{i,j} mass * (i - j)^2 over the support.
inline double transport_cost(const SparseCoupling& coupling) {
  double s = 0.0;
  for (const CouplingEntry& e : coupling.entries) {
    const double d = static_cast<double>(e.i - e.j);
    s += e.mass * d * d;
  }
  return s;
}

// Subgradient of L(alpha) = sum over support of mass(i,j) * cost(i,j) with
// respect to alpha. `entry_costs` must match the support of
// compute_coupling(alpha, beta) in order and length. At breakpoint ties the
// one-sided (left-closed) derivative is used; at generic points the result
// is the exact gradient. The result is defined up to a constant shift,
// which vanishes on the simplex tangent space.
inline std::vector<double> coupling_gradient(
    const SimplexWeights& alpha, const StrictSimplexWeights& beta,
    std::span<const double> entry_costs) {
  const int n = alpha.size();
  const int m = beta.size();
  const std::vector<double> a = prefix_sums(alpha.values());
  const std::vector<double> b = prefix_sums(beta.values());

  std::vector<double> bump(n, 0.0);
  size_t next_cost = 0;
  int i = 0, j = 0;
  while (i < n && j < m) {
    const double alo = i > 0 ? a[i - 1] : 0.0;
    const double blo = j > 0 ? b[j - 1] : 0.0;
    const double hi = std::min(a[i], b[j]);
    const double mass = hi - std::max(alo, blo);
    if (mass > 0.0) {
      require(next_cost < entry_costs.size(),
              "coupling gradient: fewer costs than support entries");
      const double c = entry_costs[next_cost++];
      require(std::isfinite(c), "coupling gradient: non-finite cost");
      if (a[i] <= b[j]) bump[i] += c;
      if (i > 0 && alo > blo) bump[i - 1] -= c;
    }
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
  }
  require(next_cost == entry_costs.size(),
          "coupling gradient: more costs than support entries");

  std::vector<double> grad(n, 0.0);
  double suffix = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    suffix += bump[k];
    grad[k] = suffix;
  }
  return grad;
}

// Discrete monotonic alignment: index pairs (i, j), 1-based, where every
// target j in 1..m is aligned and for distinct pairs i < k implies j <= l.
struct MonotonicAlignment {
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> pairs;
};

// Validates Definition-1 structure; throws std::invalid_argument otherwise.
inline void validate_alignment(const MonotonicAlignment& a) {
  require(a.n >= 1 && a.m >= 1, "alignment: empty frame or target range");
  require(!a.pairs.empty(), "alignment: no pairs");
  std::vector<std::pair<int, int>> p = a.pairs;
  std::sort(p.begin(), p.end());
  require(std::adjacent_find(p.begin(), p.end()) == p.end(),
          "alignment: duplicate pair");
  std::vector<char> covered(a.m + 1, 0);
  for (auto [i, j] : p) {
    require(i >= 1 && i <= a.n && j >= 1 && j <= a.m,
            "alignment: index out of range");
    covered[j] = 1;
  }
  for (int j = 1; j <= a.m; ++j)
    require(covered[j], "alignment: unaligned target element");
  for (size_t k = 1; k < p.size(); ++k)
    if (p[k - 1].first < p[k].first)
      require(p[k - 1].second <= p[k].second,
              "alignment: monotonicity break");
}

// Source weights whose optimal coupling with beta has support exactly equal
// to the alignment. Within a target j shared by k consecutive frames the
// mass beta_j is split by repeated halving (1/2, 1/4, ..., 1/2^{k-1},
// 1/2^{k-1}); each share is an exact binary scaling of beta_j, so for
// exactly representable beta the reconstruction is bit-exact.
inline SimplexWeights alignment_to_weights(const MonotonicAlignment& a,
                                           const StrictSimplexWeights& beta) {
  validate_alignment(a);
  require(a.m == beta.size(), "alignment: beta length mismatch");

  std::vector<std::pair<int, int>> p = a.pairs;
  std::sort(p.begin(), p.end());

  // frames_of[j] = consecutive run of frames aligned to target j.
  std::vector<std::vector<int>> frames_of(a.m + 1);
  for (auto [i, j] : p) frames_of[j].push_back(i);

  std::vector<double> alpha(a.n, 0.0);
  for (int j = 1; j <= a.m; ++j) {
    const auto& fr = frames_of[j];
    const int k = static_cast<int>(fr.size());
    for (int t = 0; t < k; ++t) {
      const int halvings = std::min(t + 1, k - 1);
      alpha[fr[t] - 1] += std::ldexp(beta[j - 1], -halvings);
    }
  }
  return SimplexWeights(std::move(alpha));
}

}  // namespace ottc

#endif  // OTTC_COUPLING_HPP_
