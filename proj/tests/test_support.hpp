// tests/test_support.hpp
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
// Shared test oracles. Everything here is independent of the library's
// own solver paths: transport optimality is checked by exhaustive
// enumeration of integer-valued plans, alignments are generated as lattice
// walks.

#ifndef OTTC_TESTS_TEST_SUPPORT_HPP_
#define OTTC_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "ottc/coupling.hpp"
#include "ottc/rng.hpp"

namespace test {

inline std::vector<std::pair<int, int>> support_pairs(
    const ottc::SparseCoupling& g) {
  std::vector<std::pair<int, int>> out;
  out.reserve(g.entries.size());
  for (const auto& e : g.entries) out.push_back({e.i, e.j});
  return out;
}

namespace detail {

inline void enumerate_plans(const std::vector<int>& row_sums,
                            const std::vector<int>& col_rem, int i, int j,
                            int row_rem, double cost, int grid,
                            double& best) {
  const int n = static_cast<int>(row_sums.size());
  const int m = static_cast<int>(col_rem.size());
  if (cost >= best) return;
  if (i == n) {
    best = cost;
    return;
  }
  if (j == m - 1) {
    if (row_rem > col_rem[j]) return;
    std::vector<int> next = col_rem;
    next[j] -= row_rem;
    const double d = static_cast<double>(i - j) * (i - j);
    enumerate_plans(row_sums, next, i + 1, 0,
                    i + 1 < n ? row_sums[i + 1] : 0,
                    cost + row_rem * d / grid, grid, best);
    return;
  }
  const int cap = std::min(row_rem, col_rem[j]);
  for (int x = 0; x <= cap; ++x) {
    std::vector<int> next = col_rem;
    next[j] -= x;
    const double d = static_cast<double>(i - j) * (i - j);
    enumerate_plans(row_sums, next, i, j + 1, row_rem - x,
                    cost + x * d / grid, grid, best);
  }
}

}  // namespace detail

// Minimum transport cost over every integer-valued plan on a grid of
// `grid` mass units; weights[i] must equal units[i] / grid exactly.
inline double brute_force_min_transport_cost(const std::vector<double>& alpha,
                                             const std::vector<double>& beta,
                                             int grid) {
  std::vector<int> a, b;
  for (double v : alpha) a.push_back(static_cast<int>(v * grid + 0.5));
  for (double v : beta) b.push_back(static_cast<int>(v * grid + 0.5));
  double best = std::numeric_limits<double>::infinity();
  detail::enumerate_plans(a, b, 0, 0, a.empty() ? 0 : a[0], 0.0, grid, best);
  return best;
}

// Random discrete monotonic alignment: a subset of frames is chosen as
// aligned, then a right/down/diagonal lattice walk over (chosen frames x
// targets) covers every frame of the subset and every target. Vertical
// runs (frames sharing one target) are capped so the halving construction
// stays exactly representable.
inline ottc::MonotonicAlignment random_monotonic_alignment(ottc::Rng& rng,
                                                           int n, int m,
                                                           int max_run) {
  int active = rng.uniform_int(1, n);
  active = std::min(active, m * max_run);
  std::vector<int> frames(n);
  for (int i = 0; i < n; ++i) frames[i] = i + 1;
  for (int i = n - 1; i > 0; --i)
    std::swap(frames[i], frames[rng.uniform_int(0, i)]);
  frames.resize(active);
  std::sort(frames.begin(), frames.end());

  ottc::MonotonicAlignment a;
  a.n = n;
  a.m = m;
  int fi = 0, tj = 1, run = 1;
  a.pairs.push_back({frames[0], 1});
  while (fi < active - 1 || tj < m) {
    const int fl = active - 1 - fi;  // frames still to place
    const int tl = m - tj;           // targets still to cover
    // Feasibility keeps the invariant fl <= (tl + 1) * max_run - run, so
    // remaining frames always fit under the per-target run cap.
    const bool down_ok = fl > 0 && run < max_run;
    const bool right_ok = tl > 0 && fl <= tl * max_run - 1;
    const bool diag_ok = tl > 0 && fl > 0 && fl - 1 <= tl * max_run - 1;
    enum { kDown, kRight, kDiag } move;
    for (;;) {
      const int pick = rng.uniform_int(0, 2);
      if (pick == 0 && down_ok) { move = kDown; break; }
      if (pick == 1 && right_ok) { move = kRight; break; }
      if (pick == 2 && diag_ok) { move = kDiag; break; }
    }
    if (move == kDown) {
      ++fi;
      ++run;
    } else if (move == kRight) {
      ++tj;
      run = 1;
    } else {
      ++fi;
      ++tj;
      run = 1;
    }
    a.pairs.push_back({frames[fi], tj});
  }
  return a;
}

}  // namespace test

#endif  // OTTC_TESTS_TEST_SUPPORT_HPP_
