// ottc/sotd.hpp
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
// Sequence optimal transport distance between vector sequences: the
// coupling lives between integer bins weighted by alpha (longer side,
// learned) and beta (shorter side, fixed, strictly positive); the distance
// is the minimum over alpha of the coupling-weighted r-th power cost.
//
// Two evaluation routes are provided and kept independent:
//   * sotd_oracle      — exact O(p*q) dynamic program over nondecreasing
//                        assignments of short-side bins to long-side bins;
//   * sotd_distance    — gradient descent on pre-softmax scores through the
//                        analytic coupling subgradient, multi-restart.

#ifndef OTTC_SOTD_HPP_
#define OTTC_SOTD_HPP_

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/coupling.hpp"
#include "ottc/rng.hpp"
#include "ottc/simplex.hpp"

namespace ottc {

// Nonempty sequence of equal-dimension real vectors.
struct VectorSequence {
  std::vector<std::vector<double>> vectors;

  int length() const { return static_cast<int>(vectors.size()); }
  int dim() const { return vectors.empty() ? 0 : static_cast<int>(vectors[0].size()); }

  void validate(int max_len = 1 << 20) const {
    require(!vectors.empty(), "vector sequence: empty");
    require(length() <= max_len, "vector sequence: exceeds maximum length");
    for (const auto& v : vectors)
      require(static_cast<int>(v.size()) == dim(),
              "vector sequence: inconsistent dimensions");
  }

  friend bool operator==(const VectorSequence&, const VectorSequence&) = default;
};

enum class CostKind { kSquaredEuclidean, kEuclidean, kCrossEntropy };

// Pointwise cost C(u, v). Euclidean is a metric; squared Euclidean and
// cross-entropy are separated but not metrics. Cross-entropy expects u to
// be a probability vector and v one-hot.
inline double eval_cost(CostKind kind, std::span<const double> u,
                        std::span<const double> v) {
  require(u.size() == v.size(), "cost: dimension mismatch");
  switch (kind) {
    case CostKind::kSquaredEuclidean:
    case CostKind::kEuclidean: {
      double s = 0.0;
      for (size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
      }
      return kind == CostKind::kEuclidean ? std::sqrt(s) : s;
    }
    case CostKind::kCrossEntropy: {
      int hot = -1;
      double psum = 0.0;
      for (size_t i = 0; i < u.size(); ++i) {
        require(v[i] == 0.0 || v[i] == 1.0, "cost: target not one-hot");
        if (v[i] == 1.0) {
          require(hot < 0, "cost: target not one-hot");
          hot = static_cast<int>(i);
        }
        require(u[i] >= 0.0 && u[i] <= 1.0 + 1e-9,
                "cost: invalid probability vector");
        psum += u[i];
      }
      require(hot >= 0, "cost: target not one-hot");
      require(std::abs(psum - 1.0) <= 1e-6, "cost: invalid probability vector");
      return -floored_log(u[hot]);
    }
  }
  throw std::invalid_argument("cost: unknown kind");
}

struct SotdOracleResult {
  double distance = 0.0;
  // assignment[j] = long-side index (0-based) serving short-side element j.
  std::vector<int> assignment;
  // True when alpha (the long side) lives on the first argument. Fixed by
  // the longer sequence; at equal lengths, by the cheaper orientation.
  bool alpha_on_first = true;
};

namespace detail {

// Dispatches C(x_i, y_j)^r with the paper's argument order regardless of
// which sequence carries the long-side index.
struct SotdCost {
  const VectorSequence& x;
  const VectorSequence& y;
  CostKind kind;
  int r;
  bool x_is_long;

  double operator()(int long_idx, int short_idx) const {
    const auto& xi = x_is_long ? x.vectors[long_idx] : x.vectors[short_idx];
    const auto& yj = x_is_long ? y.vectors[short_idx] : y.vectors[long_idx];
    double c = eval_cost(kind, xi, yj);
    double p = c;
    for (int t = 1; t < r; ++t) p *= c;
    return p;
  }
};

inline double apply_root(double value, int r) {
  if (value <= 0.0) return 0.0;
  if (r == 1) return value;
  if (r == 2) return std::sqrt(value);
  return std::pow(value, 1.0 / static_cast<double>(r));
}

// Orientations to evaluate: the longer side always carries alpha; equal
// lengths are evaluated both ways and the cheaper orientation wins, which
// keeps the distance symmetric in its arguments.
inline std::vector<bool> alpha_orientations(int n, int m) {
  if (n > m) return {true};
  if (n < m) return {false};
  return {true, false};
}

// DP over nondecreasing maps [q] -> [p]; returns the objective before the
// r-th root and one optimal map.
inline double oracle_dp(const SotdCost& cost, const StrictSimplexWeights& beta,
                        int p, int q, std::vector<int>* assignment) {
  // best[i] = optimal cost of covering short bins 0..j with map(j) <= i.
  std::vector<double> best(p), cur(p);
  std::vector<std::vector<int>> arg(q, std::vector<int>(p));
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < p; ++i) {
      const double here = beta[j] * cost(i, j) + (j > 0 ? best[i] : 0.0);
      if (i > 0 && cur[i - 1] <= here) {
        cur[i] = cur[i - 1];
        arg[j][i] = arg[j][i - 1];
      } else {
        cur[i] = here;
        arg[j][i] = i;
      }
    }
    std::swap(best, cur);
  }
  assignment->resize(q);
  int i = arg[q - 1][p - 1];
  for (int j = q - 1; j >= 0; --j) {
    (*assignment)[j] = i;
    if (j > 0) i = arg[j - 1][i];
  }
  return best[p - 1];
}

}  // namespace detail

// Exact minimum of the SOTD objective via dynamic programming over
// nondecreasing assignments of short-side bins to long-side bins. Any
// feasible monotone coupling is bounded below by concentrating each
// beta_j on its cheapest in-window bin, and the concentration itself is a
// feasible coupling, so the DP value equals the true minimum.
inline SotdOracleResult sotd_oracle(const VectorSequence& x,
                                    const VectorSequence& y, int r,
                                    CostKind kind,
                                    const StrictSimplexWeights& beta) {
  x.validate();
  y.validate();
  require(r >= 1, "sotd: r must be positive");
  const int n = x.length(), m = y.length();
  const int p = std::max(n, m), q = std::min(n, m);
  require(beta.size() == q, "sotd: beta length must match the shorter side");

  SotdOracleResult out;
  double best_obj = std::numeric_limits<double>::infinity();
  for (bool x_long : detail::alpha_orientations(n, m)) {
    detail::SotdCost cost{x, y, kind, r, x_long};
    std::vector<int> assignment;
    const double obj = detail::oracle_dp(cost, beta, p, q, &assignment);
    if (obj < best_obj) {
      best_obj = obj;
      out.assignment = std::move(assignment);
      out.alpha_on_first = x_long;
    }
  }
  out.distance = detail::apply_root(best_obj, r);
  return out;
}

// Gradient-descent minimizer settings.
struct MinimizerConfig {
  int steps = 500;
  double learning_rate = 0.1;
  int restarts = 4;      // random restarts, in addition to the fixed start
  double gap_tol = 1e-3; // convergence gap against the oracle value
  uint64_t seed = 12345;
};

struct SOTDResult {
  double distance = 0.0;
  SimplexWeights alpha_star{std::vector<double>{1.0}};
  SparseCoupling coupling;
  int r = 1;
  bool converged = false;
  // True when alpha_star indexes the first argument (see SotdOracleResult).
  bool alpha_on_first = true;
};

// Label-weight policy: beta over the shorter side, possibly depending on
// the sequences themselves.
using BetaPolicy = std::function<StrictSimplexWeights(
    int q, const VectorSequence& x, const VectorSequence& y)>;

inline BetaPolicy uniform_beta_policy() {
  return [](int q, const VectorSequence&, const VectorSequence&) {
    return uniform_weights(q);
  };
}

inline BetaPolicy fixed_beta_policy(StrictSimplexWeights beta) {
  return [beta](int q, const VectorSequence&, const VectorSequence&) {
    require(beta.size() == q, "beta policy: fixed beta length mismatch");
    return beta;
  };
}

// Minimizes the SOTD objective over alpha: adaptive-moment subgradient
// descent on pre-softmax scores through the analytic coupling gradient.
// Restart 0 starts from beta (p == q) or uniform; the remaining restarts
// are Gaussian. After every step the current support is also rounded —
// each target's mass concentrated on its cheapest in-support frame, a
// feasible monotone assignment — and the best candidate seen anywhere
// wins; ties keep the earliest. Equal-length inputs run both orientations.
inline SOTDResult sotd_distance(const VectorSequence& x,
                                const VectorSequence& y, int r, CostKind kind,
                                const BetaPolicy& beta_policy,
                                const MinimizerConfig& cfg = {}) {
  x.validate();
  y.validate();
  require(r >= 1, "sotd: r must be positive");
  const int n = x.length(), m = y.length();
  const int p = std::max(n, m), q = std::min(n, m);
  const StrictSimplexWeights beta = beta_policy(q, x, y);
  require(beta.size() == q, "sotd: beta length must match the shorter side");

  const SotdOracleResult oracle = sotd_oracle(x, y, r, kind, beta);

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_alpha;
  bool best_orientation = true;

  for (bool x_long : detail::alpha_orientations(n, m)) {
    detail::SotdCost cost{x, y, kind, r, x_long};
    Rng rng(cfg.seed);
    for (int restart = 0; restart <= cfg.restarts; ++restart) {
      std::vector<double> scores(p, 0.0);
      if (restart == 0) {
        if (p == q)
          for (int i = 0; i < p; ++i) scores[i] = std::log(beta[i]);
        // else: all-zero scores, i.e. uniform alpha.
      } else {
        for (int i = 0; i < p; ++i) scores[i] = rng.normal();
      }

      std::vector<double> m1(p, 0.0), m2(p, 0.0);
      for (int step = 0; step <= cfg.steps; ++step) {
        SimplexWeights alpha(softmax(scores));
        SparseCoupling g = compute_coupling(alpha, beta);
        double obj = 0.0;
        std::vector<double> entry_costs(g.entries.size());
        for (size_t e = 0; e < g.entries.size(); ++e) {
          entry_costs[e] = cost(g.entries[e].i - 1, g.entries[e].j - 1);
          obj += g.entries[e].mass * entry_costs[e];
        }
        if (obj < best_obj) {
          best_obj = obj;
          best_alpha = alpha.values();
          best_orientation = x_long;
        }

        // Rounded candidate from the current support.
        {
          std::vector<double> rounded(p, 0.0);
          double robj = 0.0;
          size_t e = 0;
          for (int j = 0; j < q; ++j) {
            int pick = -1;
            double pick_cost = std::numeric_limits<double>::infinity();
            for (; e < g.entries.size() && g.entries[e].j - 1 == j; ++e)
              if (entry_costs[e] < pick_cost) {
                pick_cost = entry_costs[e];
                pick = g.entries[e].i - 1;
              }
            if (pick < 0) {
              robj = std::numeric_limits<double>::infinity();
              break;
            }
            rounded[pick] += beta[j];
            robj += beta[j] * pick_cost;
          }
          if (robj < best_obj) {
            best_obj = robj;
            best_alpha = std::move(rounded);
            best_orientation = x_long;
          }
        }

        if (step == cfg.steps) break;
        std::vector<double> galpha =
            coupling_gradient(alpha, beta, entry_costs);
        std::vector<double> gscores =
            softmax_backward(galpha, alpha.values());
        for (int i = 0; i < p; ++i) {
          m1[i] = 0.9 * m1[i] + 0.1 * gscores[i];
          m2[i] = 0.999 * m2[i] + 0.001 * gscores[i] * gscores[i];
          const double mh = m1[i] / (1.0 - std::pow(0.9, step + 1));
          const double vh = m2[i] / (1.0 - std::pow(0.999, step + 1));
          scores[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + 1e-8);
        }
      }
    }
  }

  SOTDResult out;
  out.r = r;
  out.alpha_on_first = best_orientation;
  out.alpha_star = SimplexWeights(best_alpha);
  detail::SotdCost cost{x, y, kind, r, best_orientation};
  out.coupling = compute_coupling(out.alpha_star, beta);
  double final_obj = 0.0;
  for (const CouplingEntry& e : out.coupling.entries)
    final_obj += e.mass * cost(e.i - 1, e.j - 1);
  out.distance = detail::apply_root(final_obj, r);
  out.converged = out.distance <= oracle.distance + cfg.gap_tol;
  return out;
}

// Removes consecutive duplicate elements; idempotent.
template <typename T>
std::vector<T> aggregate_elements(const std::vector<T>& seq) {
  require(!seq.empty(), "aggregate: empty sequence");
  std::vector<T> out;
  out.reserve(seq.size());
  for (const T& e : seq)
    if (out.empty() || !(out.back() == e)) out.push_back(e);
  return out;
}

// Removes element i whenever alpha_i <= drop_threshold (0 keeps only the
// exact-zero rule).
template <typename T>
std::vector<T> prune_elements(const std::vector<T>& seq,
                              std::span<const double> alpha,
                              double drop_threshold) {
  require(seq.size() == alpha.size(), "prune: length mismatch");
  require(drop_threshold >= 0.0, "prune: negative threshold");
  std::vector<T> out;
  out.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i)
    if (alpha[i] > drop_threshold) out.push_back(seq[i]);
  return out;
}

inline VectorSequence aggregate(const VectorSequence& seq) {
  return {aggregate_elements(seq.vectors)};
}

inline VectorSequence prune(const VectorSequence& seq,
                            const SimplexWeights& alpha,
                            double drop_threshold) {
  return {prune_elements(seq.vectors, std::span<const double>(alpha.values()),
                         drop_threshold)};
}

// True iff pruning x by alpha_star (exact-zero rule) and aggregating yields
// exactly the aggregation of y.
inline bool check_non_separation(const VectorSequence& x,
                                 const VectorSequence& y,
                                 const SimplexWeights& alpha_star) {
  require(x.length() >= y.length(), "non-separation check: requires n >= m");
  const std::vector<std::vector<double>> left =
      aggregate_elements(prune_elements(
          x.vectors, std::span<const double>(alpha_star.values()), 0.0));
  const std::vector<std::vector<double>> right = aggregate_elements(y.vectors);
  return left == right;
}

}  // namespace ottc

#endif  // OTTC_SOTD_HPP_
