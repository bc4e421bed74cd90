// ottc/ctc.hpp
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
// Reference CTC machinery: log-space forward loss over the standard
// blank-augmented lattice phi, y_1, phi, ..., y_m, phi, the matching
// occupancy gradient, Viterbi forced alignment with a deterministic
// tie-break, an exhaustive-enumeration oracle, and run-length label
// weights derived from a forced alignment.

#ifndef OTTC_CTC_HPP_
#define OTTC_CTC_HPP_

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/labels.hpp"
#include "ottc/simplex.hpp"

namespace ottc {

// A frame-level path: one label id (possibly blank) per frame.
struct PathSequence {
  std::vector<int> frames;
  int vocab_size = 0;

  int length() const { return static_cast<int>(frames.size()); }

  void validate() const {
    require(vocab_size >= 1, "path: vocabulary must be nonempty");
    for (int t : frames)
      require(t >= 0 && t <= vocab_size, "path: id out of range");
  }
};

// Collapse mapping: remove consecutive duplicates, then delete blanks.
inline LabelSequence collapse(const PathSequence& path) {
  path.validate();
  LabelSequence out;
  out.vocab_size = path.vocab_size;
  int prev = -1;
  for (int t : path.frames) {
    if (t != prev && t != path.vocab_size) out.tokens.push_back(t);
    prev = t;
  }
  return out;
}

namespace detail {

// Interleaved lattice label for state s in 0..2m.
inline int lattice_label(const LabelSequence& y, int s) {
  return (s % 2 == 0) ? y.blank_id() : y.tokens[(s - 1) / 2];
}

inline int min_feasible_frames(const LabelSequence& y) {
  int repeats = 0;
  for (size_t i = 1; i < y.tokens.size(); ++i)
    if (y.tokens[i] == y.tokens[i - 1]) ++repeats;
  return y.length() + repeats;
}

inline void check_ctc_inputs(const Matrix& log_posteriors,
                             const LabelSequence& y) {
  y.validate();
  require(!y.contains_blank(), "ctc: target must be blank-free");
  require(log_posteriors.rows >= 1 &&
              log_posteriors.cols == y.vocab_size + 1,
          "ctc: log-posterior shape mismatch");
  if (log_posteriors.rows < min_feasible_frames(y))
    throw InfeasibleTargetError(
        "ctc: target needs more frames than available");
}

inline double floored(const Matrix& lp, int t, int k) {
  return std::max(lp.at(t, k), kLogProbFloor);
}

}  // namespace detail

// Exact negative log marginal probability over all paths collapsing to y.
inline double ctc_loss(const Matrix& log_posteriors, const LabelSequence& y) {
  detail::check_ctc_inputs(log_posteriors, y);
  const int n = log_posteriors.rows;
  const int s_count = 2 * y.length() + 1;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> f(s_count, kNegInf), g(s_count, kNegInf);
  f[0] = detail::floored(log_posteriors, 0, detail::lattice_label(y, 0));
  if (s_count > 1)
    f[1] = detail::floored(log_posteriors, 0, detail::lattice_label(y, 1));

  for (int t = 1; t < n; ++t) {
    for (int s = 0; s < s_count; ++s) {
      double acc = f[s];
      if (s >= 1) acc = log_add(acc, f[s - 1]);
      if (s >= 2 && detail::lattice_label(y, s) != y.blank_id() &&
          detail::lattice_label(y, s) != detail::lattice_label(y, s - 2))
        acc = log_add(acc, f[s - 2]);
      g[s] = acc + detail::floored(log_posteriors, t, detail::lattice_label(y, s));
    }
    std::swap(f, g);
  }

  double total = f[s_count - 1];
  if (s_count > 1) total = log_add(total, f[s_count - 2]);
  return -total;
}

struct CtcGradients {
  double loss = 0.0;
  // dL / d(log p_k(x_t)), n x (|L|+1).
  Matrix grad_log_posteriors;
};

// Forward-backward occupancy gradient of ctc_loss with respect to the
// log-posterior inputs.
inline CtcGradients ctc_backward(const Matrix& log_posteriors,
                                 const LabelSequence& y) {
  detail::check_ctc_inputs(log_posteriors, y);
  const int n = log_posteriors.rows;
  const int s_count = 2 * y.length() + 1;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  Matrix fwd(n, s_count, kNegInf), bwd(n, s_count, kNegInf);
  fwd.at(0, 0) = detail::floored(log_posteriors, 0, detail::lattice_label(y, 0));
  if (s_count > 1)
    fwd.at(0, 1) = detail::floored(log_posteriors, 0, detail::lattice_label(y, 1));
  for (int t = 1; t < n; ++t)
    for (int s = 0; s < s_count; ++s) {
      double acc = fwd.at(t - 1, s);
      if (s >= 1) acc = log_add(acc, fwd.at(t - 1, s - 1));
      if (s >= 2 && detail::lattice_label(y, s) != y.blank_id() &&
          detail::lattice_label(y, s) != detail::lattice_label(y, s - 2))
        acc = log_add(acc, fwd.at(t - 1, s - 2));
      fwd.at(t, s) =
          acc + detail::floored(log_posteriors, t, detail::lattice_label(y, s));
    }

  bwd.at(n - 1, s_count - 1) = 0.0;
  if (s_count > 1) bwd.at(n - 1, s_count - 2) = 0.0;
  for (int t = n - 2; t >= 0; --t)
    for (int s = 0; s < s_count; ++s) {
      double acc = bwd.at(t + 1, s) +
                   detail::floored(log_posteriors, t + 1,
                                   detail::lattice_label(y, s));
      if (s + 1 < s_count)
        acc = log_add(acc, bwd.at(t + 1, s + 1) +
                               detail::floored(log_posteriors, t + 1,
                                               detail::lattice_label(y, s + 1)));
      if (s + 2 < s_count && detail::lattice_label(y, s + 2) != y.blank_id() &&
          detail::lattice_label(y, s + 2) != detail::lattice_label(y, s))
        acc = log_add(acc, bwd.at(t + 1, s + 2) +
                               detail::floored(log_posteriors, t + 1,
                                               detail::lattice_label(y, s + 2)));
      bwd.at(t, s) = acc;
    }

  double log_z = fwd.at(n - 1, s_count - 1);
  if (s_count > 1) log_z = log_add(log_z, fwd.at(n - 1, s_count - 2));

  CtcGradients out;
  out.loss = -log_z;
  out.grad_log_posteriors = Matrix(n, log_posteriors.cols);
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < s_count; ++s) {
      const double occ = fwd.at(t, s) + bwd.at(t, s) - log_z;
      if (occ > -700.0)
        out.grad_log_posteriors.at(t, detail::lattice_label(y, s)) -=
            std::exp(occ);
    }
  return out;
}

// Exhaustive-enumeration oracle: sums the probability of every length-n
// path that collapses to y. Linear-domain probabilities; bounds keep the
// K^n enumeration small. Returns +inf when y is unreachable.
inline double ctc_loss_bruteforce(const PosteriorMatrix& posteriors,
                                  const LabelSequence& y) {
  posteriors.validate();
  y.validate();
  const int n = posteriors.frames();
  const int k = posteriors.classes();
  require(n <= 10 && k <= 6, "ctc brute force: enumeration bounds exceeded");
  require(k == y.vocab_size + 1, "ctc brute force: shape mismatch");

  std::vector<int> path(n, 0);
  double total = 0.0;
  while (true) {
    PathSequence p{path, y.vocab_size};
    if (collapse(p).tokens == y.tokens) {
      double prob = 1.0;
      for (int t = 0; t < n; ++t) prob *= posteriors.p.at(t, path[t]);
      total += prob;
    }
    int pos = n - 1;
    while (pos >= 0 && path[pos] == k - 1) path[pos--] = 0;
    if (pos < 0) break;
    ++path[pos];
  }
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

// Most probable path collapsing to y. Ties are broken toward the earlier
// (smaller) lattice state, both in transitions and at the final state.
inline PathSequence ctc_viterbi(const Matrix& log_posteriors,
                                const LabelSequence& y) {
  detail::check_ctc_inputs(log_posteriors, y);
  const int n = log_posteriors.rows;
  const int s_count = 2 * y.length() + 1;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  Matrix score(n, s_count, kNegInf);
  std::vector<std::vector<int>> parent(n, std::vector<int>(s_count, -1));
  score.at(0, 0) = detail::floored(log_posteriors, 0, detail::lattice_label(y, 0));
  if (s_count > 1)
    score.at(0, 1) =
        detail::floored(log_posteriors, 0, detail::lattice_label(y, 1));

  for (int t = 1; t < n; ++t)
    for (int s = 0; s < s_count; ++s) {
      double best = kNegInf;
      int best_prev = -1;
      auto consider = [&](int prev) {
        if (prev < 0 || score.at(t - 1, prev) == kNegInf) return;
        if (score.at(t - 1, prev) > best) {
          best = score.at(t - 1, prev);
          best_prev = prev;
        }
      };
      // Smaller lattice index first; strict improvement keeps the earlier.
      if (s >= 2 && detail::lattice_label(y, s) != y.blank_id() &&
          detail::lattice_label(y, s) != detail::lattice_label(y, s - 2))
        consider(s - 2);
      consider(s - 1);
      consider(s);
      if (best_prev >= 0) {
        score.at(t, s) = best + detail::floored(log_posteriors, t,
                                                detail::lattice_label(y, s));
        parent[t][s] = best_prev;
      }
    }

  int end_state = s_count - 1;
  if (s_count > 1 && score.at(n - 1, s_count - 2) >= score.at(n - 1, s_count - 1))
    end_state = s_count - 2;
  require(score.at(n - 1, end_state) != kNegInf, "ctc viterbi: no valid path");

  PathSequence path;
  path.vocab_size = y.vocab_size;
  path.frames.resize(n);
  int s = end_state;
  for (int t = n - 1; t >= 0; --t) {
    path.frames[t] = detail::lattice_label(y, s);
    if (t > 0) s = parent[t][s];
  }
  return path;
}

// Run-length encodes a path into its distinct consecutive symbols and the
// fraction of frames each run occupies.
inline std::pair<LabelSequence, StrictSimplexWeights>
beta_from_forced_alignment(const PathSequence& path) {
  path.validate();
  require(!path.frames.empty(), "forced alignment: empty path");
  LabelSequence relabeled;
  relabeled.vocab_size = path.vocab_size;
  std::vector<double> beta;
  const double n = static_cast<double>(path.length());
  int i = 0;
  while (i < path.length()) {
    int j = i;
    while (j < path.length() && path.frames[j] == path.frames[i]) ++j;
    relabeled.tokens.push_back(path.frames[i]);
    beta.push_back(static_cast<double>(j - i) / n);
    i = j;
  }
  return {std::move(relabeled), StrictSimplexWeights(std::move(beta))};
}

// Identical contract to the OTTC greedy decoder; shared implementation.
inline std::pair<LabelSequence, Segmentation> ctc_greedy_decode(
    const PosteriorMatrix& posteriors) {
  return greedy_decode(posteriors);
}

}  // namespace ottc

#endif  // OTTC_CTC_HPP_
