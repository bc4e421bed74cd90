// ottc/metrics.hpp
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
// Alignment-quality metrics: peaky percentage, starting-frame F1,
// intersection duration ratio and token error rate. Hypothesis and
// reference tokens are paired by a minimum-edit-distance alignment on
// labels with ties broken toward earlier matches.

#ifndef OTTC_METRICS_HPP_
#define OTTC_METRICS_HPP_

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/labels.hpp"

namespace ottc {

struct MetricsReport {
  double peaky_percent = 0.0;
  double f1 = 0.0;
  double idr = 0.0;
  double token_error_rate = 0.0;
  double dropped_frame_percent = 0.0;
  // Boundary-matching counts behind f1/idr.
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  long matched_tokens = 0;
};

inline int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  const size_t la = a.size(), lb = b.size();
  std::vector<int> prev(lb + 1), cur(lb + 1);
  for (size_t j = 0; j <= lb; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= la; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= lb; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[lb];
}

// Index pairs (a_idx, b_idx) of tokens paired by one optimal unit-cost edit
// alignment; includes substitution pairs. Backtrace prefers pairing over
// deletion over insertion, which fixes ties deterministically toward
// earlier matches.
inline std::vector<std::pair<int, int>> match_tokens(
    const std::vector<int>& a, const std::vector<int>& b) {
  const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
  Matrix d(la + 1, lb + 1);
  for (int i = 0; i <= la; ++i) d.at(i, 0) = i;
  for (int j = 0; j <= lb; ++j) d.at(0, j) = j;
  for (int i = 1; i <= la; ++i)
    for (int j = 1; j <= lb; ++j) {
      const double sub = d.at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
      d.at(i, j) = std::min({sub, d.at(i - 1, j) + 1, d.at(i, j - 1) + 1});
    }
  std::vector<std::pair<int, int>> pairs;
  int i = la, j = lb;
  while (i > 0 && j > 0) {
    const double sub = d.at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
    if (d.at(i, j) == sub) {
      pairs.push_back({i - 1, j - 1});
      --i;
      --j;
    } else if (d.at(i, j) == d.at(i - 1, j) + 1) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

// Percentage of frames whose argmax falls in `non_alphabet`, minus the
// supplied real-silence fraction, clamped to [0, 100].
inline double peaky_percent(const std::vector<int>& frame_ids,
                            const std::set<int>& non_alphabet,
                            double silence_fraction_to_subtract) {
  require(!frame_ids.empty(), "peaky percent: empty frames");
  require(silence_fraction_to_subtract >= 0.0 &&
              silence_fraction_to_subtract <= 1.0,
          "peaky percent: silence fraction outside [0, 1]");
  long hits = 0;
  for (int id : frame_ids) hits += non_alphabet.count(id) ? 1 : 0;
  const double pct = 100.0 * static_cast<double>(hits) /
                         static_cast<double>(frame_ids.size()) -
                     100.0 * silence_fraction_to_subtract;
  return std::clamp(pct, 0.0, 100.0);
}

namespace detail {

struct BoundaryCounts {
  long tp = 0;
  long matched = 0;
  double intersection = 0.0;
};

inline BoundaryCounts boundary_counts(const Segmentation& pred,
                                      const Segmentation& ref,
                                      int tolerance_frames) {
  std::vector<int> pl, rl;
  for (const Span& s : pred.spans) pl.push_back(s.label);
  for (const Span& s : ref.spans) rl.push_back(s.label);
  BoundaryCounts out;
  for (auto [pi, ri] : match_tokens(pl, rl)) {
    const Span& p = pred.spans[pi];
    const Span& r = ref.spans[ri];
    if (p.label != r.label) continue;
    ++out.matched;
    if (std::abs(p.start - r.start) <= tolerance_frames) ++out.tp;
    out.intersection +=
        std::max(0, std::min(p.end, r.end) - std::max(p.start, r.start));
  }
  return out;
}

}  // namespace detail

// Harmonic mean of starting-frame precision and recall. A matched pair is
// a true positive iff its start frames differ by at most the tolerance;
// every other predicted span is a false positive and every other reference
// span a false negative.
inline double boundary_f1(const Segmentation& pred, const Segmentation& ref,
                          int tolerance_frames,
                          MetricsReport* counts = nullptr) {
  require(tolerance_frames >= 0, "boundary f1: negative tolerance");
  const auto c = detail::boundary_counts(pred, ref, tolerance_frames);
  const long np = static_cast<long>(pred.spans.size());
  const long nr = static_cast<long>(ref.spans.size());
  if (counts) {
    counts->true_positives = c.tp;
    counts->false_positives = np - c.tp;
    counts->false_negatives = nr - c.tp;
    counts->matched_tokens = c.matched;
  }
  if (np == 0 && nr == 0) return 1.0;
  if (c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(np);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(nr);
  return 2.0 * precision * recall / (precision + recall);
}

// Intersection duration of label-matched spans over total reference
// duration; in [0, 1].
inline double idr(const Segmentation& pred, const Segmentation& ref) {
  require(!ref.spans.empty(), "idr: empty reference segmentation");
  double ref_duration = 0.0;
  for (const Span& s : ref.spans) ref_duration += s.end - s.start;
  const auto c = detail::boundary_counts(pred, ref, 0);
  return c.intersection / ref_duration;
}

// Levenshtein distance normalized by the reference length.
inline double token_error_rate(const LabelSequence& hyp,
                               const LabelSequence& ref) {
  require(!ref.tokens.empty(), "token error rate: empty reference");
  return static_cast<double>(levenshtein(hyp.tokens, ref.tokens)) /
         static_cast<double>(ref.tokens.size());
}

}  // namespace ottc

#endif  // OTTC_METRICS_HPP_
