// ottc/labels.hpp
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

#ifndef OTTC_LABELS_HPP_
#define OTTC_LABELS_HPP_

#include <algorithm>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/sotd.hpp"

namespace ottc {

// Token sequence over a vocabulary of size |L| plus the reserved blank id
// |L|. May be empty (e.g. the collapse of an all-blank path).
struct LabelSequence {
  std::vector<int> tokens;
  int vocab_size = 0;

  int blank_id() const { return vocab_size; }
  int length() const { return static_cast<int>(tokens.size()); }

  void validate() const {
    require(vocab_size >= 1, "label sequence: vocabulary must be nonempty");
    for (int t : tokens)
      require(t >= 0 && t <= vocab_size, "label sequence: id out of range");
  }

  bool contains_blank() const {
    return std::find(tokens.begin(), tokens.end(), blank_id()) != tokens.end();
  }

  friend bool operator==(const LabelSequence&, const LabelSequence&) = default;
};

// Inserts a blank between every pair of equal adjacent labels. Inverse of
// dropping blanks.
inline LabelSequence augment_blanks(const LabelSequence& y) {
  y.validate();
  require(!y.contains_blank(), "augment blanks: input already contains blank");
  LabelSequence out;
  out.vocab_size = y.vocab_size;
  out.tokens.reserve(y.tokens.size() * 2);
  for (size_t i = 0; i < y.tokens.size(); ++i) {
    if (i > 0 && y.tokens[i] == y.tokens[i - 1])
      out.tokens.push_back(y.blank_id());
    out.tokens.push_back(y.tokens[i]);
  }
  return out;
}

inline LabelSequence drop_blanks(const LabelSequence& y) {
  LabelSequence out;
  out.vocab_size = y.vocab_size;
  for (int t : y.tokens)
    if (t != y.blank_id()) out.tokens.push_back(t);
  return out;
}

// Per-frame label probabilities, n frames by |L|+1 classes, rows summing
// to one within 1e-6.
struct PosteriorMatrix {
  Matrix p;

  int frames() const { return p.rows; }
  int classes() const { return p.cols; }

  void validate() const {
    require(p.rows >= 1 && p.cols >= 2, "posteriors: invalid shape");
    for (int i = 0; i < p.rows; ++i) {
      double s = 0.0;
      for (int k = 0; k < p.cols; ++k) {
        require(p.at(i, k) >= 0.0, "posteriors: negative probability");
        s += p.at(i, k);
      }
      require(std::abs(s - 1.0) <= 1e-6, "posteriors: row does not sum to 1");
    }
  }
};

// Per-token frame spans: [start, end) with 0-based frame indices, sorted
// and non-overlapping.
struct Span {
  int label = 0;
  int start = 0;
  int end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct Segmentation {
  std::vector<Span> spans;

  void validate(int frames) const {
    int prev_end = 0;
    for (const Span& s : spans) {
      require(s.start >= prev_end && s.end > s.start && s.end <= frames,
              "segmentation: spans must be sorted, non-overlapping, nonempty");
      prev_end = s.end;
    }
  }

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

inline std::vector<int> frame_argmax(const PosteriorMatrix& posteriors) {
  std::vector<int> ids(posteriors.frames());
  for (int i = 0; i < posteriors.frames(); ++i) {
    int best = 0;
    for (int k = 1; k < posteriors.classes(); ++k)
      if (posteriors.p.at(i, k) > posteriors.p.at(i, best)) best = k;
    ids[i] = best;
  }
  return ids;
}

// Per-frame argmax, collapse of consecutive repeats, blank deletion. The
// segmentation records the maximal frame run behind each surviving token.
inline std::pair<LabelSequence, Segmentation> greedy_decode(
    const PosteriorMatrix& posteriors) {
  posteriors.validate();
  const int blank = posteriors.classes() - 1;
  const std::vector<int> ids = frame_argmax(posteriors);

  LabelSequence labels;
  labels.vocab_size = blank;
  Segmentation seg;
  int i = 0;
  const int n = static_cast<int>(ids.size());
  while (i < n) {
    int j = i;
    while (j < n && ids[j] == ids[i]) ++j;
    if (ids[i] != blank) {
      labels.tokens.push_back(ids[i]);
      seg.spans.push_back({ids[i], i, j});
    }
    i = j;
  }
  return {std::move(labels), std::move(seg)};
}

inline LabelSequence aggregate(const LabelSequence& seq) {
  LabelSequence out;
  out.vocab_size = seq.vocab_size;
  out.tokens = aggregate_elements(seq.tokens);
  return out;
}

inline LabelSequence prune(const LabelSequence& seq, const SimplexWeights& alpha,
                           double drop_threshold) {
  LabelSequence out;
  out.vocab_size = seq.vocab_size;
  out.tokens = prune_elements(
      seq.tokens, std::span<const double>(alpha.values()), drop_threshold);
  return out;
}

}  // namespace ottc

#endif  // OTTC_LABELS_HPP_
