// ottc/ottc_loss.hpp
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
// Optimal temporal transport classification loss: cross-entropy between
// per-frame posteriors and target labels, weighted by the monotone 1D
// transport plan between learned frame weights alpha and fixed label
// weights beta. Gradients are exposed with respect to log-posteriors and
// raw pre-softmax frame scores so any encoder can chain them.

#ifndef OTTC_LOSS_HPP_
#define OTTC_LOSS_HPP_

#include <span>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/coupling.hpp"
#include "ottc/labels.hpp"
#include "ottc/simplex.hpp"

namespace ottc {

// Pre-softmax frame scores, one scalar per frame.
struct AlphaScores {
  std::vector<double> scores;

  int size() const { return static_cast<int>(scores.size()); }

  void validate() const {
    require(!scores.empty(), "alpha scores: empty");
    for (double s : scores)
      require(std::isfinite(s), "alpha scores: non-finite entry");
  }
};

// Softmax over the time axis; strictly positive frame weights.
inline SimplexWeights alpha_from_scores(const AlphaScores& scores) {
  scores.validate();
  return SimplexWeights(softmax(scores.scores));
}

namespace detail {

inline void check_ottc_shapes(const PosteriorMatrix& posteriors,
                              const LabelSequence& y_aug, int alpha_len,
                              int beta_len) {
  posteriors.validate();
  y_aug.validate();
  require(y_aug.length() >= 1, "ottc loss: empty target");
  require(posteriors.classes() == y_aug.vocab_size + 1,
          "ottc loss: posterior width must be |L|+1");
  require(alpha_len == posteriors.frames(),
          "ottc loss: alpha length must match frame count");
  require(beta_len == y_aug.length(),
          "ottc loss: beta length must match target length");
  require(posteriors.frames() >= y_aug.length(),
          "ottc loss: requires n >= m");
}

}  // namespace detail

// Coupling-weighted cross-entropy, evaluated in log space over the sparse
// support with probability floor 1e-30.
inline double ottc_loss(const PosteriorMatrix& posteriors,
                        const LabelSequence& y_aug, const SimplexWeights& alpha,
                        const StrictSimplexWeights& beta) {
  detail::check_ottc_shapes(posteriors, y_aug, alpha.size(), beta.size());
  const SparseCoupling coupling = compute_coupling(alpha, beta);
  double loss = 0.0;
  for (const CouplingEntry& e : coupling.entries) {
    const int label = y_aug.tokens[e.j - 1];
    loss -= e.mass * floored_log(posteriors.p.at(e.i - 1, label));
  }
  return loss;
}

struct OttcGradients {
  double loss = 0.0;
  // dL / d(log p_k(x_i)), n x (|L|+1), row-major.
  Matrix grad_log_posteriors;
  // dL / d(score_i) through softmax and the coupling subgradient.
  std::vector<double> grad_scores;
};

inline OttcGradients ottc_backward(const PosteriorMatrix& posteriors,
                                   const LabelSequence& y_aug,
                                   const AlphaScores& scores,
                                   const StrictSimplexWeights& beta) {
  const SimplexWeights alpha = alpha_from_scores(scores);
  detail::check_ottc_shapes(posteriors, y_aug, alpha.size(), beta.size());
  const SparseCoupling coupling = compute_coupling(alpha, beta);

  OttcGradients out;
  out.grad_log_posteriors = Matrix(posteriors.frames(), posteriors.classes());
  std::vector<double> entry_costs(coupling.entries.size());
  for (size_t e = 0; e < coupling.entries.size(); ++e) {
    const CouplingEntry& ent = coupling.entries[e];
    const int label = y_aug.tokens[ent.j - 1];
    entry_costs[e] = -floored_log(posteriors.p.at(ent.i - 1, label));
    out.loss += ent.mass * entry_costs[e];
    out.grad_log_posteriors.at(ent.i - 1, label) -= ent.mass;
  }

  const std::vector<double> grad_alpha =
      coupling_gradient(alpha, beta, entry_costs);
  out.grad_scores = softmax_backward(grad_alpha, alpha.values());
  return out;
}

// Frames whose weight falls at or below the threshold; 0-based indices.
inline std::vector<int> dropped_frames(const SimplexWeights& alpha,
                                       double threshold) {
  std::vector<int> out;
  for (int i = 0; i < alpha.size(); ++i)
    if (alpha[i] < threshold) out.push_back(i);
  return out;
}

}  // namespace ottc

#endif  // OTTC_LOSS_HPP_
