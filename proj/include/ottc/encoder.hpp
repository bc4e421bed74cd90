// ottc/encoder.hpp
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
// Per-frame encoder for the synthetic lab: a two-layer GELU trunk shared
// by a linear logits head and a two-layer score head (GELU in between,
// scalar output per frame). Parameters live in one flat vector so the
// optimizer, checkpoints and finite-difference checks stay simple; the
// score head occupies the tail of the layout so it can be frozen by range.

#ifndef OTTC_ENCODER_HPP_
#define OTTC_ENCODER_HPP_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/rng.hpp"

namespace ottc {

struct EncoderConfig {
  int feat_dim = 16;
  int hidden = 32;
  int vocab_size = 8;

  int classes() const { return vocab_size + 1; }
  int score_hidden() const { return hidden / 2; }

  void validate() const {
    require(feat_dim >= 1 && vocab_size >= 1 && hidden >= 2,
            "encoder config: invalid dimensions");
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Flat layout: trunk_w1 (H x d), trunk_b1 (H), trunk_w2 (H x H),
// trunk_b2 (H), logits_w (K x H), logits_b (K), then the score head
// score_w1 (Hs x H), score_b1 (Hs), score_w2 (Hs), score_b2 (1).
struct EncoderParams {
  EncoderConfig cfg;
  std::vector<double> flat;

  size_t trunk_w1() const { return 0; }
  size_t trunk_b1() const { return trunk_w1() + static_cast<size_t>(cfg.hidden) * cfg.feat_dim; }
  size_t trunk_w2() const { return trunk_b1() + cfg.hidden; }
  size_t trunk_b2() const { return trunk_w2() + static_cast<size_t>(cfg.hidden) * cfg.hidden; }
  size_t logits_w() const { return trunk_b2() + cfg.hidden; }
  size_t logits_b() const { return logits_w() + static_cast<size_t>(cfg.classes()) * cfg.hidden; }
  size_t score_w1() const { return logits_b() + cfg.classes(); }
  size_t score_b1() const { return score_w1() + static_cast<size_t>(cfg.score_hidden()) * cfg.hidden; }
  size_t score_w2() const { return score_b1() + cfg.score_hidden(); }
  size_t score_b2() const { return score_w2() + cfg.score_hidden(); }
  size_t total() const { return score_b2() + 1; }

  // First index of the score head; everything from here on is frozen by
  // the freeze schedule.
  size_t score_head_begin() const { return score_w1(); }

  void validate() const {
    cfg.validate();
    require(flat.size() == total(), "encoder params: flat size mismatch");
    for (double v : flat)
      require(std::isfinite(v), "encoder params: non-finite parameter");
  }
};

inline EncoderParams init_encoder(const EncoderConfig& cfg, uint64_t seed) {
  cfg.validate();
  EncoderParams p;
  p.cfg = cfg;
  p.flat.assign(p.total(), 0.0);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  auto fill = [&](size_t begin, size_t count, int fan_in) {
    const double scale = std::sqrt(2.0 / fan_in);
    for (size_t k = 0; k < count; ++k) p.flat[begin + k] = scale * rng.normal();
  };
  fill(p.trunk_w1(), static_cast<size_t>(cfg.hidden) * cfg.feat_dim, cfg.feat_dim);
  fill(p.trunk_w2(), static_cast<size_t>(cfg.hidden) * cfg.hidden, cfg.hidden);
  fill(p.logits_w(), static_cast<size_t>(cfg.classes()) * cfg.hidden, cfg.hidden);
  fill(p.score_w1(), static_cast<size_t>(cfg.score_hidden()) * cfg.hidden, cfg.hidden);
  fill(p.score_w2(), cfg.score_hidden(), cfg.score_hidden());
  // Blank-biased start: frames default to blank until label evidence
  // overrides it, so frames the loss never supervises decode harmlessly.
  p.flat[p.logits_b() + cfg.vocab_size] = 4.0;
  return p;
}

namespace detail {

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;
  return cdf + x * pdf;
}

}  // namespace detail

// Intermediate activations kept for the backward pass.
struct EncoderCache {
  Matrix h1_pre, h1;  // n x H
  Matrix h2_pre, h2;  // n x H
  Matrix s1_pre, s1;  // n x Hs
};

struct EncoderOutput {
  Matrix logits;               // n x K
  std::vector<double> scores;  // n
};

inline EncoderOutput encoder_forward(const EncoderParams& p,
                                     const Matrix& features,
                                     EncoderCache* cache = nullptr) {
  p.cfg.validate();
  require(features.cols == p.cfg.feat_dim && features.rows >= 1,
          "encoder: feature shape mismatch");
  const int n = features.rows;
  const int d = p.cfg.feat_dim;
  const int h = p.cfg.hidden;
  const int hs = p.cfg.score_hidden();
  const int k = p.cfg.classes();
  const double* w = p.flat.data();

  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c.h1_pre = Matrix(n, h);
  c.h1 = Matrix(n, h);
  c.h2_pre = Matrix(n, h);
  c.h2 = Matrix(n, h);
  c.s1_pre = Matrix(n, hs);
  c.s1 = Matrix(n, hs);

  EncoderOutput out;
  out.logits = Matrix(n, k);
  out.scores.assign(n, 0.0);

  for (int t = 0; t < n; ++t) {
    const double* x = features.v.data() + static_cast<size_t>(t) * d;
    for (int i = 0; i < h; ++i) {
      double acc = w[p.trunk_b1() + i];
      const double* row = w + p.trunk_w1() + static_cast<size_t>(i) * d;
      for (int j = 0; j < d; ++j) acc += row[j] * x[j];
      c.h1_pre.at(t, i) = acc;
      c.h1.at(t, i) = detail::gelu(acc);
    }
    for (int i = 0; i < h; ++i) {
      double acc = w[p.trunk_b2() + i];
      const double* row = w + p.trunk_w2() + static_cast<size_t>(i) * h;
      for (int j = 0; j < h; ++j) acc += row[j] * c.h1.at(t, j);
      c.h2_pre.at(t, i) = acc;
      c.h2.at(t, i) = detail::gelu(acc);
    }
    for (int i = 0; i < k; ++i) {
      double acc = w[p.logits_b() + i];
      const double* row = w + p.logits_w() + static_cast<size_t>(i) * h;
      for (int j = 0; j < h; ++j) acc += row[j] * c.h2.at(t, j);
      out.logits.at(t, i) = acc;
    }
    for (int i = 0; i < hs; ++i) {
      double acc = w[p.score_b1() + i];
      const double* row = w + p.score_w1() + static_cast<size_t>(i) * h;
      for (int j = 0; j < h; ++j) acc += row[j] * c.h2.at(t, j);
      c.s1_pre.at(t, i) = acc;
      c.s1.at(t, i) = detail::gelu(acc);
    }
    double acc = w[p.score_b2()];
    for (int j = 0; j < hs; ++j) acc += w[p.score_w2() + j] * c.s1.at(t, j);
    out.scores[t] = acc;
  }
  return out;
}

// Accumulates parameter gradients into `grad_flat` (same layout as the
// parameters) given dL/dlogits and dL/dscores for one utterance.
inline void encoder_backward(const EncoderParams& p, const Matrix& features,
                             const EncoderCache& c, const Matrix& grad_logits,
                             std::span<const double> grad_scores,
                             std::vector<double>& grad_flat) {
  const int n = features.rows;
  const int d = p.cfg.feat_dim;
  const int h = p.cfg.hidden;
  const int hs = p.cfg.score_hidden();
  const int k = p.cfg.classes();
  const double* w = p.flat.data();
  double* g = grad_flat.data();

  std::vector<double> dh2(h), dh1(h), ds1(hs);
  for (int t = 0; t < n; ++t) {
    const double* x = features.v.data() + static_cast<size_t>(t) * d;
    std::fill(dh2.begin(), dh2.end(), 0.0);

    // Logits head.
    for (int i = 0; i < k; ++i) {
      const double go = grad_logits.at(t, i);
      if (go == 0.0) continue;
      g[p.logits_b() + i] += go;
      double* grow = g + p.logits_w() + static_cast<size_t>(i) * h;
      const double* wrow = w + p.logits_w() + static_cast<size_t>(i) * h;
      for (int j = 0; j < h; ++j) {
        grow[j] += go * c.h2.at(t, j);
        dh2[j] += go * wrow[j];
      }
    }

    // Score head.
    const double gs = grad_scores[t];
    if (gs != 0.0) {
      g[p.score_b2()] += gs;
      for (int j = 0; j < hs; ++j) {
        g[p.score_w2() + j] += gs * c.s1.at(t, j);
        ds1[j] = gs * w[p.score_w2() + j] * detail::gelu_grad(c.s1_pre.at(t, j));
      }
      for (int i = 0; i < hs; ++i) {
        if (ds1[i] == 0.0) continue;
        g[p.score_b1() + i] += ds1[i];
        double* grow = g + p.score_w1() + static_cast<size_t>(i) * h;
        const double* wrow = w + p.score_w1() + static_cast<size_t>(i) * h;
        for (int j = 0; j < h; ++j) {
          grow[j] += ds1[i] * c.h2.at(t, j);
          dh2[j] += ds1[i] * wrow[j];
        }
      }
    }

    // Trunk layer 2.
    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int i = 0; i < h; ++i) {
      const double di = dh2[i] * detail::gelu_grad(c.h2_pre.at(t, i));
      if (di == 0.0) continue;
      g[p.trunk_b2() + i] += di;
      double* grow = g + p.trunk_w2() + static_cast<size_t>(i) * h;
      const double* wrow = w + p.trunk_w2() + static_cast<size_t>(i) * h;
      for (int j = 0; j < h; ++j) {
        grow[j] += di * c.h1.at(t, j);
        dh1[j] += di * wrow[j];
      }
    }

    // Trunk layer 1.
    for (int i = 0; i < h; ++i) {
      const double di = dh1[i] * detail::gelu_grad(c.h1_pre.at(t, i));
      if (di == 0.0) continue;
      g[p.trunk_b1() + i] += di;
      double* grow = g + p.trunk_w1() + static_cast<size_t>(i) * d;
      for (int j = 0; j < d; ++j) grow[j] += di * x[j];
    }
  }
}

// Row-wise log-softmax of logits.
inline Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (int t = 0; t < logits.rows; ++t) {
    double mx = logits.at(t, 0);
    for (int k = 1; k < logits.cols; ++k) mx = std::max(mx, logits.at(t, k));
    double z = 0.0;
    for (int k = 0; k < logits.cols; ++k) z += std::exp(logits.at(t, k) - mx);
    const double lz = mx + std::log(z);
    for (int k = 0; k < logits.cols; ++k) out.at(t, k) = logits.at(t, k) - lz;
  }
  return out;
}

// dL/dlogits from dL/d(log softmax(logits)).
inline Matrix log_softmax_backward_rows(const Matrix& grad_log_probs,
                                        const Matrix& log_probs) {
  Matrix out(grad_log_probs.rows, grad_log_probs.cols);
  for (int t = 0; t < grad_log_probs.rows; ++t) {
    double total = 0.0;
    for (int k = 0; k < grad_log_probs.cols; ++k)
      total += grad_log_probs.at(t, k);
    for (int k = 0; k < grad_log_probs.cols; ++k)
      out.at(t, k) = grad_log_probs.at(t, k) -
                     total * std::exp(log_probs.at(t, k));
  }
  return out;
}

}  // namespace ottc

#endif  // OTTC_ENCODER_HPP_
