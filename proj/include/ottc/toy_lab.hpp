// ottc/toy_lab.hpp
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
// Desk-scale training lab: synthetic monotonic seq2seq data with
// ground-truth segmentations, and a deterministic single-threaded trainer
// for the transport-based loss, reference CTC and the ablation modes.

#ifndef OTTC_TOY_LAB_HPP_
#define OTTC_TOY_LAB_HPP_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ottc/common.hpp"
#include "ottc/ctc.hpp"
#include "ottc/encoder.hpp"
#include "ottc/labels.hpp"
#include "ottc/metrics.hpp"
#include "ottc/ottc_loss.hpp"
#include "ottc/rng.hpp"
#include "ottc/simplex.hpp"

namespace ottc {

struct SyntheticUtterance {
  std::string id;
  Matrix features;  // n x d
  LabelSequence labels;
  Segmentation gt_segmentation;
  std::vector<int> silence_frames;  // 0-based, sorted

  int frames() const { return features.rows; }
  double silence_fraction() const {
    return frames() == 0
               ? 0.0
               : static_cast<double>(silence_frames.size()) / frames();
  }
};

struct DatasetConfig {
  int vocab_size = 8;
  int utterance_count = 2000;
  int target_len_min = 3;
  int target_len_max = 8;
  int duration_min = 2;
  int duration_max = 6;
  // Noise is relative to the unit-norm embeddings: the expected noise
  // norm equals noise_sigma (per-dimension std is noise_sigma / sqrt(d)).
  double noise_sigma = 0.3;
  double silence_prob = 0.15;
  int feat_dim = 16;
  uint64_t seed = 7;
  // The embedding space is shared across datasets with equal vocabulary
  // and feature dimension unless this is overridden.
  uint64_t codebook_seed = 12345;
  // Coarticulation: consecutive tokens without a silence gap share this
  // many boundary frames that mix the two embeddings with an energy dip
  // (combined norm well below a core frame). Each such frame still leans
  // toward one side, but its evidence is weak — the kind of frame the
  // marginalizing loss prefers to blank out; width 0 disables it.
  int transition_frames = 2;

  void validate() const {
    require(vocab_size >= 2, "dataset: vocab_size must be >= 2");
    require(utterance_count >= 1, "dataset: utterance_count must be >= 1");
    require(target_len_min >= 1 && target_len_max >= target_len_min,
            "dataset: invalid target length range");
    require(duration_min >= 1 && duration_max >= duration_min,
            "dataset: invalid duration range");
    require(noise_sigma >= 0.0, "dataset: negative noise");
    require(silence_prob >= 0.0 && silence_prob < 1.0,
            "dataset: silence_prob outside [0, 1)");
    require(feat_dim >= vocab_size,
            "dataset: feat_dim must be at least vocab_size");
    require(transition_frames >= 0, "dataset: negative transition width");
  }
};

// Orthonormal rows: one embedding per label plus the silence prototype at
// row vocab_size, orthogonal to every label so that nothing learned about
// labels extrapolates onto silence. Deterministic in (vocab_size,
// feat_dim, seed).
inline Matrix label_codebook(int vocab_size, int feat_dim, uint64_t seed) {
  Rng rng(seed ^ 0xc2b2ae3d27d4eb4full);
  Matrix book(vocab_size + 1, feat_dim);
  for (int r = 0; r < vocab_size; ++r) {
    for (int c = 0; c < feat_dim; ++c) book.at(r, c) = rng.normal();
    // Gram-Schmidt against earlier rows.
    for (int prev = 0; prev < r; ++prev) {
      double dot = 0.0;
      for (int c = 0; c < feat_dim; ++c) dot += book.at(r, c) * book.at(prev, c);
      for (int c = 0; c < feat_dim; ++c) book.at(r, c) -= dot * book.at(prev, c);
    }
    double norm = 0.0;
    for (int c = 0; c < feat_dim; ++c) norm += book.at(r, c) * book.at(r, c);
    norm = std::sqrt(norm);
    require(norm > 1e-6, "codebook: degenerate draw");
    for (int c = 0; c < feat_dim; ++c) book.at(r, c) /= norm;
  }
  return book;
}

inline std::vector<SyntheticUtterance> generate_dataset(
    const DatasetConfig& cfg) {
  cfg.validate();
  const Matrix book =
      label_codebook(cfg.vocab_size, cfg.feat_dim, cfg.codebook_seed);
  const double noise_dim_std = cfg.noise_sigma / std::sqrt(cfg.feat_dim);
  Rng rng(cfg.seed);
  std::vector<SyntheticUtterance> out;
  out.reserve(cfg.utterance_count);

  for (int u = 0; u < cfg.utterance_count; ++u) {
    SyntheticUtterance utt;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "utt%06d", u);
    utt.id = idbuf;
    utt.labels.vocab_size = cfg.vocab_size;

    const int m = rng.uniform_int(cfg.target_len_min, cfg.target_len_max);
    std::vector<int> labels(m), durations(m);
    for (int j = 0; j < m; ++j) {
      labels[j] = rng.uniform_int(0, cfg.vocab_size - 1);
      durations[j] = rng.uniform_int(cfg.duration_min, cfg.duration_max);
    }
    std::vector<int> silences(m + 1, 0);  // before token j; last = trailing
    for (int gap = 0; gap <= m; ++gap)
      if (rng.uniform() < cfg.silence_prob)
        silences[gap] = rng.uniform_int(cfg.duration_min, cfg.duration_max);
    // Adjacent equal labels always get at least a one-frame gap; without a
    // boundary cue the repetition is unrecoverable from per-frame features.
    for (int j = 1; j < m; ++j)
      if (labels[j] == labels[j - 1]) silences[j] = std::max(silences[j], 1);

    const int tf = cfg.transition_frames;
    int n = 0;
    for (int j = 0; j < m; ++j) n += durations[j];
    for (int gap = 0; gap <= m; ++gap) n += silences[gap];
    for (int j = 1; j < m; ++j)
      if (silences[j] == 0) n += tf;

    utt.features = Matrix(n, cfg.feat_dim);
    utt.labels.tokens = labels;
    int cursor = 0;
    auto noisy = [&](double base) { return base + noise_dim_std * rng.normal(); };
    for (int j = 0; j < m; ++j) {
      for (int t = 0; t < silences[j]; ++t) {
        utt.silence_frames.push_back(cursor);
        for (int c = 0; c < cfg.feat_dim; ++c)
          utt.features.at(cursor, c) = noisy(0.0);
        ++cursor;
      }
      int start = cursor;
      if (j > 0 && silences[j] == 0 && tf > 0) {
        // Coarticulated boundary with an energy dip. The first half of the
        // transition belongs to the previous span.
        const int left_count = (tf + 1) / 2;
        for (int t = 0; t < tf; ++t, ++cursor) {
          const double u = (t + 0.5) / tf;
          const double wl = 0.7 * (1.0 - u), wr = 0.7 * u;
          for (int c = 0; c < cfg.feat_dim; ++c)
            utt.features.at(cursor, c) = noisy(
                wl * book.at(labels[j - 1], c) + wr * book.at(labels[j], c));
        }
        utt.gt_segmentation.spans.back().end = start + left_count;
        start += left_count;
      }
      for (int t = 0; t < durations[j]; ++t, ++cursor)
        for (int c = 0; c < cfg.feat_dim; ++c)
          utt.features.at(cursor, c) = noisy(book.at(labels[j], c));
      utt.gt_segmentation.spans.push_back({labels[j], start, cursor});
    }
    for (int t = 0; t < silences[m]; ++t) {
      utt.silence_frames.push_back(cursor);
      for (int c = 0; c < cfg.feat_dim; ++c)
        utt.features.at(cursor, c) = noisy(0.0);
      ++cursor;
    }
    out.push_back(std::move(utt));
  }
  return out;
}

enum class TrainMode {
  kOttc,
  kCtc,
  kOttcFixedAlpha,
  kOttcOracleBeta,
  kSinglePathCe,
};

inline const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::kOttc: return "ottc";
    case TrainMode::kCtc: return "ctc";
    case TrainMode::kOttcFixedAlpha: return "ottc-fixed-alpha";
    case TrainMode::kOttcOracleBeta: return "ottc-oracle-beta";
    case TrainMode::kSinglePathCe: return "single-path-ce";
  }
  return "?";
}

inline TrainMode train_mode_from_name(const std::string& name) {
  if (name == "ottc") return TrainMode::kOttc;
  if (name == "ctc") return TrainMode::kCtc;
  if (name == "ottc-fixed-alpha") return TrainMode::kOttcFixedAlpha;
  if (name == "ottc-oracle-beta") return TrainMode::kOttcOracleBeta;
  if (name == "single-path-ce") return TrainMode::kSinglePathCe;
  throw std::invalid_argument("unknown training mode: " + name);
}

inline bool mode_learns_alpha(TrainMode mode) {
  return mode == TrainMode::kOttc || mode == TrainMode::kOttcOracleBeta;
}

struct TrainConfig {
  TrainMode mode = TrainMode::kOttc;
  int epochs = 50;
  int freeze_last_epochs = 10;
  double lr = 1e-3;
  int warmup_steps = 100;
  uint64_t seed = 7;
  int batch_size = 16;
  double drop_threshold = 0.1;  // relative; effective cutoff is this / n
  int tolerance_frames = 2;
  int hidden = 32;
  int probe_utterances = 4;
  // Adam denominator floor. Large enough that coordinates with vanishing
  // gradients (e.g. logits of frames the transport plan has dropped) stop
  // moving instead of drifting at full step size.
  double adam_epsilon = 1e-3;

  void validate() const {
    require(epochs >= 1, "train: epochs must be >= 1");
    require(freeze_last_epochs >= 0 && freeze_last_epochs <= epochs,
            "train: freeze_last_epochs outside [0, epochs]");
    require(lr >= 0.0, "train: negative learning rate");
    require(warmup_steps >= 0, "train: negative warmup");
    require(batch_size >= 1, "train: batch_size must be >= 1");
    require(drop_threshold >= 0.0, "train: negative drop threshold");
  }
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double ter = 0.0;
  double peaky = 0.0;
  double f1 = 0.0;
  double idr = 0.0;
  double dropped_pct = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::vector<std::string> probe_ids;
  // alpha_snapshots[epoch][probe] = frame weights after that epoch.
  std::vector<std::vector<std::vector<double>>> alpha_snapshots;
};

struct TrainResult {
  EncoderParams params;
  TrainLog log;
};

inline MetricsReport evaluate(const EncoderParams& params,
                              const std::vector<SyntheticUtterance>& dataset,
                              TrainMode mode, double drop_threshold,
                              int tolerance_frames,
                              bool subtract_silence = false);

namespace detail {

// Per-utterance loss and gradient dispatch for one training mode.
struct ModeContext {
  TrainMode mode;
  // Precomputed per utterance for the oracle modes.
  std::vector<LabelSequence> oracle_targets;
  std::vector<std::vector<double>> oracle_betas;
  std::vector<PathSequence> viterbi_paths;
};

inline PosteriorMatrix softmax_posteriors(const Matrix& log_probs) {
  PosteriorMatrix pm;
  pm.p = Matrix(log_probs.rows, log_probs.cols);
  for (size_t i = 0; i < log_probs.v.size(); ++i)
    pm.p.v[i] = std::exp(log_probs.v[i]);
  return pm;
}

}  // namespace detail

// Deterministic single-threaded trainer. Adam with linear warmup and
// linear decay; during the final freeze epochs the score head receives no
// updates and every utterance keeps the frame weights captured at the
// freeze boundary, so the alignment is literally frozen while the
// classification path continues training.
inline TrainResult train(const TrainConfig& cfg,
                         const std::vector<SyntheticUtterance>& dataset,
                         const EncoderParams* ctc_checkpoint = nullptr) {
  cfg.validate();
  require(!dataset.empty(), "train: empty dataset");
  const int vocab = dataset[0].labels.vocab_size;
  const int feat_dim = dataset[0].features.cols;
  for (const auto& u : dataset) {
    require(u.labels.vocab_size == vocab && u.features.cols == feat_dim,
            "train: inconsistent dataset");
    require(u.labels.length() >= 1, "train: utterance without labels");
  }

  EncoderConfig ecfg{feat_dim, cfg.hidden, vocab};
  EncoderParams params = init_encoder(ecfg, cfg.seed);

  detail::ModeContext ctx;
  ctx.mode = cfg.mode;
  if (cfg.mode == TrainMode::kOttcOracleBeta ||
      cfg.mode == TrainMode::kSinglePathCe) {
    require(ctc_checkpoint != nullptr,
            "train: this mode requires a trained ctc checkpoint");
    ctc_checkpoint->validate();
    require(ctc_checkpoint->cfg.vocab_size == vocab &&
                ctc_checkpoint->cfg.feat_dim == feat_dim,
            "train: ctc checkpoint shape mismatch");
    for (const auto& u : dataset) {
      EncoderOutput out = encoder_forward(*ctc_checkpoint, u.features);
      Matrix lp = log_softmax_rows(out.logits);
      PathSequence path = ctc_viterbi(lp, u.labels);
      if (cfg.mode == TrainMode::kOttcOracleBeta) {
        auto [relabeled, beta] = beta_from_forced_alignment(path);
        ctx.oracle_targets.push_back(relabeled);
        ctx.oracle_betas.push_back(beta.values());
      } else {
        ctx.viterbi_paths.push_back(path);
      }
    }
  }

  // Fixed targets for the transport modes.
  std::vector<LabelSequence> aug_targets;
  if (cfg.mode == TrainMode::kOttc || cfg.mode == TrainMode::kOttcFixedAlpha) {
    for (const auto& u : dataset) {
      LabelSequence y_aug = augment_blanks(u.labels);
      require(u.frames() >= y_aug.length(),
              "train: utterance shorter than its augmented target");
      aug_targets.push_back(std::move(y_aug));
    }
  }

  const int n_utt = static_cast<int>(dataset.size());
  const int batches_per_epoch = (n_utt + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = static_cast<long>(cfg.epochs) * batches_per_epoch;

  std::vector<double> grad(params.total(), 0.0);
  std::vector<double> adam_m(params.total(), 0.0);
  std::vector<double> adam_v(params.total(), 0.0);
  long adam_t = 0;
  long step = 0;

  const int freeze_epoch = cfg.epochs - cfg.freeze_last_epochs;
  std::vector<std::vector<double>> frozen_alpha(n_utt);
  bool frozen = false;

  Rng shuffle_rng(cfg.seed ^ 0xa0761d6478bd642full);
  std::vector<int> order(n_utt);
  for (int i = 0; i < n_utt; ++i) order[i] = i;

  TrainLog log;
  const int probes = std::min(cfg.probe_utterances, n_utt);
  for (int i = 0; i < probes; ++i) log.probe_ids.push_back(dataset[i].id);

  // Returns loss; fills grad_logits/grad_scores for one utterance.
  auto utterance_pass = [&](int u, const EncoderOutput& out,
                            Matrix& grad_logits,
                            std::vector<double>& grad_scores) {
    const auto& utt = dataset[u];
    const int n = utt.frames();
    const Matrix lp = log_softmax_rows(out.logits);
    grad_scores.assign(n, 0.0);

    switch (cfg.mode) {
      case TrainMode::kCtc: {
        CtcGradients g = ctc_backward(lp, utt.labels);
        grad_logits = log_softmax_backward_rows(g.grad_log_posteriors, lp);
        return g.loss;
      }
      case TrainMode::kSinglePathCe: {
        const PathSequence& path = ctx.viterbi_paths[u];
        Matrix glp(n, lp.cols);
        double loss = 0.0;
        for (int t = 0; t < n; ++t) {
          loss -= lp.at(t, path.frames[t]) / n;
          glp.at(t, path.frames[t]) = -1.0 / n;
        }
        grad_logits = log_softmax_backward_rows(glp, lp);
        return loss;
      }
      default: {
        const LabelSequence& target = cfg.mode == TrainMode::kOttcOracleBeta
                                          ? ctx.oracle_targets[u]
                                          : aug_targets[u];
        const std::vector<double> beta_values =
            cfg.mode == TrainMode::kOttcOracleBeta
                ? ctx.oracle_betas[u]
                : std::vector<double>(target.length(),
                                      1.0 / target.length());
        StrictSimplexWeights beta{beta_values};
        PosteriorMatrix pm = detail::softmax_posteriors(lp);

        SimplexWeights alpha{std::vector<double>(n, 1.0 / n)};
        if (mode_learns_alpha(cfg.mode)) {
          if (frozen)
            alpha = SimplexWeights(frozen_alpha[u]);
          else
            alpha = SimplexWeights(softmax(out.scores));
        }

        // Loss and the classification-path gradient.
        const SparseCoupling coupling = compute_coupling(alpha, beta);
        Matrix glp(n, lp.cols);
        std::vector<double> entry_costs(coupling.entries.size());
        double loss = 0.0;
        for (size_t e = 0; e < coupling.entries.size(); ++e) {
          const CouplingEntry& ent = coupling.entries[e];
          const int label = target.tokens[ent.j - 1];
          entry_costs[e] = -std::max(lp.at(ent.i - 1, label), kLogProbFloor);
          loss += ent.mass * entry_costs[e];
          glp.at(ent.i - 1, label) -= ent.mass;
        }
        grad_logits = log_softmax_backward_rows(glp, lp);

        if (mode_learns_alpha(cfg.mode) && !frozen) {
          const std::vector<double> galpha =
              coupling_gradient(alpha, beta, entry_costs);
          grad_scores = softmax_backward(galpha, alpha.values());
        }
        return loss;
      }
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (mode_learns_alpha(cfg.mode) && !frozen && epoch == freeze_epoch &&
        cfg.freeze_last_epochs > 0) {
      for (int u = 0; u < n_utt; ++u) {
        EncoderOutput out = encoder_forward(params, dataset[u].features);
        frozen_alpha[u] = softmax(out.scores);
      }
      frozen = true;
    }

    // Deterministic Fisher-Yates shuffle.
    for (int i = n_utt - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    double epoch_loss = 0.0;
    for (int b = 0; b < batches_per_epoch; ++b) {
      const int begin = b * cfg.batch_size;
      const int end = std::min(begin + cfg.batch_size, n_utt);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (int idx = begin; idx < end; ++idx) {
        const int u = order[idx];
        EncoderCache cache;
        EncoderOutput out = encoder_forward(params, dataset[u].features, &cache);
        Matrix grad_logits;
        std::vector<double> grad_scores;
        batch_loss += utterance_pass(u, out, grad_logits, grad_scores);
        encoder_backward(params, dataset[u].features, cache, grad_logits,
                         grad_scores, grad);
      }
      const int count = end - begin;
      batch_loss /= count;
      for (double& gv : grad) gv /= count;
      epoch_loss += batch_loss;

      // Linear warmup then linear decay.
      double lr_scale = 1.0;
      if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
        lr_scale = static_cast<double>(step + 1) / cfg.warmup_steps;
      else if (total_steps > cfg.warmup_steps)
        lr_scale = static_cast<double>(total_steps - step) /
                   (total_steps - cfg.warmup_steps);
      const double lr_t = cfg.lr * lr_scale;

      ++adam_t;
      const size_t stop = (frozen || !mode_learns_alpha(cfg.mode))
                              ? params.score_head_begin()
                              : params.total();
      const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(adam_t));
      const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(adam_t));
      for (size_t i = 0; i < stop; ++i) {
        adam_m[i] = 0.9 * adam_m[i] + 0.1 * grad[i];
        adam_v[i] = 0.999 * adam_v[i] + 0.001 * grad[i] * grad[i];
        params.flat[i] -=
            lr_t * (adam_m[i] / bc1) / (std::sqrt(adam_v[i] / bc2) + cfg.adam_epsilon);
      }
      ++step;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / batches_per_epoch;
    MetricsReport report = evaluate(params, dataset, cfg.mode,
                                    cfg.drop_threshold, cfg.tolerance_frames);
    stats.ter = report.token_error_rate;
    stats.peaky = report.peaky_percent;
    stats.f1 = report.f1;
    stats.idr = report.idr;
    stats.dropped_pct = report.dropped_frame_percent;
    log.epochs.push_back(stats);

    std::vector<std::vector<double>> snapshot;
    for (int i = 0; i < probes; ++i) {
      if (frozen && mode_learns_alpha(cfg.mode)) {
        snapshot.push_back(frozen_alpha[i]);
      } else {
        EncoderOutput out = encoder_forward(params, dataset[i].features);
        snapshot.push_back(softmax(out.scores));
      }
    }
    log.alpha_snapshots.push_back(std::move(snapshot));
  }

  return {std::move(params), std::move(log)};
}

// Greedy decoding plus the alignment metrics against ground truth,
// averaged over utterances with equal weight.
inline MetricsReport evaluate(const EncoderParams& params,
                              const std::vector<SyntheticUtterance>& dataset,
                              TrainMode mode, double drop_threshold,
                              int tolerance_frames, bool subtract_silence) {
  require(!dataset.empty(), "evaluate: empty dataset");
  params.validate();
  MetricsReport total;
  const std::set<int> non_alphabet{params.cfg.vocab_size};
  for (const auto& utt : dataset) {
    EncoderOutput out = encoder_forward(params, utt.features);
    const Matrix lp = log_softmax_rows(out.logits);
    PosteriorMatrix pm = detail::softmax_posteriors(lp);
    auto [hyp, seg] = greedy_decode(pm);

    MetricsReport one;
    one.token_error_rate = token_error_rate(hyp, utt.labels);
    one.peaky_percent = peaky_percent(
        frame_argmax(pm), non_alphabet,
        subtract_silence ? utt.silence_fraction() : 0.0);
    one.f1 = boundary_f1(seg, utt.gt_segmentation, tolerance_frames, &one);
    one.idr = idr(seg, utt.gt_segmentation);
    if (mode_learns_alpha(mode)) {
      const std::vector<double> alpha = softmax(out.scores);
      const double cutoff = drop_threshold / utt.frames();
      int dropped = 0;
      for (double a : alpha)
        if (a < cutoff) ++dropped;
      one.dropped_frame_percent = 100.0 * dropped / utt.frames();
    }

    total.token_error_rate += one.token_error_rate;
    total.peaky_percent += one.peaky_percent;
    total.f1 += one.f1;
    total.idr += one.idr;
    total.dropped_frame_percent += one.dropped_frame_percent;
    total.true_positives += one.true_positives;
    total.false_positives += one.false_positives;
    total.false_negatives += one.false_negatives;
    total.matched_tokens += one.matched_tokens;
  }
  const double n = static_cast<double>(dataset.size());
  total.token_error_rate /= n;
  total.peaky_percent /= n;
  total.f1 /= n;
  total.idr /= n;
  total.dropped_frame_percent /= n;
  return total;
}

}  // namespace ottc

#endif  // OTTC_TOY_LAB_HPP_
