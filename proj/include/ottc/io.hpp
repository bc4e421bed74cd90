// ottc/io.hpp
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
// Serialization: coupling JSON (1-based indices, entries sorted by (i, j)),
// sequence and dataset JSON Lines, versioned checkpoints, metric reports,
// alignment exports and the CSV training log. All writers are
// deterministic: identical values produce identical bytes.

#ifndef OTTC_IO_HPP_
#define OTTC_IO_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ottc/coupling.hpp"
#include "ottc/ctc.hpp"
#include "ottc/encoder.hpp"
#include "ottc/labels.hpp"
#include "ottc/metrics.hpp"
#include "ottc/ottc_loss.hpp"
#include "ottc/sotd.hpp"
#include "ottc/toy_lab.hpp"

namespace ottc {

using json = nlohmann::json;

struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write file: " + path);
  out << content;
  if (!out) throw FileError("write failed: " + path);
}

inline json parse_json(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("malformed JSON in " + origin);
  return j;
}

// --- coupling -------------------------------------------------------------

inline json coupling_to_json(const SparseCoupling& g) {
  json entries = json::array();
  for (const CouplingEntry& e : g.entries)
    entries.push_back(json::array({e.i, e.j, e.mass}));
  return json{{"n", g.n}, {"m", g.m}, {"entries", std::move(entries)}};
}

inline SparseCoupling coupling_from_json(const json& j) {
  try {
    SparseCoupling g;
    g.n = j.at("n").get<int>();
    g.m = j.at("m").get<int>();
    for (const auto& e : j.at("entries")) {
      require(e.is_array() && e.size() == 3, "coupling entry must be [i,j,mass]");
      g.entries.push_back(
          {e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    return g;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("bad coupling JSON: ") + ex.what());
  }
}

// --- sequences ------------------------------------------------------------

struct NamedSequence {
  std::string id;
  VectorSequence sequence;
};

inline std::vector<NamedSequence> read_sequences_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open file: " + path);
  std::vector<NamedSequence> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_json(line, path + ":" + std::to_string(lineno));
    try {
      NamedSequence rec;
      rec.id = j.at("id").get<std::string>();
      for (const auto& v : j.at("vectors"))
        rec.sequence.vectors.push_back(v.get<std::vector<double>>());
      rec.sequence.validate();
      out.push_back(std::move(rec));
    } catch (const json::exception& ex) {
      throw FormatError("bad sequence record in " + path + ":" +
                        std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

inline void write_sequences_jsonl(const std::string& path,
                                  const std::vector<NamedSequence>& records) {
  std::ostringstream ss;
  for (const auto& rec : records) {
    json j{{"id", rec.id}, {"vectors", rec.sequence.vectors}};
    ss << j.dump() << "\n";
  }
  write_file(path, ss.str());
}

// --- datasets ---------------------------------------------------------------

inline json utterance_to_json(const SyntheticUtterance& utt) {
  json features = json::array();
  for (int t = 0; t < utt.features.rows; ++t) {
    json row = json::array();
    for (int c = 0; c < utt.features.cols; ++c)
      row.push_back(utt.features.at(t, c));
    features.push_back(std::move(row));
  }
  json spans = json::array();
  for (const Span& s : utt.gt_segmentation.spans)
    spans.push_back(json::array({s.label, s.start, s.end}));
  return json{{"id", utt.id},
              {"features", std::move(features)},
              {"labels", utt.labels.tokens},
              {"vocab_size", utt.labels.vocab_size},
              {"gt_segmentation", std::move(spans)},
              {"silence_frames", utt.silence_frames}};
}

inline SyntheticUtterance utterance_from_json(const json& j,
                                              const std::string& origin) {
  try {
    SyntheticUtterance utt;
    utt.id = j.at("id").get<std::string>();
    const auto& features = j.at("features");
    require(!features.empty(), "utterance has no frames");
    const int n = static_cast<int>(features.size());
    const int d = static_cast<int>(features[0].size());
    utt.features = Matrix(n, d);
    for (int t = 0; t < n; ++t) {
      require(static_cast<int>(features[t].size()) == d,
              "ragged feature rows");
      for (int c = 0; c < d; ++c)
        utt.features.at(t, c) = features[t][c].get<double>();
    }
    utt.labels.tokens = j.at("labels").get<std::vector<int>>();
    utt.labels.vocab_size = j.at("vocab_size").get<int>();
    utt.labels.validate();
    for (const auto& s : j.at("gt_segmentation")) {
      require(s.is_array() && s.size() == 3, "span must be [label,start,end]");
      utt.gt_segmentation.spans.push_back(
          {s[0].get<int>(), s[1].get<int>(), s[2].get<int>()});
    }
    utt.gt_segmentation.validate(n);
    utt.silence_frames = j.at("silence_frames").get<std::vector<int>>();
    return utt;
  } catch (const json::exception& ex) {
    throw FormatError("bad utterance record in " + origin + ": " + ex.what());
  }
}

inline void write_dataset_jsonl(const std::string& path,
                                const std::vector<SyntheticUtterance>& data) {
  std::ostringstream ss;
  for (const auto& utt : data) ss << utterance_to_json(utt).dump() << "\n";
  write_file(path, ss.str());
}

inline std::vector<SyntheticUtterance> read_dataset_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open file: " + path);
  std::vector<SyntheticUtterance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string origin = path + ":" + std::to_string(lineno);
    out.push_back(utterance_from_json(parse_json(line, origin), origin));
  }
  if (out.empty()) throw FormatError("empty dataset: " + path);
  return out;
}

// --- checkpoints ------------------------------------------------------------

constexpr int kCheckpointVersion = 1;

inline json checkpoint_to_json(const EncoderParams& params) {
  params.validate();
  const EncoderConfig& c = params.cfg;
  auto tensor = [&](size_t begin, std::vector<int> shape) {
    size_t count = 1;
    for (int s : shape) count *= static_cast<size_t>(s);
    json data = json::array();
    for (size_t k = 0; k < count; ++k) data.push_back(params.flat[begin + k]);
    return json{{"shape", shape}, {"data", std::move(data)}};
  };
  json tensors;
  tensors["trunk_w1"] = tensor(params.trunk_w1(), {c.hidden, c.feat_dim});
  tensors["trunk_b1"] = tensor(params.trunk_b1(), {c.hidden});
  tensors["trunk_w2"] = tensor(params.trunk_w2(), {c.hidden, c.hidden});
  tensors["trunk_b2"] = tensor(params.trunk_b2(), {c.hidden});
  tensors["logits_w"] = tensor(params.logits_w(), {c.classes(), c.hidden});
  tensors["logits_b"] = tensor(params.logits_b(), {c.classes()});
  tensors["score_w1"] = tensor(params.score_w1(), {c.score_hidden(), c.hidden});
  tensors["score_b1"] = tensor(params.score_b1(), {c.score_hidden()});
  tensors["score_w2"] = tensor(params.score_w2(), {c.score_hidden()});
  tensors["score_b2"] = tensor(params.score_b2(), {1});
  return json{{"format", "ottc_checkpoint"},
              {"version", kCheckpointVersion},
              {"config",
               {{"feat_dim", c.feat_dim},
                {"hidden", c.hidden},
                {"vocab_size", c.vocab_size}}},
              {"tensors", std::move(tensors)}};
}

inline EncoderParams checkpoint_from_json(const json& j) {
  try {
    require(j.at("format").get<std::string>() == "ottc_checkpoint",
            "not an ottc checkpoint");
    require(j.at("version").get<int>() == kCheckpointVersion,
            "unsupported checkpoint version");
    EncoderConfig cfg;
    cfg.feat_dim = j.at("config").at("feat_dim").get<int>();
    cfg.hidden = j.at("config").at("hidden").get<int>();
    cfg.vocab_size = j.at("config").at("vocab_size").get<int>();
    EncoderParams params;
    params.cfg = cfg;
    params.flat.assign(params.total(), 0.0);
    const json& tensors = j.at("tensors");
    auto load = [&](const char* name, size_t begin, size_t count) {
      const json& t = tensors.at(name);
      const auto data = t.at("data").get<std::vector<double>>();
      require(data.size() == count, std::string("tensor size mismatch: ") + name);
      std::copy(data.begin(), data.end(), params.flat.begin() + begin);
    };
    const EncoderConfig& c = cfg;
    load("trunk_w1", params.trunk_w1(), static_cast<size_t>(c.hidden) * c.feat_dim);
    load("trunk_b1", params.trunk_b1(), c.hidden);
    load("trunk_w2", params.trunk_w2(), static_cast<size_t>(c.hidden) * c.hidden);
    load("trunk_b2", params.trunk_b2(), c.hidden);
    load("logits_w", params.logits_w(), static_cast<size_t>(c.classes()) * c.hidden);
    load("logits_b", params.logits_b(), c.classes());
    load("score_w1", params.score_w1(), static_cast<size_t>(c.score_hidden()) * c.hidden);
    load("score_b1", params.score_b1(), c.score_hidden());
    load("score_w2", params.score_w2(), c.score_hidden());
    load("score_b2", params.score_b2(), 1);
    params.validate();
    return params;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("bad checkpoint JSON: ") + ex.what());
  }
}

inline void save_checkpoint(const std::string& path, const EncoderParams& p) {
  write_file(path, checkpoint_to_json(p).dump(2) + "\n");
}

inline EncoderParams load_checkpoint(const std::string& path) {
  return checkpoint_from_json(parse_json(read_file(path), path));
}

// --- reports and exports ----------------------------------------------------

inline json metrics_to_json(const MetricsReport& r) {
  return json{{"peaky_percent", r.peaky_percent},
              {"f1", r.f1},
              {"idr", r.idr},
              {"token_error_rate", r.token_error_rate},
              {"dropped_frame_percent", r.dropped_frame_percent},
              {"counts",
               {{"true_positives", r.true_positives},
                {"false_positives", r.false_positives},
                {"false_negatives", r.false_negatives},
                {"matched_tokens", r.matched_tokens}}}};
}

// Per-utterance alignment export: frame weights, coupling, frame argmax
// and the frames whose weight fell below the drop threshold (0-based).
inline json alignment_export_json(const std::string& id,
                                  const SimplexWeights& alpha,
                                  const SparseCoupling& coupling,
                                  const std::vector<int>& argmax_ids,
                                  double drop_threshold) {
  json entries = json::array();
  for (const CouplingEntry& e : coupling.entries)
    entries.push_back(json::array({e.i, e.j, e.mass}));
  return json{{"id", id},
              {"alpha", alpha.values()},
              {"coupling", std::move(entries)},
              {"frame_argmax", argmax_ids},
              {"dropped_frames", dropped_frames(alpha, drop_threshold)}};
}

inline json forced_alignment_json(const std::string& id,
                                  const PathSequence& path) {
  json runs = json::array();
  int i = 0;
  while (i < path.length()) {
    int j = i;
    while (j < path.length() && path.frames[j] == path.frames[i]) ++j;
    runs.push_back(json::array({path.frames[i], i, j}));
    i = j;
  }
  return json{{"id", id}, {"path", path.frames}, {"runs", std::move(runs)}};
}

// --- training log -----------------------------------------------------------

inline std::string training_log_csv(const TrainLog& log) {
  std::ostringstream ss;
  ss << "epoch,loss,ter,peaky,f1,idr,dropped_pct\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const EpochStats& e : log.epochs)
    ss << e.epoch << "," << num(e.loss) << "," << num(e.ter) << ","
       << num(e.peaky) << "," << num(e.f1) << "," << num(e.idr) << ","
       << num(e.dropped_pct) << "\n";
  return ss.str();
}

// Companion JSONL with per-epoch frame-weight snapshots for the probe
// utterances; powers alignment-evolution plots.
inline std::string alpha_snapshots_jsonl(const TrainLog& log) {
  std::ostringstream ss;
  for (size_t epoch = 0; epoch < log.alpha_snapshots.size(); ++epoch)
    for (size_t p = 0; p < log.alpha_snapshots[epoch].size(); ++p) {
      json j{{"epoch", epoch},
             {"id", log.probe_ids[p]},
             {"alpha", log.alpha_snapshots[epoch][p]}};
      ss << j.dump() << "\n";
    }
  return ss.str();
}

}  // namespace ottc

#endif  // OTTC_IO_HPP_
