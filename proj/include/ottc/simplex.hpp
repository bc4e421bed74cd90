// ottc/simplex.hpp
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

#ifndef OTTC_SIMPLEX_HPP_
#define OTTC_SIMPLEX_HPP_

#include <cmath>
#include <span>
#include <vector>

#include "ottc/common.hpp"

namespace ottc {

// Probability weights over n bins. Components must be in [0, 1] and sum to
// one within 1e-9 at construction; stored values are renormalized so the
// compensated sum is 1 to machine precision. Zero components are allowed.
class SimplexWeights {
 public:
  explicit SimplexWeights(std::vector<double> values)
      : values_(std::move(values)) {
    require(!values_.empty(), "simplex weights: empty vector");
    for (double v : values_)
      require(v >= 0.0 && v <= 1.0 && std::isfinite(v),
              "simplex weights: component outside [0, 1]");
    double s = stable_sum(values_);
    require(std::abs(s - 1.0) <= 1e-9, "simplex weights: sum not 1 within 1e-9");
    if (s != 1.0)
      for (double& v : values_) v /= s;
  }

  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  double operator[](int i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Simplex weights with every component strictly positive (>= 1e-12).
class StrictSimplexWeights {
 public:
  explicit StrictSimplexWeights(std::vector<double> values)
      : inner_(std::move(values)) {
    for (double v : inner_.values())
      require(v >= 1e-12, "strict simplex weights: component below 1e-12");
  }

  int size() const { return inner_.size(); }
  const std::vector<double>& values() const { return inner_.values(); }
  double operator[](int i) const { return inner_[i]; }
  const SimplexWeights& as_simplex() const { return inner_; }

 private:
  SimplexWeights inner_;
};

// Uniform label weights 1/q, ..., 1/q.
inline StrictSimplexWeights uniform_weights(int q) {
  require(q >= 1, "uniform weights: q must be >= 1");
  return StrictSimplexWeights(
      std::vector<double>(q, 1.0 / static_cast<double>(q)));
}

// Numerically stable softmax (max subtraction). Strictly positive output.
inline std::vector<double> softmax(std::span<const double> scores) {
  require(!scores.empty(), "softmax: empty input");
  double mx = scores[0];
  for (double s : scores) {
    require(std::isfinite(s), "softmax: non-finite score");
    mx = std::max(mx, s);
  }
  std::vector<double> out(scores.size());
  double z = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

// Backward pass of softmax: given g = dL/d(softmax(s)) and p = softmax(s),
// returns dL/ds. Invariant under constant shifts of g.
inline std::vector<double> softmax_backward(std::span<const double> grad_out,
                                            std::span<const double> probs) {
  double dot = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) dot += grad_out[i] * probs[i];
  std::vector<double> out(probs.size());
  for (size_t i = 0; i < probs.size(); ++i)
    out[i] = probs[i] * (grad_out[i] - dot);
  return out;
}

}  // namespace ottc

#endif  // OTTC_SIMPLEX_HPP_
