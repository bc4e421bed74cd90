// ottc/common.hpp
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

#ifndef OTTC_COMMON_HPP_
#define OTTC_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ottc {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Raised when a target sequence admits no valid path of the given length.
struct InfeasibleTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier-compensated sum. Exact whenever all partial sums are
// representable (e.g. dyadic inputs with bounded denominator).
inline double stable_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

// Running prefix sums with the same compensation; out[k] = sum of xs[0..k].
inline std::vector<double> prefix_sums(std::span<const double> xs) {
  std::vector<double> out(xs.size());
  double s = 0.0, c = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    double x = xs[k];
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
    out[k] = s + c;
  }
  return out;
}

// Dense row-major matrix of doubles. Used for features, logits and
// per-frame probability tables; kept deliberately minimal.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {v.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<double> row(int r) {
    return {v.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
};

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

constexpr double kProbFloor = 1e-30;
constexpr double kLogProbFloor = -69.07755278982137;  // log(1e-30)

inline double floored_log(double p) {
  return std::log(std::max(p, kProbFloor));
}

}  // namespace ottc

#endif  // OTTC_COMMON_HPP_
