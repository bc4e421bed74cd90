// ottc/rng.hpp
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

#ifndef OTTC_RNG_HPP_
#define OTTC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ottc/common.hpp"

namespace ottc {

// Deterministic RNG. All sampling goes through hand-rolled transforms so
// outputs do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi].
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  // Standard normal via Marsaglia's polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Interior point of the simplex, via normalized exponentials.
  std::vector<double> dirichlet(int n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = uniform();
      w[i] = -std::log(std::max(u, 1e-300));
      s += w[i];
    }
    for (double& x : w) x /= s;
    return w;
  }

  // Random composition of `grid` into n positive integer parts, returned as
  // weights k_i / grid. All values are dyadic when grid is a power of two,
  // which makes downstream prefix sums exact.
  std::vector<double> dyadic_simplex(int n, int grid) {
    std::vector<int> parts(n, 1);
    for (int r = 0; r < grid - n; ++r) parts[uniform_int(0, n - 1)] += 1;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
      w[i] = static_cast<double>(parts[i]) / static_cast<double>(grid);
    return w;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ottc

#endif  // OTTC_RNG_HPP_
