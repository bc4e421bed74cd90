// tests/test_sotd.cpp
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

#include "ottc/sotd.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "ottc/rng.hpp"
#include "test_support.hpp"

using namespace ottc;

namespace {

VectorSequence random_sequence(Rng& rng, int len, int dim) {
  VectorSequence s;
  for (int i = 0; i < len; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    s.vectors.push_back(std::move(v));
  }
  return s;
}

VectorSequence seq1d(std::initializer_list<double> xs) {
  VectorSequence s;
  for (double x : xs) s.vectors.push_back({x});
  return s;
}

}  // namespace

TEST_CASE("uniform_weights examples") {
  CHECK(uniform_weights(1).values() == std::vector<double>{1.0});
  CHECK(uniform_weights(4).values() ==
        std::vector<double>{0.25, 0.25, 0.25, 0.25});
  auto u3 = uniform_weights(3);
  CHECK(std::abs(stable_sum(u3.values()) - 1.0) <= 1e-15);
  for (int i = 0; i < 3; ++i)
    CHECK(u3[i] == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK_THROWS_AS(uniform_weights(0), std::invalid_argument);
}

TEST_CASE("eval_cost examples") {
  CHECK(eval_cost(CostKind::kSquaredEuclidean, std::vector<double>{1.0, 2.0},
                  std::vector<double>{1.0, 2.0}) == 0.0);
  CHECK(eval_cost(CostKind::kSquaredEuclidean, std::vector<double>{0.0},
                  std::vector<double>{3.0}) == 9.0);
  CHECK(eval_cost(CostKind::kEuclidean, std::vector<double>{0.0},
                  std::vector<double>{3.0}) == 3.0);
  CHECK(eval_cost(CostKind::kCrossEntropy, std::vector<double>{0.5, 0.5},
                  std::vector<double>{0.0, 1.0}) ==
        Catch::Approx(std::log(2.0)).margin(1e-15));
  // Separation: zero exactly when probability 1 sits on the hot index.
  CHECK(eval_cost(CostKind::kCrossEntropy, std::vector<double>{0.0, 1.0},
                  std::vector<double>{0.0, 1.0}) == 0.0);
}

TEST_CASE("eval_cost rejects invalid inputs") {
  CHECK_THROWS_AS(eval_cost(CostKind::kSquaredEuclidean,
                            std::vector<double>{1.0},
                            std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_cost(CostKind::kCrossEntropy,
                            std::vector<double>{0.7, 0.7},
                            std::vector<double>{0.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(eval_cost(CostKind::kCrossEntropy,
                            std::vector<double>{0.5, 0.5},
                            std::vector<double>{0.5, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("sotd_oracle hand-computed cases") {
  SECTION("identical sequences have zero distance and identity map") {
    Rng rng(5);
    VectorSequence x = random_sequence(rng, 4, 2);
    auto res = sotd_oracle(x, x, 1, CostKind::kEuclidean, uniform_weights(4));
    CHECK(res.distance == 0.0);
    CHECK(res.assignment == std::vector<int>{0, 1, 2, 3});
  }
  SECTION("3 vs 2 with an exact zero via frame dropping") {
    auto res = sotd_oracle(seq1d({0.0, 1.0, 5.0}), seq1d({0.0, 5.0}), 1,
                           CostKind::kSquaredEuclidean, uniform_weights(2));
    CHECK(res.distance == 0.0);
    CHECK(res.assignment == std::vector<int>{0, 2});
  }
  SECTION("3 vs 2 with strictly positive cost") {
    auto res = sotd_oracle(seq1d({0.0, 1.0, 5.0}), seq1d({0.5, 5.0}), 1,
                           CostKind::kSquaredEuclidean, uniform_weights(2));
    CHECK(res.distance == Catch::Approx(0.125).margin(1e-12));
  }
}

TEST_CASE("sotd_oracle symmetry with a metric cost") {
  Rng rng(17);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng.uniform_int(1, 6);
    const int m = rng.uniform_int(1, 6);
    const int d = rng.uniform_int(1, 3);
    VectorSequence x = random_sequence(rng, n, d);
    VectorSequence y = random_sequence(rng, m, d);
    auto beta = uniform_weights(std::min(n, m));
    const double xy =
        sotd_oracle(x, y, 1, CostKind::kEuclidean, beta).distance;
    const double yx =
        sotd_oracle(y, x, 1, CostKind::kEuclidean, beta).distance;
    REQUIRE(std::abs(xy - yx) <= 1e-9);
  }
}

TEST_CASE("triangle inequality holds on most random triples") {
  // The distance is zero whenever the longer sequence prunes down to the
  // shorter one, and that relation is not transitive, so the triangle
  // inequality is not a theorem here. It does hold on the large majority
  // of generic triples; the frame-dropping counterexample below is the
  // canonical failure shape.
  auto dist = [](const VectorSequence& a, const VectorSequence& b) {
    return sotd_oracle(a, b, 1, CostKind::kEuclidean,
                       uniform_weights(std::min(a.length(), b.length())))
        .distance;
  };

  SECTION("frame-dropping chains break transitivity of zero distance") {
    auto x = seq1d({0.0, 100.0});
    auto y = seq1d({0.0});
    auto z = seq1d({0.0, -100.0});
    CHECK(dist(x, y) == 0.0);
    CHECK(dist(y, z) == 0.0);
    CHECK(dist(x, z) == Catch::Approx(50.0).margin(1e-9));
  }

  SECTION("violation rate on random triples stays small") {
    Rng rng(19);
    int violations = 0;
    for (int iter = 0; iter < 1000; ++iter) {
      const int d = rng.uniform_int(1, 3);
      VectorSequence x = random_sequence(rng, rng.uniform_int(1, 5), d);
      VectorSequence y = random_sequence(rng, rng.uniform_int(1, 5), d);
      VectorSequence z = random_sequence(rng, rng.uniform_int(1, 5), d);
      if (dist(x, z) > dist(x, y) + dist(y, z) + 1e-9) ++violations;
    }
    INFO("violations: " << violations << "/1000");
    CHECK(violations > 0);
    CHECK(violations <= 120);
  }
}

TEST_CASE("no sampled alpha beats the oracle") {
  Rng rng(23);
  int samples = 0;
  while (samples < 2000) {
    const int n = rng.uniform_int(1, 5);
    const int m = rng.uniform_int(1, 5);
    VectorSequence x = random_sequence(rng, n, 2);
    VectorSequence y = random_sequence(rng, m, 2);
    const int p = std::max(n, m), q = std::min(n, m);
    StrictSimplexWeights beta(rng.dirichlet(q));
    const double oracle =
        sotd_oracle(x, y, 1, CostKind::kSquaredEuclidean, beta).distance;
    const bool x_long = n >= m;
    for (int rep = 0; rep < 20; ++rep, ++samples) {
      SimplexWeights alpha(rng.dirichlet(p));
      SparseCoupling g = compute_coupling(alpha, beta);
      double obj = 0.0;
      for (const auto& e : g.entries) {
        const auto& xi = x_long ? x.vectors[e.i - 1] : x.vectors[e.j - 1];
        const auto& yj = x_long ? y.vectors[e.j - 1] : y.vectors[e.i - 1];
        obj += e.mass * eval_cost(CostKind::kSquaredEuclidean, xi, yj);
      }
      REQUIRE(obj >= oracle - 1e-9);
    }
  }
}

TEST_CASE("sotd_distance minimizer") {
  SECTION("identical sequences reach exactly zero via the beta start") {
    Rng rng(29);
    for (int iter = 0; iter < 20; ++iter) {
      VectorSequence x = random_sequence(rng, rng.uniform_int(1, 6), 2);
      auto res = sotd_distance(x, x, 1, CostKind::kEuclidean,
                               uniform_beta_policy());
      CHECK(res.distance == 0.0);
      CHECK(res.converged);
    }
  }
  SECTION("single-element sequences evaluate the cost exactly") {
    auto res = sotd_distance(seq1d({2.0}), seq1d({5.5}), 1,
                             CostKind::kSquaredEuclidean,
                             uniform_beta_policy());
    CHECK(res.distance == 12.25);
  }
  SECTION("3 vs 2 instance approaches the oracle") {
    auto res = sotd_distance(seq1d({0.0, 1.0, 5.0}), seq1d({0.5, 5.0}), 1,
                             CostKind::kSquaredEuclidean,
                             uniform_beta_policy());
    CHECK(res.distance == Catch::Approx(0.125).margin(1e-3));
    CHECK(res.converged);
  }
  SECTION("distance recomputes from the returned coupling") {
    Rng rng(31);
    VectorSequence x = random_sequence(rng, 5, 2);
    VectorSequence y = random_sequence(rng, 3, 2);
    auto res =
        sotd_distance(x, y, 1, CostKind::kSquaredEuclidean,
                      uniform_beta_policy());
    double obj = 0.0;
    for (const auto& e : res.coupling.entries)
      obj += e.mass * eval_cost(CostKind::kSquaredEuclidean,
                                x.vectors[e.i - 1], y.vectors[e.j - 1]);
    CHECK(res.distance == Catch::Approx(obj).margin(1e-9));
  }
}

TEST_CASE("minimizer reaches the oracle on most small instances") {
  Rng rng(37);
  int hits = 0;
  const int total = 200;
  for (int iter = 0; iter < total; ++iter) {
    const int n = rng.uniform_int(1, 5);
    const int m = rng.uniform_int(1, 5);
    const int d = rng.uniform_int(1, 3);
    VectorSequence x = random_sequence(rng, n, d);
    VectorSequence y = random_sequence(rng, m, d);
    auto res =
        sotd_distance(x, y, 1, CostKind::kSquaredEuclidean,
                      uniform_beta_policy());
    auto oracle = sotd_oracle(x, y, 1, CostKind::kSquaredEuclidean,
                              uniform_weights(std::min(n, m)));
    REQUIRE(res.distance >= oracle.distance - 1e-9);
    if (res.distance <= oracle.distance + 1e-3) ++hits;
  }
  INFO("minimizer hits: " << hits << "/" << total);
  REQUIRE(hits >= 190);
}

TEST_CASE("aggregate removes consecutive duplicates and is idempotent") {
  auto a = seq1d({1.0, 1.0, 2.0});
  CHECK(aggregate(a) == seq1d({1.0, 2.0}));
  auto b = seq1d({1.0, 2.0, 1.0});
  CHECK(aggregate(b) == b);
  auto c = seq1d({1.0, 1.0, 2.0, 2.0, 1.0});
  CHECK(aggregate(c) == seq1d({1.0, 2.0, 1.0}));
  Rng rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    VectorSequence s = random_sequence(rng, rng.uniform_int(1, 10), 1);
    CHECK(aggregate(aggregate(s)) == aggregate(s));
  }
}

TEST_CASE("prune removes low-weight elements") {
  auto x = seq1d({1.0, 2.0, 3.0});
  CHECK(prune(x, SimplexWeights({0.5, 0.0, 0.5}), 0.0) ==
        seq1d({1.0, 3.0}));
  CHECK(prune(x, SimplexWeights(std::vector<double>(3, 1.0 / 3)), 0.0) == x);
  auto y = seq1d({1.0, 2.0});
  CHECK(prune(y, SimplexWeights({0.001, 0.999}), 0.01) == seq1d({2.0}));
  CHECK_THROWS_AS(prune(y, SimplexWeights({1.0}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("check_non_separation examples") {
  auto x = seq1d({1.0, 7.0, 2.0});
  auto y = seq1d({1.0, 2.0});
  CHECK(check_non_separation(x, y, SimplexWeights({0.5, 0.0, 0.5})));
  CHECK_FALSE(check_non_separation(
      x, y, SimplexWeights(std::vector<double>(3, 1.0 / 3))));
  auto xx = seq1d({1.0, 1.0, 2.0});
  CHECK(check_non_separation(xx, y, SimplexWeights({0.25, 0.25, 0.5})));
}

TEST_CASE("non-separation in both directions") {
  Rng rng(43);
  for (int iter = 0; iter < 50; ++iter) {
    // Build x by repeating y's elements and inserting junk frames.
    const int m = rng.uniform_int(1, 4);
    VectorSequence y;
    for (int j = 0; j < m; ++j)
      y.vectors.push_back({static_cast<double>(rng.uniform_int(0, 3))});
    VectorSequence x;
    MonotonicAlignment a;
    for (int j = 0; j < m; ++j) {
      const int copies = rng.uniform_int(1, 3);
      for (int c = 0; c < copies; ++c) {
        x.vectors.push_back(y.vectors[j]);
        a.pairs.push_back({static_cast<int>(x.vectors.size()), j + 1});
      }
      if (rng.uniform() < 0.4) x.vectors.push_back({9.5});  // junk frame
    }
    a.n = x.length();
    a.m = m;
    StrictSimplexWeights beta(rng.dyadic_simplex(m, 1 << 10));
    SimplexWeights alpha_star = alignment_to_weights(a, beta);

    CHECK(check_non_separation(x, y, alpha_star));
    const double zero =
        sotd_oracle(x, y, 1, CostKind::kSquaredEuclidean, beta).distance;
    CHECK(zero <= 1e-12);

    // Mutate one target to a vector absent from x: distance must be > 0.
    VectorSequence y_bad = y;
    y_bad.vectors[rng.uniform_int(0, m - 1)] = {42.0};
    const double pos =
        sotd_oracle(x, y_bad, 1, CostKind::kSquaredEuclidean, beta).distance;
    CHECK(pos > 1e-6);
  }
}

TEST_CASE("fixed beta policy validates length") {
  auto policy = fixed_beta_policy(uniform_weights(3));
  auto x = seq1d({0.0, 1.0, 2.0, 3.0});
  auto y = seq1d({0.0, 1.0, 2.0});
  CHECK_NOTHROW(sotd_distance(x, y, 1, CostKind::kSquaredEuclidean, policy));
  auto y2 = seq1d({0.0, 1.0});
  CHECK_THROWS_AS(
      sotd_distance(x, y2, 1, CostKind::kSquaredEuclidean, policy),
      std::invalid_argument);
}
