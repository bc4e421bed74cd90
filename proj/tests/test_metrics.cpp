// tests/test_metrics.cpp
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

#include "ottc/metrics.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <vector>

#include "ottc/rng.hpp"

using namespace ottc;

namespace {

Segmentation random_segmentation(Rng& rng, int vocab, int max_tokens,
                                 int frame_budget) {
  Segmentation seg;
  int cursor = 0;
  const int tokens = rng.uniform_int(1, max_tokens);
  for (int t = 0; t < tokens; ++t) {
    cursor += rng.uniform_int(0, 2);
    const int len = rng.uniform_int(1, 4);
    if (cursor + len > frame_budget) break;
    seg.spans.push_back({rng.uniform_int(0, vocab - 1), cursor, cursor + len});
    cursor += len;
  }
  if (seg.spans.empty()) seg.spans.push_back({0, 0, 1});
  return seg;
}

}  // namespace

TEST_CASE("peaky_percent examples") {
  CHECK(peaky_percent({0, 2, 2, 1}, {2}, 0.0) == 50.0);
  CHECK(peaky_percent({0, 1, 0, 1}, {2}, 0.0) == 0.0);
  CHECK(peaky_percent({2, 2, 0, 0}, {2}, 0.25) == 25.0);
  CHECK(peaky_percent({0, 1}, {}, 0.0) == 0.0);
  // Subtraction clamps at zero.
  CHECK(peaky_percent({0, 1, 0, 1}, {2}, 0.5) == 0.0);
  CHECK_THROWS_AS(peaky_percent({}, {2}, 0.0), std::invalid_argument);
}

TEST_CASE("boundary_f1 examples") {
  SECTION("exact match scores one") {
    Segmentation seg{{{0, 0, 3}, {1, 3, 5}}};
    CHECK(boundary_f1(seg, seg, 0) == 1.0);
  }
  SECTION("empty prediction scores zero") {
    Segmentation ref{{{0, 0, 3}}};
    CHECK(boundary_f1({}, ref, 2) == 0.0);
  }
  SECTION("tolerance window decides") {
    Segmentation pred{{{0, 3, 6}}};
    Segmentation ref{{{0, 0, 6}}};
    CHECK(boundary_f1(pred, ref, 2) == 0.0);
    CHECK(boundary_f1(pred, ref, 3) == 1.0);
  }
  SECTION("label mismatches are false positives and negatives") {
    Segmentation pred{{{0, 0, 2}, {1, 2, 4}}};
    Segmentation ref{{{0, 0, 2}, {2, 2, 4}}};
    MetricsReport counts;
    const double f1 = boundary_f1(pred, ref, 0, &counts);
    CHECK(counts.true_positives == 1);
    CHECK(counts.false_positives == 1);
    CHECK(counts.false_negatives == 1);
    CHECK(f1 == Catch::Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("idr examples") {
  SECTION("exact match") {
    Segmentation seg{{{0, 0, 4}, {1, 6, 9}}};
    CHECK(idr(seg, seg) == 1.0);
  }
  SECTION("half overlap") {
    Segmentation pred{{{0, 0, 4}}};
    Segmentation ref{{{0, 0, 8}}};
    CHECK(idr(pred, ref) == 0.5);
  }
  SECTION("disjoint spans") {
    Segmentation pred{{{0, 0, 2}}};
    Segmentation ref{{{0, 4, 8}}};
    CHECK(idr(pred, ref) == 0.0);
  }
  SECTION("empty reference is an error") {
    Segmentation pred{{{0, 0, 2}}};
    CHECK_THROWS_AS(idr(pred, {}), std::invalid_argument);
  }
}

TEST_CASE("token_error_rate examples") {
  LabelSequence ab{{0, 1}, 3};
  LabelSequence ac{{0, 2}, 3};
  LabelSequence empty{{}, 3};
  CHECK(token_error_rate(ab, ab) == 0.0);
  CHECK(token_error_rate(ab, ac) == 0.5);
  CHECK(token_error_rate(empty, ab) == 1.0);
  CHECK_THROWS_AS(token_error_rate(ab, empty), std::invalid_argument);
}

TEST_CASE("identical random segmentations score one on both metrics") {
  Rng rng(401);
  for (int iter = 0; iter < 200; ++iter) {
    Segmentation seg = random_segmentation(rng, 5, 8, 40);
    CHECK(boundary_f1(seg, seg, 0) == 1.0);
    CHECK(idr(seg, seg) == 1.0);
  }
}

TEST_CASE("levenshtein satisfies the triangle inequality") {
  Rng rng(409);
  for (int iter = 0; iter < 500; ++iter) {
    auto draw = [&] {
      std::vector<int> s(rng.uniform_int(0, 8));
      for (int& v : s) v = rng.uniform_int(0, 3);
      return s;
    };
    const auto a = draw(), b = draw(), c = draw();
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    CHECK(levenshtein(a, b) == levenshtein(b, a));
  }
}

TEST_CASE("metrics are deterministic") {
  Rng rng(419);
  Segmentation pred = random_segmentation(rng, 4, 6, 30);
  Segmentation ref = random_segmentation(rng, 4, 6, 30);
  const double f1_a = boundary_f1(pred, ref, 2);
  const double f1_b = boundary_f1(pred, ref, 2);
  CHECK(f1_a == f1_b);
  const double idr_a = idr(pred, ref);
  const double idr_b = idr(pred, ref);
  CHECK(idr_a == idr_b);
}

TEST_CASE("match_tokens pairs tokens along one optimal alignment") {
  // hyp ABB vs ref AB: one pairing of A and one of B, deterministic.
  const auto pairs = match_tokens({0, 1, 1}, {0, 1});
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int, int>{0, 0});
  CHECK(pairs[1].second == 1);
}
