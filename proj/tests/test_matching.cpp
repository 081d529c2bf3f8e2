// Copyright 2026 The cotx Authors
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

#include "cotx/matching.hpp"
#include "cotx/types.hpp"

#include <doctest.h>

#include <random>

using namespace cotx;

namespace {

PairingGraph random_graph(std::mt19937_64& rng, int nv) {
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::bernoulli_distribution keep(0.5);
  PairingGraph g;
  g.vertex_count = nv;
  for (int a = 0; a < nv; ++a) {
    for (int b = a; b < nv; ++b) {
      if (keep(rng)) g.edges.push_back({a, b, w(rng)});
    }
  }
  return g;
}

}  // namespace

TEST_CASE("triangle with pair edges and self-loops") {
  PairingGraph g{3, {{0, 0, 3}, {1, 1, 3}, {2, 2, 3}, {0, 1, 5}, {1, 2, 5}, {0, 2, 5}}};
  // Three self-loops (9) beat one pair plus one loop (8).
  const Selection s = max_weight_selection(g);
  CHECK(s.weight == 9.0);
  CHECK(s.edges == std::vector<int>{0, 1, 2});
  CHECK(s.weight == brute_force_selection(g).weight);

  for (auto& e : g.edges) {
    if (e.a == e.b) e.weight = 2;
  }
  const Selection t = max_weight_selection(g);
  CHECK(t.weight == 7.0);
  CHECK(t.edges.size() == 2);
  CHECK(is_feasible_selection(g, t.edges));
}

TEST_CASE("negative weights give the empty selection") {
  PairingGraph g{2, {{0, 0, -1}, {1, 1, -2}, {0, 1, -0.5}}};
  const Selection s = max_weight_selection(g);
  CHECK(s.edges.empty());
  CHECK(s.weight == 0.0);
}

TEST_CASE("path picks one of two unit edges") {
  PairingGraph g{3, {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}, {0, 1, 1}, {1, 2, 1}}};
  const Selection s = max_weight_selection(g);
  CHECK(s.weight == 1.0);
  REQUIRE(s.edges.size() == 1);
  CHECK(s.edges[0] == 3);  // lexicographically first optimum
}

TEST_CASE("brute force base cases") {
  PairingGraph empty{0, {}};
  CHECK(brute_force_selection(empty).edges.empty());
  PairingGraph loop{1, {{0, 0, 2}}};
  const Selection s = brute_force_selection(loop);
  CHECK(s.weight == 2.0);
  CHECK(s.edges == std::vector<int>{0});
  PairingGraph big{30, {}};
  for (int i = 0; i < 21; ++i) big.edges.push_back({i, i, 1.0});
  CHECK_THROWS_AS(brute_force_selection(big), Error);
}

TEST_CASE("graph validation") {
  CHECK_THROWS_AS((PairingGraph{2, {{1, 0, 1}}}.validate()), Error);
  CHECK_THROWS_AS((PairingGraph{2, {{0, 2, 1}}}.validate()), Error);
  CHECK_THROWS_AS((PairingGraph{2, {{0, 1, 1}, {0, 1, 2}}}.validate()), Error);
}

TEST_CASE("matcher equals brute force on random 8-vertex graphs") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 60; ++t) {
    PairingGraph g = random_graph(rng, 8);
    while (g.edges.size() > 20) g.edges.pop_back();
    const Selection fast = max_weight_selection(g);
    const Selection slow = brute_force_selection(g);
    CHECK(is_feasible_selection(g, fast.edges));
    CHECK(fast.weight == slow.weight);
  }
}

TEST_CASE("blossom-heavy odd cycles") {
  // Pentagon plus a pendant: optimum needs blossom shrinking.
  PairingGraph g{6, {{0, 1, 0.9}, {1, 2, 0.9}, {2, 3, 0.9}, {3, 4, 0.9}, {0, 4, 0.9}, {4, 5, 1.0}}};
  CHECK(max_weight_selection(g).weight == brute_force_selection(g).weight);
}

TEST_CASE("matcher beats any other feasible subset") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const PairingGraph g = random_graph(rng, 7);
    const double best = max_weight_selection(g).weight;
    std::vector<int> greedy;
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      greedy.push_back(e);
      if (!is_feasible_selection(g, greedy)) greedy.pop_back();
    }
    CHECK(best >= selection_weight(g, greedy));
  }
}
