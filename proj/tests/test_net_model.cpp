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

#include "cotx/net_model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace cotx;

TEST_CASE("generate_topology") {
  const Topology t = generate_topology(128, 384, 2400, 2400, 7);
  CHECK(t.ap_count() == 128);
  CHECK(t.ue_count() == 384);
  CHECK((t.aps.array() >= 0).all());
  CHECK((t.aps.array() <= 2400).all());
  CHECK((t.ues.array() <= 2400).all());

  const Topology one = generate_topology(1, 1, 10, 20, 3);
  CHECK(one.aps(0, 0) <= 10);
  CHECK(one.aps(1, 0) <= 20);
  CHECK(one.ues(0, 0) >= 0);

  const Topology again = generate_topology(128, 384, 2400, 2400, 7);
  CHECK(again.aps == t.aps);
  CHECK(again.ues == t.ues);

  CHECK_THROWS_AS(generate_topology(1, 1, 0, 10, 1), Error);
  CHECK_THROWS_AS(generate_topology(0, 1, 10, 10, 1), Error);
}

TEST_CASE("compute_gains") {
  ChannelParams params;
  Topology t;
  t.width = t.height = 5000;
  t.aps.resize(2, 1);
  t.aps << 0, 0;
  t.ues.resize(2, 4);
  t.ues.col(0) << 1000, 0;
  t.ues.col(1) << 0, 1000;
  t.ues.col(2) << 2000, 0;
  t.ues.col(3) << 0, 0;
  const GainMatrix g = compute_gains(t, params);
  CHECK(g(0, 0) == doctest::Approx(std::pow(10.0, -12.81)).epsilon(1e-12));
  CHECK(g(0, 0) == g(0, 1));
  CHECK(g(0, 2) / g(0, 0) == doctest::Approx(std::pow(10.0, -37.6 * std::log10(2.0) / 10)).epsilon(1e-12));
  // Zero distance is clamped to 10 m.
  CHECK(g(0, 3) == doctest::Approx(std::pow(10.0, -(128.1 + 37.6 * std::log10(0.01)) / 10)).epsilon(1e-12));

  params.shadowing_sigma_db = 8;
  t.seed = 5;
  const GainMatrix s1 = compute_gains(t, params);
  const GainMatrix s2 = compute_gains(t, params);
  CHECK(s1 == s2);
  CHECK(s1 != g);
}

TEST_CASE("build_neighborhoods") {
  ChannelParams params;
  const double t = params.xi * params.n0 / params.pmax;
  SUBCASE("threshold is inclusive") {
    GainMatrix g(2, 1);
    g << t, 0.999 * t;
    const auto a = build_neighborhoods(g, params);
    CHECK(a[0] == std::vector<int>{0});
  }
  SUBCASE("all gains zero") {
    const auto a = build_neighborhoods(GainMatrix::Zero(3, 2), params);
    CHECK(a[0].empty());
    CHECK(a[1].empty());
  }
  SUBCASE("truncation keeps the strongest B, ties to the lower index") {
    GainMatrix g(6, 1);
    g << 2 * t, 5 * t, 3 * t, 3 * t, 9 * t, 3 * t;
    const auto a = build_neighborhoods(g, params);
    CHECK(a[0] == std::vector<int>{1, 2, 3, 4});
  }
}

TEST_CASE("enumerate_extended on the three-AP example") {
  ChannelParams params;
  const double t = params.xi * params.n0 / params.pmax;
  GainMatrix g(3, 2);
  g << 10 * t, 0.1 * t, 10 * t, 10 * t, 0.1 * t, 10 * t;
  const NetworkModel m = build_model(g, params);
  const auto& ex = m.exts;
  REQUIRE(ex.size() == 5);
  CHECK(ex.members[3] == std::array<int, 2>{0, 1});
  CHECK(ex.members[4] == std::array<int, 2>{1, 2});
  CHECK(ex.involvement[1] == std::vector<int>{1, 3, 4});
  CHECK(ex.involvement[0] == std::vector<int>{0, 3});
  CHECK(ex.find_virtual(1, 0) == 3);
  CHECK(ex.find_virtual(0, 2) == -1);
  CHECK(ex.conflicts(3, 4));
  CHECK_FALSE(ex.conflicts(0, 2));
}

TEST_CASE("effective gains of a pair") {
  ChannelParams params;
  GainMatrix g(2, 1);
  g << 1e-10, 1e-10;
  NetworkModel m = build_model(g, params);
  CHECK(m.exts.h_coherent(2, 0) == doctest::Approx(4e-10));
  CHECK(m.exts.h_noncoherent(2, 0) == doctest::Approx(2e-10));

  GainMatrix g2(2, 2);
  g2 << 1e-10, 1e-10, 0.0, 1e-10;
  m = build_model(g2, params);
  const int v = m.exts.find_virtual(0, 1);
  REQUIRE(v >= 0);
  CHECK(m.exts.h_coherent(v, 0) == m.exts.h_noncoherent(v, 0));
}

TEST_CASE("extended set invariants on random instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NetworkModel m = testing::desk_model(16, 48, seed);
    const auto& ex = m.exts;
    const ChannelParams& p = m.params;
    CHECK(ex.virtual_count() <= p.b_cap * (p.b_cap - 1) / 2 * m.ue_count());
    for (int j = 0; j < m.ue_count(); ++j) {
      int physical = 0;
      for (int e : ex.neighborhoods[j]) {
        CHECK(ex.g(e, j) * p.pmax / p.n0 >= p.xi);
        physical += !ex.is_virtual(e);
      }
      CHECK(physical <= p.b_cap);
    }
    for (int e = ex.physical_count; e < ex.size(); ++e) {
      const auto [a, b] = ex.members[e];
      CHECK(a < b);
      for (int i = 0; i < ex.physical_count; ++i) {
        const bool in = std::binary_search(ex.involvement[i].begin(), ex.involvement[i].end(), e);
        CHECK(in == (i == a || i == b));
      }
      for (int j = 0; j < m.ue_count(); ++j) {
        CHECK(ex.h_coherent(e, j) - ex.h_noncoherent(e, j) ==
              doctest::Approx(2 * std::sqrt(m.gains(a, j) * m.gains(b, j))).epsilon(1e-12));
        CHECK(ex.h_coherent(e, j) >= ex.h_noncoherent(e, j));
      }
      // A pair exists only if both members share some neighborhood.
      bool shared = false;
      for (const auto& hood : m.physical_neighborhoods) {
        shared |= std::binary_search(hood.begin(), hood.end(), a) && std::binary_search(hood.begin(), hood.end(), b);
      }
      CHECK(shared);
    }
    const NetworkModel again = testing::desk_model(16, 48, seed);
    CHECK(again.gains == m.gains);
    CHECK(again.exts.members == ex.members);
    CHECK(again.exts.neighborhoods == ex.neighborhoods);
  }
}

TEST_CASE("topology json round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "cotx_net_model_test";
  std::filesystem::create_directories(dir);
  const Topology t = generate_topology(5, 7, 300, 200, 11);
  save_topology(t, dir / "topo.json");
  const Topology back = load_topology(dir / "topo.json");
  CHECK(back.aps == t.aps);
  CHECK(back.ues == t.ues);
  CHECK(back.width == t.width);
  CHECK(back.seed == t.seed);

  std::ofstream(dir / "bad.json") << R"({"area":[10,10],"aps":[[1,2]],"ues":[[20,1]]})";
  CHECK_THROWS_AS(load_topology(dir / "bad.json"), Error);
  std::ofstream(dir / "trunc.json") << R"({"area":[10,10],"aps":[[1,2]],)";
  CHECK_THROWS_AS(load_topology(dir / "trunc.json"), Error);
}
