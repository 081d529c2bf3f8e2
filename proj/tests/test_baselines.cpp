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


#include "cotx/baselines.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cotx;
using cotx::testing::desk_model;

namespace {

NetworkModel single_link(double snr) {
  ChannelParams params;
  GainMatrix gains(1, 1);
  gains << snr * params.n0 / params.pmax;
  return build_model(gains, params);
}

}  // namespace

TEST_CASE("scenario names round-trip") {
  for (ScenarioKind kind : kScenarioChain) CHECK(scenario_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(scenario_from_string("comp"), Error);
  CHECK(scenario_cooperation(ScenarioKind::power_mgmt) == Cooperation::none);
  CHECK(scenario_cooperation(ScenarioKind::coherent_comp) == Cooperation::coherent);
}

TEST_CASE("max-rsrp on one AP and one UE is the initial allocation") {
  const NetworkModel m = single_link(100.0);
  const Allocation a = max_rsrp_allocation(m);
  const Allocation b = initial_allocation(m, Cooperation::none);
  REQUIRE(a.patterns.size() == 1);
  CHECK(a.patterns == b.patterns);
  CHECK(a.beta == b.beta);
}

TEST_CASE("max-rsrp time-shares each AP equally among its UEs") {
  const NetworkModel m = desk_model(8, 30, 4);
  const Allocation a = max_rsrp_allocation(m);
  validate_allocation(a, m);
  CHECK(a.bandwidth() == doctest::Approx(m.params.bandwidth_w).epsilon(1e-12));
  CHECK(a.patterns.size() <= static_cast<std::size_t>(m.ue_count()));

  std::vector<int> server(m.ue_count(), -1);
  std::vector<int> load(m.ap_count(), 0);
  for (int j = 0; j < m.ue_count(); ++j) {
    for (int i : m.physical_neighborhoods[j]) {
      if (server[j] < 0 || m.gains(i, j) > m.gains(server[j], j)) server[j] = i;
    }
    if (server[j] >= 0) ++load[server[j]];
  }
  // Every serving AP is on in every subband, so each UE sees the same SINR throughout.
  Pattern all = Pattern::silent(m.exts.size());
  for (int j = 0; j < m.ue_count(); ++j) {
    if (server[j] < 0) continue;
    all.active[server[j]] = 1;
    all.ue[server[j]] = j;
    all.power[server[j]] = m.params.pmax;
  }
  const Vector rates = allocation_rates(a, m);
  for (int j = 0; j < m.ue_count(); ++j) {
    if (server[j] < 0) {
      CHECK(rates[j] == 0.0);
      continue;
    }
    all.ue[server[j]] = j;
    const double se = spectral_efficiency(all, server[j], j, m, Cooperation::none);
    CHECK(rates[j] == doctest::Approx(m.params.bandwidth_w * se / load[server[j]]).epsilon(1e-12));
  }
}

TEST_CASE("richer scenarios warm-started from poorer ones never lose utility") {
  for (std::uint64_t seed : {11u, 12u}) {
    const NetworkModel m = desk_model(8, 24, seed);
    const TrafficProfile t = TrafficProfile::uniform(m, 5.0, 1e6);
    PursuitOptions base;
    base.fp.max_iters = 40;
    base.max_outer = 30;
    const UtilitySpec spec;
    const ScenarioResult rsrp = run_scenario(ScenarioKind::max_rsrp, m, t, spec, base);
    const ScenarioResult ua = run_scenario(ScenarioKind::spectrum_ua, m, t, spec, base, &rsrp.allocation);
    const ScenarioResult pm = run_scenario(ScenarioKind::power_mgmt, m, t, spec, base, &ua.allocation);
    const ScenarioResult nc = run_scenario(ScenarioKind::noncoherent_comp, m, t, spec, base, &pm.allocation);
    const ScenarioResult co = run_scenario(ScenarioKind::coherent_comp, m, t, spec, base, &nc.allocation);
    CHECK(ua.utility >= rsrp.utility);
    CHECK(pm.utility >= ua.utility);
    CHECK(nc.utility >= pm.utility);
    CHECK(co.utility >= nc.utility);
    CHECK(co.stable);
    for (const Pattern& p : ua.allocation.patterns) {
      for (int e = 0; e < p.size(); ++e) {
        if (p.is_active(e)) CHECK(p.power[e] == m.params.pmax);
      }
    }
    for (const Pattern& p : pm.allocation.patterns) {
      for (int e = m.exts.physical_count; e < p.size(); ++e) CHECK_FALSE(p.is_active(e));
    }
  }
}

TEST_CASE("cutoff of a single link is its service rate") {
  const NetworkModel m = single_link(100.0);
  const double capacity = m.params.bandwidth_w * std::log2(101.0) / 1e6;  // packets/s
  PursuitOptions base;
  for (ScenarioKind kind : {ScenarioKind::max_rsrp, ScenarioKind::power_mgmt}) {
    const SweepResult s = cutoff_sweep(kind, m, {}, {0.0, 200.0, 400.0, 800.0}, base);
    CHECK(s.cutoff <= capacity);
    CHECK(s.cutoff >= capacity - 0.1);
    CHECK(s.grid[0].result.stable);  // zero traffic
    CHECK(s.grid[2].result.stable);
    CHECK_FALSE(s.grid[3].result.stable);
  }
}

TEST_CASE("cutoff sweep edge cases") {
  const NetworkModel m = single_link(100.0);
  PursuitOptions base;
  CHECK(cutoff_sweep(ScenarioKind::max_rsrp, m, {}, {900.0, 1000.0}, base).cutoff == 0.0);
  CHECK_THROWS_AS(cutoff_sweep(ScenarioKind::max_rsrp, m, {}, {}, base), Error);
  CHECK_THROWS_AS(cutoff_sweep(ScenarioKind::max_rsrp, m, {}, {5.0, 5.0}, base), Error);
  CHECK_THROWS_AS(cutoff_sweep(ScenarioKind::max_rsrp, m, {}, {-1.0}, base), Error);
  const SweepResult a = cutoff_sweep(ScenarioKind::max_rsrp, m, {}, {100.0, 1000.0}, base);
  CHECK_THROWS_AS(cutoff_sweep(ScenarioKind::power_mgmt, m, {}, {100.0, 900.0}, base, {}, &a), Error);
}

TEST_CASE("chained cutoffs follow the scenario chain") {
  const NetworkModel m = desk_model(8, 24, 21);
  PursuitOptions base;
  base.fp.max_iters = 40;
  base.max_outer = 40;
  const std::vector<double> grid = {5.0, 20.0, 40.0, 60.0};
  std::vector<SweepResult> sweeps;
  sweeps.reserve(kScenarioChain.size());
  for (ScenarioKind kind : kScenarioChain) {
    sweeps.push_back(cutoff_sweep(kind, m, {}, grid, base, {}, sweeps.empty() ? nullptr : &sweeps.back()));
  }
  for (std::size_t s = 1; s < sweeps.size(); ++s) {
    CHECK(sweeps[s].cutoff >= sweeps[s - 1].cutoff);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (sweeps[s - 1].grid[i].result.stable) {
        CHECK(sweeps[s].grid[i].result.stable);
        CHECK(sweeps[s].grid[i].result.utility >= sweeps[s - 1].grid[i].result.utility);
      }
    }
  }
}
