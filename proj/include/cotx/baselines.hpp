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


#pragma once

#include "cotx/pursuit.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace cotx {

enum class ScenarioKind { max_rsrp, spectrum_ua, power_mgmt, noncoherent_comp, coherent_comp };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(std::string_view name);

/// Scenarios ordered by the degrees of freedom they unlock; each one can warm-start the next.
inline constexpr std::array<ScenarioKind, 5> kScenarioChain = {
    ScenarioKind::max_rsrp, ScenarioKind::spectrum_ua, ScenarioKind::power_mgmt, ScenarioKind::noncoherent_comp,
    ScenarioKind::coherent_comp};

/// Cooperation mode a scenario evaluates its patterns under.
Cooperation scenario_cooperation(ScenarioKind kind);

/// Every servable UE on its strongest AP, all serving APs at pmax. An AP with several UEs
/// round-robins them in equal time shares, realized as subbands cut at q W / n_a.
Allocation max_rsrp_allocation(const NetworkModel& model);

struct ScenarioResult {
  Allocation allocation;
  Vector rates;
  double utility = 0.0;
  double pre_prune_utility = 0.0;
  bool stable = false;
  int outer_iterations = 0;
  int fp_iterations = 0;
  double wall_s = 0.0;
};

/// `base` supplies tolerances and seed; the scenario overrides mode and power freedom.
/// `warm` is ignored for max-rsrp.
ScenarioResult run_scenario(ScenarioKind kind, const NetworkModel& model, const TrafficProfile& traffic,
                            const UtilitySpec& spec, const PursuitOptions& base, const Allocation* warm = nullptr);

struct SweepPoint {
  double lambda = 0.0;
  ScenarioResult result;
};

struct SweepResult {
  ScenarioKind kind = ScenarioKind::max_rsrp;
  std::vector<SweepPoint> grid;  // one entry per grid value, ascending
  double cutoff = 0.0;           // largest mean arrival rate found stable
  Allocation cutoff_allocation;  // empty when cutoff is 0
  int evaluations = 0;           // scenario runs including refinement
};

struct SweepOptions {
  double resolution = 0.1;  // packets/s
  double packet_bits = 1e6;
};

/// Largest stable uniform arrival rate, first on the grid, then by bisection. With `previous`
/// (the preceding scenario's sweep over the same grid) every run is warm-started from the
/// previous scenario's allocation at the same rate, and the previous cutoff seeds the bracket.
SweepResult cutoff_sweep(ScenarioKind kind, const NetworkModel& model, const UtilitySpec& spec,
                         const std::vector<double>& grid, const PursuitOptions& base, const SweepOptions& options = {},
                         const SweepResult* previous = nullptr);

}  // namespace cotx
