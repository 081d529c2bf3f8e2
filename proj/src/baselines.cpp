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

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

namespace cotx {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::max_rsrp:
      return "max-rsrp";
    case ScenarioKind::spectrum_ua:
      return "spectrum-ua";
    case ScenarioKind::power_mgmt:
      return "power-mgmt";
    case ScenarioKind::noncoherent_comp:
      return "noncoherent-comp";
    case ScenarioKind::coherent_comp:
      return "coherent-comp";
  }
  return "?";
}

ScenarioKind scenario_from_string(std::string_view name) {
  for (ScenarioKind kind : kScenarioChain) {
    if (to_string(kind) == name) return kind;
  }
  throw Error("unknown scenario '" + std::string(name) + "'");
}

Cooperation scenario_cooperation(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::noncoherent_comp:
      return Cooperation::noncoherent;
    case ScenarioKind::coherent_comp:
      return Cooperation::coherent;
    default:
      return Cooperation::none;
  }
}

namespace {

// q / n with small non-negative integers; compared exactly.
struct Fraction {
  long long q;
  long long n;
  bool operator<(const Fraction& o) const { return q * o.n < o.q * n; }
  bool operator==(const Fraction& o) const { return q * o.n == o.q * n; }
};

}  // namespace

Allocation max_rsrp_allocation(const NetworkModel& model) {
  const int n = model.ap_count();
  const double pmax = model.params.pmax;
  const double w = model.params.bandwidth_w;
  std::vector<std::vector<int>> served(n);
  for (int j = 0; j < model.ue_count(); ++j) {
    const auto& hood = model.physical_neighborhoods[j];
    if (hood.empty()) continue;
    int best = hood.front();
    for (int i : hood) {
      if (model.gains(i, j) > model.gains(best, j)) best = i;
    }
    served[best].push_back(j);
  }

  std::vector<Fraction> cuts;
  for (int i = 0; i < n; ++i) {
    const long long na = static_cast<long long>(served[i].size());
    for (long long q = 0; q <= na; ++q) cuts.push_back({q, std::max(na, 1LL)});
  }
  cuts.push_back({0, 1});
  cuts.push_back({1, 1});
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Allocation alloc;
  alloc.cooperation = Cooperation::none;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Fraction& from = cuts[s];
    const Fraction& to = cuts[s + 1];
    Pattern p = Pattern::silent(model.exts.size());
    for (int i = 0; i < n; ++i) {
      const long long na = static_cast<long long>(served[i].size());
      if (na == 0) continue;
      const long long slot = from.q * na / from.n;  // this segment lies inside slot [slot, slot + 1) / na
      p.active[i] = 1;
      p.ue[i] = served[i][slot];
      p.power[i] = pmax;
    }
    alloc.patterns.push_back(std::move(p));
    alloc.beta.push_back(w * static_cast<double>(to.q * from.n - from.q * to.n) /
                         static_cast<double>(from.n * to.n));
  }
  return alloc;
}

ScenarioResult run_scenario(ScenarioKind kind, const NetworkModel& model, const TrafficProfile& traffic,
                            const UtilitySpec& spec, const PursuitOptions& base, const Allocation* warm) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult out;
  if (kind == ScenarioKind::max_rsrp) {
    out.allocation = max_rsrp_allocation(model);
    out.rates = allocation_rates(out.allocation, model);
    out.utility = utility(out.rates, traffic, spec);
    out.pre_prune_utility = out.utility;
  } else {
    PursuitOptions options = base;
    options.mode = scenario_cooperation(kind);
    options.optimize_power = kind != ScenarioKind::spectrum_ua;
    const PursuitResult r = pursue(model, traffic, spec, options, warm);
    out.allocation = r.allocation;
    out.rates = r.rates;
    out.utility = r.utility;
    out.pre_prune_utility = r.pre_prune_utility;
    out.outer_iterations = r.outer_iterations;
    out.fp_iterations = r.fp_iterations;
  }
  out.stable = is_stable(out.rates, traffic);
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SweepResult cutoff_sweep(ScenarioKind kind, const NetworkModel& model, const UtilitySpec& spec,
                         const std::vector<double>& grid, const PursuitOptions& base, const SweepOptions& options,
                         const SweepResult* previous) {
  if (grid.empty()) throw Error("cutoff sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error("cutoff sweep: grid must be finite, non-negative and strictly ascending");
    }
  }
  if (!(options.resolution > 0.0)) throw Error("cutoff sweep: resolution must be positive");
  if (previous != nullptr) {
    if (previous->grid.size() != grid.size()) throw Error("cutoff sweep: previous sweep used another grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (previous->grid[i].lambda != grid[i]) throw Error("cutoff sweep: previous sweep used another grid");
    }
  }

  SweepResult out;
  out.grid.reserve(grid.size());  // `own` below points into it
  out.kind = kind;
  auto run = [&](double lambda, const Allocation* warm) {
    ScenarioResult r;
    if (lambda == 0.0) {
      // No traffic: every queue is trivially stable and the sojourn utility is empty.
      r.allocation = warm != nullptr ? *warm : max_rsrp_allocation(model);
      r.rates = allocation_rates(r.allocation, model);
      r.stable = true;
      return r;
    }
    ++out.evaluations;
    const TrafficProfile traffic = TrafficProfile::uniform(model, lambda, options.packet_bits);
    return run_scenario(kind, model, traffic, spec, base, warm);
  };

  // A stable previous allocation at the same rate is the warm start that guarantees ordering;
  // past it, continue from this scenario's own last stable allocation.
  const Allocation* own = nullptr;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Allocation* warm = own;
    if (previous != nullptr && (previous->grid[i].result.stable || own == nullptr)) {
      warm = &previous->grid[i].result.allocation;
    }
    out.grid.push_back({grid[i], run(grid[i], warm)});
    if (out.grid.back().result.stable) own = &out.grid.back().result.allocation;
  }

  int top = -1;
  for (int i = static_cast<int>(grid.size()) - 1; i >= 0 && top < 0; --i) {
    if (out.grid[i].result.stable) top = i;
  }
  double lo = top >= 0 ? grid[top] : 0.0;
  Allocation lo_alloc = top >= 0 ? out.grid[top].result.allocation : Allocation{};
  const bool bounded = top + 1 < static_cast<int>(grid.size());
  const double hi_grid = bounded ? grid[top + 1] : lo;
  if (previous != nullptr && previous->cutoff > lo && (!bounded || previous->cutoff < hi_grid)) {
    const ScenarioResult r = run(previous->cutoff, &previous->cutoff_allocation);
    if (r.stable) {
      lo = previous->cutoff;
      lo_alloc = r.allocation;
    }
  }
  if (lo > 0.0 && bounded) {
    double hi = hi_grid;
    while (hi - lo > options.resolution) {
      const double mid = 0.5 * (lo + hi);
      const ScenarioResult r = run(mid, &lo_alloc);
      if (r.stable) {
        lo = mid;
        lo_alloc = r.allocation;
      } else {
        hi = mid;
      }
    }
  }
  out.cutoff = lo;
  if (lo > 0.0) out.cutoff_allocation = std::move(lo_alloc);
  return out;
}

}  // namespace cotx
