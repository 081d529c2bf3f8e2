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

#include "cotx/rate_engine.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace cotx {

/// One affine-utility subproblem: maximize sum_j c_j r_j over a single flat pattern.
struct FpProblem {
  const NetworkModel* model = nullptr;
  Cooperation mode = Cooperation::noncoherent;
  Vector weights;  // c_j >= 0, per UE
  bool optimize_power = true;  // false pins every active AP at pmax

  FpProblem(const NetworkModel& m, Cooperation coop, Vector c, bool power = true);
};

/// Iterate of the quadratic-transform ascent. Inactive APs carry p = gamma = y = 0 and no UE.
struct FpState {
  Pattern pattern;
  Vector gamma;
  Vector y;
  double objective = 0.0;  // P7a value, in bits/s/Hz weighted by c
};

struct FpOptions {
  double tol = 1e-6;
  int max_iters = 200;
  bool local_search = true;     // exact move search once the ascent stalls
  double search_trigger = 1e-4;  // relative per-cycle gain below which the search runs
};

struct FpResult {
  Pattern pattern;
  double objective = 0.0;     // final P7a value
  double affine_value = 0.0;  // sum_j c_j r_j of the returned (normalized) pattern
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // P7a after every full cycle, starting with the initial state
};

/// Observer called after every individual update with its name and the new P7a value.
using FpObserver = std::function<void(std::string_view step, double objective)>;

/// All physical APs active alone at pmax, each serving its best c-weighted-gain UE, auxiliaries
/// from their closed forms.
FpState init_state(const FpProblem& problem);

/// Starts from an existing feasible pattern (powers clipped to pmax, p = pmax when power is fixed).
FpState init_state(const FpProblem& problem, const Pattern& start);

/// P7a objective of a state.
double p7a_objective(const FpProblem& problem, const FpState& state);

/// Sets gamma to the SINR of each active link and y to its quadratic-transform optimum, which
/// makes P7a equal to the affine utility of the current pattern.
void refresh_auxiliaries(const FpProblem& problem, FpState& state);

/// Exact maximizer of P7a over gamma with y, p, u, d fixed. Reduces to the link SINR whenever y
/// is consistent with the current powers.
void update_gamma(const FpProblem& problem, FpState& state);
void update_y(const FpProblem& problem, FpState& state);
void update_p(const FpProblem& problem, FpState& state);
void update_u(const FpProblem& problem, FpState& state);

/// Re-selects the active extended APs with a maximum-weight matching over the pairing graph.
/// Returns false when the matched selection would lower P7a and the previous one was kept.
bool update_d(const FpProblem& problem, FpState& state);

/// Best single structural move (switch one extended AP on, off, or to another UE) scored on the
/// exact affine utility; applies it with fresh auxiliaries and returns true when it gains.
bool local_search(const FpProblem& problem, FpState& state);

/// One (u_i) choice per extended AP: t(i -> j) for every UE j it can reach.
std::vector<std::pair<int, double>> utility_gains(const FpProblem& problem, const FpState& state, int ext_ap);

FpResult solve_affine(const FpProblem& problem, const FpOptions& options = {}, const FpObserver& observer = {});
FpResult solve_affine(const FpProblem& problem, const Pattern& start, const FpOptions& options = {},
                      const FpObserver& observer = {});

}  // namespace cotx
