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

#include "cotx/net_model.hpp"

#include <cstdint>
#include <vector>

namespace cotx {

/// One flat scheme applied over a subband: per extended AP power, activity and served UE.
struct Pattern {
  Vector power;                      // W/Hz
  std::vector<std::uint8_t> active;  // d_i
  std::vector<int> ue;               // u_i, kNoUe when serving nobody

  static Pattern silent(int extended_count);
  int size() const { return static_cast<int>(active.size()); }
  bool is_active(int e) const { return active[e] != 0; }
  /// Switches off APs that radiate nothing useful (no UE or zero power) and zeroes inactive entries.
  void normalize();

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.active == b.active && a.ue == b.ue && a.power == b.power;
  }
};

/// Patterns with their bandwidths (Hz); sum of beta equals the total band.
struct Allocation {
  std::vector<Pattern> patterns;
  std::vector<double> beta;
  Cooperation cooperation = Cooperation::noncoherent;

  double bandwidth() const;
  std::size_t active_count(double threshold = 0.0) const;
};

/// Throws Error naming the first violated invariant (power bounds, one active extended AP per physical AP, u in range).
void validate_pattern(const Pattern& pattern, const NetworkModel& model, Cooperation mode);
void validate_allocation(const Allocation& alloc, const NetworkModel& model, double rel_tol = 1e-9);

struct TrafficProfile {
  Vector lambda;              // packets/s per UE
  double packet_bits = 1e6;   // mean packet length D

  /// Same arrival rate at every servable UE; unservable UEs get zero traffic.
  static TrafficProfile uniform(const NetworkModel& model, double mean_rate, double packet_bits);
};

enum class UtilityKind { sojourn, sum_rate, log_sum_rate };

struct UtilitySpec {
  UtilityKind kind = UtilityKind::sojourn;
  double epsilon_grad = 1.0;  // bits/s
};

std::string_view to_string(UtilityKind kind);
UtilityKind utility_kind_from_string(std::string_view name);

/// Total power each physical AP radiates (a virtual AP drives both members).
Vector physical_power(const Pattern& pattern, const ExtendedApSet& exts);

/// Interference-plus-signal power received at every UE from all active APs (W/Hz).
Vector received_power(const Pattern& pattern, const NetworkModel& model);

/// log2(1 + h p / (n0 + interference from the other active APs)), summing the interferers directly.
double spectral_efficiency(const Pattern& pattern, int ext_ap, int ue, const NetworkModel& model,
                           Cooperation mode);

/// Per-Hz service rate of every UE under one pattern (bits/s/Hz).
Vector pattern_rates(const Pattern& pattern, const NetworkModel& model, Cooperation mode);

/// k x L matrix whose columns are pattern_rates of each pattern.
Matrix pattern_rate_matrix(const std::vector<Pattern>& patterns, const NetworkModel& model, Cooperation mode);

/// Rates in bits/s: sum over subbands of beta_l times the per-Hz pattern rates.
Vector allocation_rates(const Allocation& alloc, const NetworkModel& model);

/// Network utility; the sojourn kind is minus the traffic-weighted mean sojourn time and -inf when
/// any loaded queue is unstable.
double utility(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec);

/// Concave C1 extension of `utility` that continues linearly below the gradient floor.
/// Equals `utility` wherever every loaded UE is at least epsilon inside the stable region.
double smoothed_utility(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec);

/// Gradient of `smoothed_utility`; for sojourn this is the capped weight
/// (lambda_j / sum lambda) (1/D) / max(r_j/D - lambda_j, epsilon_grad/D)^2.
Vector utility_gradient(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec);

/// r_j / D > lambda_j for every UE with lambda_j > 0.
bool is_stable(const Vector& rates, const TrafficProfile& traffic);

}  // namespace cotx
