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

#include "cotx/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace cotx {

/// AP and UE positions in meters inside a width x height rectangle.
struct Topology {
  double width = 0.0;
  double height = 0.0;
  Points aps;  // 2 x n
  Points ues;  // 2 x k
  std::uint64_t seed = 0;

  int ap_count() const { return static_cast<int>(aps.cols()); }
  int ue_count() const { return static_cast<int>(ues.cols()); }
};

/// Macro-cell path loss PL(dB) = intercept + slope * log10(d_km), distance clamped below.
struct PathLossModel {
  double intercept_db = 128.1;
  double slope_db = 37.6;
  double min_distance_m = 10.0;

  double loss_db(double distance_m) const;
};

struct ChannelParams {
  double pmax = 1e-9;          // W/Hz, per-link PSD ceiling
  double n0 = 3.981071705534972e-21;  // W/Hz, -174 dBm/Hz
  double bandwidth_w = 100e6;  // Hz
  PathLossModel pathloss;
  double shadowing_sigma_db = 0.0;
  double xi = 4.0;  // linear SNR threshold for neighborhoods
  int b_cap = 4;    // max physical neighborhood size

  /// Defaults with pmax derived from a total transmit power spread flat over the band.
  static ChannelParams from_total_power(double tx_power_dbm, double bandwidth_hz,
                                        double noise_dbm_per_hz = -174.0);
  void validate() const;
};

/// Dense n x k matrix of linear link power gains g(i -> j).
using GainMatrix = Matrix;

/// Physical plus virtual (paired) APs with neighborhoods and effective gains.
///
/// Extended ids 0..n-1 are the physical APs; ids n.. are virtual pairs (i1, i2), i1 < i2,
/// in lexicographic order. `g` is the interference gain of each extended AP
/// (g1 + g2 for a pair); `h_*` are the gains seen by a served UE.
struct ExtendedApSet {
  int physical_count = 0;
  int ue_count = 0;
  std::vector<std::array<int, 2>> members;      // {i, -1} or {i1, i2}
  std::vector<std::vector<int>> neighborhoods;  // A_j over extended ids, ascending
  std::vector<std::vector<int>> candidates;     // per extended AP: {j : e in A_j}, ascending
  std::vector<std::vector<int>> involvement;    // N_i per physical AP, ascending
  Matrix g;
  Matrix h_noncoherent;
  Matrix h_coherent;

  int size() const { return static_cast<int>(members.size()); }
  int virtual_count() const { return size() - physical_count; }
  bool is_virtual(int e) const { return e >= physical_count; }
  /// Extended id of the pair (i1, i2) in either order, or -1.
  int find_virtual(int i1, int i2) const;
  const Matrix& h(Cooperation mode) const {
    return mode == Cooperation::coherent ? h_coherent : h_noncoherent;
  }
  /// True when two extended APs share a physical AP.
  bool conflicts(int a, int b) const;
};

/// Everything the solvers need about one network instance.
struct NetworkModel {
  ChannelParams params;
  GainMatrix gains;
  std::vector<std::vector<int>> physical_neighborhoods;
  ExtendedApSet exts;

  int ap_count() const { return static_cast<int>(gains.rows()); }
  int ue_count() const { return static_cast<int>(gains.cols()); }
  /// UEs no physical AP can reach alone. They get no traffic so that every cooperation mode
  /// faces the same load.
  std::vector<int> unservable_ues() const;
};

Topology generate_topology(int n, int k, double width, double height, std::uint64_t seed);

GainMatrix compute_gains(const Topology& topology, const ChannelParams& params);

/// A_j = {i : g(i->j) pmax / n0 >= xi}, keeping the b_cap largest gains (ties: lower index).
std::vector<std::vector<int>> build_neighborhoods(const GainMatrix& gains, const ChannelParams& params);

/// Enumerates virtual pairs sharing a neighborhood and re-derives A_j over extended ids.
ExtendedApSet enumerate_extended(const std::vector<std::vector<int>>& neighborhoods,
                                 const GainMatrix& gains, const ChannelParams& params);

NetworkModel build_model(const GainMatrix& gains, const ChannelParams& params);
NetworkModel build_model(const Topology& topology, const ChannelParams& params);

void save_topology(const Topology& topology, const std::filesystem::path& path);
Topology load_topology(const std::filesystem::path& path);

}  // namespace cotx
