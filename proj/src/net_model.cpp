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

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

namespace cotx {

std::string_view to_string(Cooperation mode) {
  switch (mode) {
    case Cooperation::none:
      return "none";
    case Cooperation::noncoherent:
      return "noncoherent";
    case Cooperation::coherent:
      return "coherent";
  }
  return "none";
}

Cooperation cooperation_from_string(std::string_view name) {
  if (name == "none") return Cooperation::none;
  if (name == "noncoherent") return Cooperation::noncoherent;
  if (name == "coherent") return Cooperation::coherent;
  throw Error("unknown cooperation mode '" + std::string(name) + "'");
}

double PathLossModel::loss_db(double distance_m) const {
  const double d_km = std::max(distance_m, min_distance_m) / 1000.0;
  return intercept_db + slope_db * std::log10(d_km);
}

ChannelParams ChannelParams::from_total_power(double tx_power_dbm, double bandwidth_hz,
                                              double noise_dbm_per_hz) {
  ChannelParams params;
  params.bandwidth_w = bandwidth_hz;
  params.pmax = dbm_to_watts(tx_power_dbm) / bandwidth_hz;
  params.n0 = dbm_to_watts(noise_dbm_per_hz);
  return params;
}

void ChannelParams::validate() const {
  if (!(pmax > 0.0)) throw Error("channel: pmax must be positive");
  if (!(n0 > 0.0)) throw Error("channel: n0 must be positive");
  if (!(bandwidth_w > 0.0)) throw Error("channel: bandwidth must be positive");
  if (!(xi > 0.0)) throw Error("channel: xi must be positive");
  if (b_cap < 1) throw Error("channel: b_cap must be at least 1");
  if (!(pathloss.min_distance_m > 0.0)) throw Error("channel: min distance must be positive");
  if (shadowing_sigma_db < 0.0) throw Error("channel: shadowing sigma must be non-negative");
}

int ExtendedApSet::find_virtual(int i1, int i2) const {
  if (i1 > i2) std::swap(i1, i2);
  const auto first = members.begin() + physical_count;
  const std::array<int, 2> key{i1, i2};
  const auto it = std::lower_bound(first, members.end(), key);
  if (it == members.end() || *it != key) return -1;
  return static_cast<int>(it - members.begin());
}

bool ExtendedApSet::conflicts(int a, int b) const {
  for (int x : members[a]) {
    if (x < 0) continue;
    for (int y : members[b]) {
      if (x == y) return true;
    }
  }
  return false;
}

std::vector<int> NetworkModel::unservable_ues() const {
  std::vector<int> out;
  for (int j = 0; j < ue_count(); ++j) {
    if (physical_neighborhoods[j].empty()) out.push_back(j);
  }
  return out;
}

Topology generate_topology(int n, int k, double width, double height, std::uint64_t seed) {
  if (n < 1 || k < 1) throw Error("topology: need at least one AP and one UE");
  if (!(width > 0.0) || !(height > 0.0)) throw Error("topology: area must have positive size");
  Topology topo;
  topo.width = width;
  topo.height = height;
  topo.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, width);
  std::uniform_real_distribution<double> uy(0.0, height);
  topo.aps.resize(2, n);
  topo.ues.resize(2, k);
  for (int i = 0; i < n; ++i) {
    topo.aps(0, i) = ux(rng);
    topo.aps(1, i) = uy(rng);
  }
  for (int j = 0; j < k; ++j) {
    topo.ues(0, j) = ux(rng);
    topo.ues(1, j) = uy(rng);
  }
  return topo;
}

GainMatrix compute_gains(const Topology& topology, const ChannelParams& params) {
  params.validate();
  const int n = topology.ap_count();
  const int k = topology.ue_count();
  GainMatrix g(n, k);
  // Shadowing draws use their own stream so toggling sigma leaves positions untouched.
  std::mt19937_64 rng(topology.seed ^ 0x5bd1e995a5a5a5a5ULL);
  std::normal_distribution<double> shadow(0.0, params.shadowing_sigma_db);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double d = (topology.aps.col(i) - topology.ues.col(j)).norm();
      double loss = params.pathloss.loss_db(d);
      if (params.shadowing_sigma_db > 0.0) loss -= shadow(rng);
      g(i, j) = std::pow(10.0, -loss / 10.0);
    }
  }
  return g;
}

std::vector<std::vector<int>> build_neighborhoods(const GainMatrix& gains, const ChannelParams& params) {
  params.validate();
  const int n = static_cast<int>(gains.rows());
  const int k = static_cast<int>(gains.cols());
  std::vector<std::vector<int>> hoods(k);
  for (int j = 0; j < k; ++j) {
    std::vector<int>& a = hoods[j];
    for (int i = 0; i < n; ++i) {
      if (gains(i, j) * params.pmax / params.n0 >= params.xi) a.push_back(i);
    }
    if (static_cast<int>(a.size()) > params.b_cap) {
      std::stable_sort(a.begin(), a.end(), [&](int x, int y) { return gains(x, j) > gains(y, j); });
      a.resize(params.b_cap);
    }
    std::sort(a.begin(), a.end());
  }
  return hoods;
}

ExtendedApSet enumerate_extended(const std::vector<std::vector<int>>& neighborhoods,
                                 const GainMatrix& gains, const ChannelParams& params) {
  const int n = static_cast<int>(gains.rows());
  const int k = static_cast<int>(gains.cols());
  if (static_cast<int>(neighborhoods.size()) != k) throw Error("extended set: neighborhood count mismatch");

  ExtendedApSet ex;
  ex.physical_count = n;
  ex.ue_count = k;
  for (int i = 0; i < n; ++i) ex.members.push_back({i, -1});

  std::vector<std::array<int, 2>> pairs;
  for (const auto& a : neighborhoods) {
    for (std::size_t x = 0; x < a.size(); ++x) {
      for (std::size_t y = x + 1; y < a.size(); ++y) pairs.push_back({a[x], a[y]});
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  ex.members.insert(ex.members.end(), pairs.begin(), pairs.end());

  const int m = ex.size();
  ex.g.resize(m, k);
  ex.h_noncoherent.resize(m, k);
  ex.h_coherent.resize(m, k);
  ex.g.topRows(n) = gains;
  for (int e = n; e < m; ++e) {
    const auto [i1, i2] = ex.members[e];
    ex.g.row(e) = gains.row(i1) + gains.row(i2);
  }
  ex.h_noncoherent = ex.g;
  ex.h_coherent.topRows(n) = gains;
  for (int e = n; e < m; ++e) {
    const auto [i1, i2] = ex.members[e];
    ex.h_coherent.row(e) =
        ex.g.row(e).array() + 2.0 * (gains.row(i1).array() * gains.row(i2).array()).sqrt();
  }

  ex.neighborhoods.assign(k, {});
  ex.candidates.assign(m, {});
  for (int j = 0; j < k; ++j) {
    auto& a = ex.neighborhoods[j];
    a = neighborhoods[j];
    for (int e = n; e < m; ++e) {
      if (ex.g(e, j) * params.pmax / params.n0 >= params.xi) a.push_back(e);
    }
    for (int e : a) ex.candidates[e].push_back(j);
  }

  ex.involvement.assign(n, {});
  for (int i = 0; i < n; ++i) ex.involvement[i].push_back(i);
  for (int e = n; e < m; ++e) {
    ex.involvement[ex.members[e][0]].push_back(e);
    ex.involvement[ex.members[e][1]].push_back(e);
  }
  for (auto& inv : ex.involvement) std::sort(inv.begin(), inv.end());
  return ex;
}

NetworkModel build_model(const GainMatrix& gains, const ChannelParams& params) {
  if (!gains.allFinite() || (gains.array() < 0.0).any()) throw Error("gains must be finite and non-negative");
  NetworkModel model;
  model.params = params;
  model.gains = gains;
  model.physical_neighborhoods = build_neighborhoods(gains, params);
  model.exts = enumerate_extended(model.physical_neighborhoods, gains, params);
  return model;
}

NetworkModel build_model(const Topology& topology, const ChannelParams& params) {
  return build_model(compute_gains(topology, params), params);
}

void save_topology(const Topology& topology, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["area"] = {topology.width, topology.height};
  doc["aps"] = nlohmann::json::array();
  for (int i = 0; i < topology.ap_count(); ++i) doc["aps"].push_back({topology.aps(0, i), topology.aps(1, i)});
  doc["ues"] = nlohmann::json::array();
  for (int j = 0; j < topology.ue_count(); ++j) doc["ues"].push_back({topology.ues(0, j), topology.ues(1, j)});
  doc["seed"] = topology.seed;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

namespace {

Points read_points(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) throw Error(std::string("topology: '") + field + "' must be an array");
  Points pts(2, static_cast<Eigen::Index>(arr.size()));
  for (std::size_t c = 0; c < arr.size(); ++c) {
    const auto& p = arr[c];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(std::string("topology: ") + field + "[" + std::to_string(c) + "] must be [x, y]");
    }
    pts(0, c) = p[0].get<double>();
    pts(1, c) = p[1].get<double>();
  }
  return pts;
}

}  // namespace

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  Topology topo;
  const auto& area = doc.at("area");
  if (!area.is_array() || area.size() != 2) throw Error("topology: 'area' must be [w, h]");
  topo.width = area[0].get<double>();
  topo.height = area[1].get<double>();
  topo.aps = read_points(doc.at("aps"), "aps");
  topo.ues = read_points(doc.at("ues"), "ues");
  topo.seed = doc.value("seed", std::uint64_t{0});
  if (!(topo.width > 0.0) || !(topo.height > 0.0)) throw Error("topology: area must have positive size");
  if (topo.ap_count() < 1 || topo.ue_count() < 1) throw Error("topology: need at least one AP and one UE");
  auto inside = [&](const Points& p) {
    return (p.row(0).array() >= 0.0).all() && (p.row(0).array() <= topo.width).all() &&
           (p.row(1).array() >= 0.0).all() && (p.row(1).array() <= topo.height).all();
  };
  if (!inside(topo.aps) || !inside(topo.ues)) throw Error("topology: positions must lie inside the area");
  return topo;
}

}  // namespace cotx
