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


#include "cotx/harness.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace cotx {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Rejects keys the reader does not know, so typos do not silently fall back to defaults.
void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> known) {
  if (!node.IsMap()) throw Error("config: '" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error("config: unknown key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& target, const std::string& where) {
  if (!node[key]) return;
  try {
    target = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw Error("config: bad value for '" + where + "." + key + "' at line " +
                std::to_string(node[key].Mark().line + 1));
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (topology_source != "generate" && topology_source != "file") {
    throw Error("config: topology.source must be 'generate' or 'file'");
  }
  if (topology_source == "file" && !std::filesystem::exists(topology_file)) {
    throw Error("config: topology file '" + topology_file.string() + "' does not exist");
  }
  if (topology_source == "generate" && (n < 1 || k < 1 || !(width > 0.0) || !(height > 0.0))) {
    throw Error("config: topology needs n, k >= 1 and a positive area");
  }
  channel.validate();
  if (!(utility.epsilon_grad > 0.0)) throw Error("config: utility.epsilon_grad must be positive");
  if (!(packet_bits > 0.0)) throw Error("config: utility.packet_bits must be positive");
  if (scenarios.empty()) throw Error("config: scenario list is empty");
  if (lambda_grid.empty()) throw Error("config: sweep.lambda_grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] >= 0.0) || (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))) {
      throw Error("config: sweep.lambda_grid must be non-negative and strictly ascending");
    }
  }
  if (!(resolution > 0.0)) throw Error("config: sweep.resolution must be positive");
  if (!(solver.outer_tol > 0.0) || !(solver.fp.tol > 0.0) || !(solver.master.gap_tol > 0.0)) {
    throw Error("config: solver tolerances must be positive");
  }
  if (solver.max_outer < 0 || solver.fp.max_iters < 1 || solver.master.max_iters < 1) {
    throw Error("config: solver iteration limits must be positive");
  }
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.channel = ChannelParams::from_total_power(c.tx_power_dbm, 100e6, c.noise_dbm_per_hz);
  c.scenarios.assign(kScenarioChain.begin(), kScenarioChain.end());
  c.lambda_grid = {2, 5, 10, 20, 30, 40, 50, 60};
  c.solver.fp.max_iters = 40;
  // 4k outers per point does not fit an hour-long sweep at 384 UEs; 300 covers the useful patterns.
  c.solver.max_outer = 300;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("config: '" + path.string() + "' does not exist");
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error("config: " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = default_config();
  if (!root || root.IsNull()) return c;
  check_keys(root, "", {"topology", "channel", "utility", "scenarios", "sweep", "solver", "output"});

  if (const auto t = root["topology"]) {
    check_keys(t, "topology", {"source", "file", "n", "k", "area", "seed"});
    read(t, "source", c.topology_source, "topology");
    std::string file;
    read(t, "file", file, "topology");
    if (!file.empty()) {
      c.topology_file = path.parent_path() / file;
    }
    read(t, "n", c.n, "topology");
    read(t, "k", c.k, "topology");
    read(t, "seed", c.seed, "topology");
    if (t["area"]) {
      std::vector<double> area;
      read(t, "area", area, "topology");
      if (area.size() != 2) throw Error("config: topology.area must be [width, height]");
      c.width = area[0];
      c.height = area[1];
    }
  }
  if (const auto ch = root["channel"]) {
    check_keys(ch, "channel",
               {"tx_power_dbm", "bandwidth_hz", "noise_dbm_per_hz", "pathloss", "shadowing_sigma_db", "xi", "b_cap"});
    double bandwidth = c.channel.bandwidth_w;
    read(ch, "tx_power_dbm", c.tx_power_dbm, "channel");
    read(ch, "noise_dbm_per_hz", c.noise_dbm_per_hz, "channel");
    read(ch, "bandwidth_hz", bandwidth, "channel");
    const ChannelParams base = ChannelParams::from_total_power(c.tx_power_dbm, bandwidth, c.noise_dbm_per_hz);
    c.channel.pmax = base.pmax;
    c.channel.n0 = base.n0;
    c.channel.bandwidth_w = base.bandwidth_w;
    read(ch, "shadowing_sigma_db", c.channel.shadowing_sigma_db, "channel");
    read(ch, "xi", c.channel.xi, "channel");
    read(ch, "b_cap", c.channel.b_cap, "channel");
    if (const auto pl = ch["pathloss"]) {
      check_keys(pl, "channel.pathloss", {"intercept_db", "slope_db", "min_distance_m"});
      read(pl, "intercept_db", c.channel.pathloss.intercept_db, "channel.pathloss");
      read(pl, "slope_db", c.channel.pathloss.slope_db, "channel.pathloss");
      read(pl, "min_distance_m", c.channel.pathloss.min_distance_m, "channel.pathloss");
    }
  }
  if (const auto u = root["utility"]) {
    check_keys(u, "utility", {"kind", "epsilon_grad", "packet_bits"});
    std::string kind(to_string(c.utility.kind));
    read(u, "kind", kind, "utility");
    c.utility.kind = utility_kind_from_string(kind);
    read(u, "epsilon_grad", c.utility.epsilon_grad, "utility");
    read(u, "packet_bits", c.packet_bits, "utility");
  }
  if (const auto s = root["scenarios"]) {
    if (!s.IsSequence()) throw Error("config: 'scenarios' must be a list");
    c.scenarios.clear();
    for (const auto& item : s) c.scenarios.push_back(scenario_from_string(item.as<std::string>()));
  }
  if (const auto sw = root["sweep"]) {
    check_keys(sw, "sweep", {"lambda_grid", "resolution"});
    read(sw, "lambda_grid", c.lambda_grid, "sweep");
    read(sw, "resolution", c.resolution, "sweep");
  }
  if (const auto so = root["solver"]) {
    check_keys(so, "solver",
               {"outer_tol", "max_outer", "seed", "fp_tol", "fp_max_iters", "local_search", "search_trigger",
                "master_gap_tol", "master_max_iters"});
    read(so, "outer_tol", c.solver.outer_tol, "solver");
    read(so, "max_outer", c.solver.max_outer, "solver");
    read(so, "seed", c.solver.seed, "solver");
    read(so, "fp_tol", c.solver.fp.tol, "solver");
    read(so, "fp_max_iters", c.solver.fp.max_iters, "solver");
    read(so, "local_search", c.solver.fp.local_search, "solver");
    read(so, "search_trigger", c.solver.fp.search_trigger, "solver");
    read(so, "master_gap_tol", c.solver.master.gap_tol, "solver");
    read(so, "master_max_iters", c.solver.master.max_iters, "solver");
  }
  if (const auto o = root["output"]) {
    check_keys(o, "output", {"dir", "timing"});
    std::string dir = c.out_dir.string();
    read(o, "dir", dir, "output");
    c.out_dir = dir;
    read(o, "timing", c.record_timing, "output");
  }
  c.validate();
  return c;
}

std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw Error("lambda grid: cannot parse '" + item + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw Error("lambda grid: empty");
  return grid;
}

Topology experiment_topology(const ExperimentConfig& config) {
  if (config.topology_source == "file") return load_topology(config.topology_file);
  return generate_topology(config.n, config.k, config.width, config.height, config.seed);
}

NetworkModel experiment_model(const ExperimentConfig& config, const Topology& topology) {
  return build_model(topology, config.channel);
}

RateSummary summarize_rates(const Vector& rates, const TrafficProfile& traffic) {
  RateSummary s;
  int count = 0;
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    if (traffic.lambda[j] <= 0.0) continue;
    s.min_rate = count == 0 ? rates[j] : std::min(s.min_rate, rates[j]);
    s.mean_rate += rates[j];
    ++count;
  }
  if (count > 0) s.mean_rate /= count;
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_topology_csv(const Topology& topo, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "kind,id,x,y\n";
  for (int i = 0; i < topo.ap_count(); ++i) out << "ap," << i << ',' << num(topo.aps(0, i)) << ',' << num(topo.aps(1, i)) << '\n';
  for (int j = 0; j < topo.ue_count(); ++j) out << "ue," << j << ',' << num(topo.ues(0, j)) << ',' << num(topo.ues(1, j)) << '\n';
}

const char* kResultsHeader = "scenario,lambda,utility,min_rate,mean_rate,cutoff_flag,wall_s,iters\n";

std::string result_row(ScenarioKind kind, double lambda, const ScenarioResult& r, const TrafficProfile& traffic,
                       bool timing) {
  const RateSummary s = summarize_rates(r.rates, traffic);
  std::string row = std::string(to_string(kind)) + ',' + num(lambda) + ',' + num(r.utility) + ',' +
                    num(s.min_rate) + ',' + num(s.mean_rate) + ',' + (r.stable ? "0" : "1") + ',' +
                    num(timing ? r.wall_s : 0.0) + ',' + std::to_string(r.outer_iterations) + '\n';
  return row;
}

std::string dump_name(ScenarioKind kind, const std::string& tag) {
  return std::string(to_string(kind)) + "_" + tag + ".json";
}

// Per extended AP: the physical APs it drives, as "a1,a2" with -1 for a single AP.
std::string ap_columns(const ExtendedApSet& ex, int e) {
  return std::to_string(ex.members[e][0]) + ',' + std::to_string(ex.members[e][1]);
}

}  // namespace

Topology run_generate(const ExperimentConfig& config) {
  config.validate();
  const Topology topo = experiment_topology(config);
  std::filesystem::create_directories(config.out_dir);
  save_topology(topo, config.out_dir / "topology.json");
  write_topology_csv(topo, config.out_dir / "topology.csv");
  return topo;
}

std::vector<SweepResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::set<ScenarioKind> wanted(config.scenarios.begin(), config.scenarios.end());
  if (wanted.size() != config.scenarios.size()) throw Error("config: scenario listed twice");

  const Topology topo = experiment_topology(config);
  const NetworkModel model = experiment_model(config, topo);
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir / "allocations");
  write_topology_csv(topo, dir / "topology.csv");

  std::vector<SweepResult> sweeps;
  sweeps.reserve(wanted.size());
  const SweepOptions sweep_options{config.resolution, config.packet_bits};
  std::ofstream results = open_out(dir / "results.csv");
  std::ofstream sojourn = open_out(dir / "sojourn.csv");
  std::ofstream cutoffs = open_out(dir / "cutoffs.csv");
  results << kResultsHeader;
  sojourn << "scenario,lambda,mean_sojourn_s\n";
  cutoffs << "scenario,cutoff,evaluations\n";
  for (ScenarioKind kind : kScenarioChain) {
    if (wanted.count(kind) == 0) continue;
    const SweepResult* previous = sweeps.empty() ? nullptr : &sweeps.back();
    sweeps.push_back(cutoff_sweep(kind, model, config.utility, config.lambda_grid, config.solver, sweep_options,
                                  previous));
    const SweepResult& sw = sweeps.back();
    for (const SweepPoint& pt : sw.grid) {
      const TrafficProfile traffic = TrafficProfile::uniform(model, pt.lambda, config.packet_bits);
      results << result_row(kind, pt.lambda, pt.result, traffic, config.record_timing);
      sojourn << to_string(kind) << ',' << num(pt.lambda) << ','
              << num(pt.result.stable ? -pt.result.utility : std::numeric_limits<double>::infinity()) << '\n';
      dump_allocation(pt.result.allocation, model, dir / "allocations" / dump_name(kind, num(pt.lambda)),
                      std::string(to_string(kind)), pt.lambda, pt.result.utility);
    }
    cutoffs << to_string(kind) << ',' << num(sw.cutoff) << ',' << sw.evaluations << '\n';
    if (sw.cutoff > 0.0) {
      const TrafficProfile traffic = TrafficProfile::uniform(model, sw.cutoff, config.packet_bits);
      const double u = utility(allocation_rates(sw.cutoff_allocation, model), traffic, config.utility);
      dump_allocation(sw.cutoff_allocation, model, dir / "allocations" / dump_name(kind, "cutoff"),
                      std::string(to_string(kind)), sw.cutoff, u);
    }
    results.flush();
    std::fprintf(stderr, "%s: cutoff %s packets/s after %d runs\n", std::string(to_string(kind)).c_str(),
                 num(sw.cutoff).c_str(), sw.evaluations);
  }

  // Association lines and per-subband power blocks of each scenario's allocation at the
  // highest rate it still stabilizes.
  std::ofstream assoc = open_out(dir / "association.csv");
  std::ofstream blocks = open_out(dir / "power_blocks.csv");
  assoc << "scenario,lambda,pattern,beta,ap1,ap2,ue,power\n";
  blocks << "scenario,lambda,pattern,f_start,f_end,ap,power\n";
  for (const SweepResult& sw : sweeps) {
    if (sw.cutoff <= 0.0) continue;
    const Allocation& a = sw.cutoff_allocation;
    const std::string name(to_string(sw.kind));
    double f = 0.0;
    for (std::size_t l = 0; l < a.patterns.size(); ++l) {
      const Pattern& p = a.patterns[l];
      for (int e = 0; e < p.size(); ++e) {
        if (!p.is_active(e)) continue;
        assoc << name << ',' << num(sw.cutoff) << ',' << l << ',' << num(a.beta[l]) << ','
              << ap_columns(model.exts, e) << ',' << p.ue[e] << ',' << num(p.power[e]) << '\n';
      }
      const Vector phys = physical_power(p, model.exts);
      for (int i = 0; i < model.ap_count(); ++i) {
        blocks << name << ',' << num(sw.cutoff) << ',' << l << ',' << num(f) << ',' << num(f + a.beta[l]) << ','
               << i << ',' << num(phys[i]) << '\n';
      }
      f += a.beta[l];
    }
  }
  return sweeps;
}

ScenarioResult run_single(const ExperimentConfig& config, ScenarioKind kind, double lambda) {
  config.validate();
  if (!(lambda > 0.0)) throw Error("solve: arrival rate must be positive");
  const Topology topo = experiment_topology(config);
  const NetworkModel model = experiment_model(config, topo);
  const TrafficProfile traffic = TrafficProfile::uniform(model, lambda, config.packet_bits);
  const ScenarioResult r = run_scenario(kind, model, traffic, config.utility, config.solver);
  const auto& dir = config.out_dir;
  std::ofstream csv = open_out(dir / "solve.csv");
  csv << kResultsHeader << result_row(kind, lambda, r, traffic, config.record_timing);
  dump_allocation(r.allocation, model, dir / dump_name(kind, num(lambda)), std::string(to_string(kind)), lambda,
                  r.utility);
  return r;
}

void dump_allocation(const Allocation& alloc, const NetworkModel& model, const std::filesystem::path& path,
                     const std::string& scenario, double lambda, double utility) {
  const auto& ex = model.exts;
  nlohmann::json doc;
  doc["W"] = alloc.bandwidth();
  doc["cooperation"] = std::string(to_string(alloc.cooperation));
  if (!scenario.empty()) doc["scenario"] = scenario;
  doc["lambda"] = lambda;
  doc["utility"] = std::isfinite(utility) ? nlohmann::json(utility) : nlohmann::json(nullptr);
  doc["patterns"] = nlohmann::json::array();
  for (std::size_t l = 0; l < alloc.patterns.size(); ++l) {
    const Pattern& p = alloc.patterns[l];
    nlohmann::json entries = nlohmann::json::array();
    for (int e = 0; e < p.size(); ++e) {
      if (!p.is_active(e)) continue;
      nlohmann::json ap = ex.is_virtual(e) ? nlohmann::json{ex.members[e][0], ex.members[e][1]}
                                           : nlohmann::json{ex.members[e][0]};
      entries.push_back({{"ap", ap}, {"ue", p.ue[e]}, {"p", p.power[e]}});
    }
    doc["patterns"].push_back({{"beta", alloc.beta[l]}, {"entries", entries}});
  }
  std::ofstream out = open_out(path);
  out << doc.dump(1) << '\n';
}

AllocationDump load_allocation(const std::filesystem::path& path, const NetworkModel& model) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  const std::string where = path.string() + ": ";
  auto field = [&](const nlohmann::json& obj, const char* key, const std::string& at) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key)) throw Error(where + "missing field '" + at + key + "'");
    return obj[key];
  };
  auto number = [&](const nlohmann::json& v, const std::string& at) {
    if (!v.is_number()) throw Error(where + "field '" + at + "' must be a number");
    return v.get<double>();
  };
  auto integer = [&](const nlohmann::json& v, const std::string& at) {
    if (!v.is_number_integer()) throw Error(where + "field '" + at + "' must be an integer");
    return v.get<long long>();
  };

  AllocationDump dump;
  const double w = number(field(doc, "W", ""), "W");
  const auto& coop = field(doc, "cooperation", "");
  if (!coop.is_string()) throw Error(where + "field 'cooperation' must be a string");
  dump.allocation.cooperation = cooperation_from_string(coop.get<std::string>());
  if (doc.contains("scenario") && doc["scenario"].is_string()) dump.scenario = doc["scenario"].get<std::string>();
  if (doc.contains("lambda")) dump.lambda = number(doc["lambda"], "lambda");
  if (doc.contains("utility")) {
    dump.utility = doc["utility"].is_null() ? -std::numeric_limits<double>::infinity()
                                            : number(doc["utility"], "utility");
  }
  const auto& patterns = field(doc, "patterns", "");
  if (!patterns.is_array()) throw Error(where + "field 'patterns' must be an array");
  const auto& ex = model.exts;
  for (std::size_t l = 0; l < patterns.size(); ++l) {
    const std::string at = "patterns[" + std::to_string(l) + "].";
    Pattern p = Pattern::silent(ex.size());
    const double beta = number(field(patterns[l], "beta", at), at + "beta");
    const auto& entries = field(patterns[l], "entries", at);
    if (!entries.is_array()) throw Error(where + "field '" + at + "entries' must be an array");
    for (std::size_t q = 0; q < entries.size(); ++q) {
      const std::string eat = at + "entries[" + std::to_string(q) + "].";
      const auto& ap = field(entries[q], "ap", eat);
      if (!ap.is_array() || ap.empty() || ap.size() > 2) {
        throw Error(where + "field '" + eat + "ap' must be [i] or [i1, i2]");
      }
      int e = -1;
      const long long a0 = integer(ap[0], eat + "ap[0]");
      if (ap.size() == 1) {
        if (a0 >= 0 && a0 < ex.physical_count) e = static_cast<int>(a0);
      } else {
        const long long a1 = integer(ap[1], eat + "ap[1]");
        if (a0 >= 0 && a1 >= 0 && a0 < ex.physical_count && a1 < ex.physical_count) {
          e = ex.find_virtual(static_cast<int>(a0), static_cast<int>(a1));
        }
      }
      if (e < 0) throw Error(where + "field '" + eat + "ap' names no AP of this network");
      if (p.is_active(e)) throw Error(where + "field '" + eat + "ap' repeats an AP within the pattern");
      const long long ue = integer(field(entries[q], "ue", eat), eat + "ue");
      if (ue < 0 || ue >= model.ue_count()) throw Error(where + "field '" + eat + "ue' is out of range");
      p.active[e] = 1;
      p.ue[e] = static_cast<int>(ue);
      p.power[e] = number(field(entries[q], "p", eat), eat + "p");
    }
    dump.allocation.patterns.push_back(std::move(p));
    dump.allocation.beta.push_back(beta);
  }
  const double sum = dump.allocation.bandwidth();
  if (!(std::abs(sum - w) <= 1e-9 * std::abs(w))) {
    throw Error(where + "beta sums to " + num(sum) + " but W is " + num(w));
  }
  try {
    validate_allocation(dump.allocation, model);
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
  return dump;
}

double validate_mm1(double lambda, double mu, std::int64_t n_packets, std::uint64_t seed) {
  if (!(lambda > 0.0) || !(mu > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu)) {
    throw Error("mm1: rates must be positive and finite");
  }
  if (!(lambda < mu)) throw Error("mm1: unstable queue, need lambda < mu");
  if (n_packets < 1) throw Error("mm1: need at least one packet");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(lambda);
  std::exponential_distribution<double> service(mu);
  // Lindley: the next packet waits for whatever work the current one leaves behind.
  double wait = 0.0;
  double total = 0.0;
  for (std::int64_t i = 0; i < n_packets; ++i) {
    const double s = service(rng);
    total += wait + s;
    wait = std::max(0.0, wait + s - gap(rng));
  }
  return total / static_cast<double>(n_packets);
}

}  // namespace cotx
