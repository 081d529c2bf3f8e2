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

#include "cotx/baselines.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cotx {

struct ExperimentConfig {
  // Topology: generated from (n, k, area, seed) or read from a JSON file.
  std::string topology_source = "generate";
  std::filesystem::path topology_file;
  int n = 128;
  int k = 384;
  double width = 2400.0;
  double height = 2400.0;
  std::uint64_t seed = 1;

  double tx_power_dbm = 20.0;
  double noise_dbm_per_hz = -174.0;
  ChannelParams channel;  // pmax and n0 are derived from the two fields above

  UtilitySpec utility;
  double packet_bits = 1e6;

  std::vector<ScenarioKind> scenarios;
  std::vector<double> lambda_grid;
  double resolution = 0.1;

  PursuitOptions solver;
  std::filesystem::path out_dir = "out";
  bool record_timing = false;  // wall_s is written as 0 unless set, keeping reruns byte-identical

  void validate() const;
};

/// The 128-AP / 384-UE setup with all five scenarios.
ExperimentConfig default_config();

/// Reads a YAML file on top of default_config(); unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "5,10,20" into ascending arrival rates.
std::vector<double> parse_lambda_grid(const std::string& text);

Topology experiment_topology(const ExperimentConfig& config);
NetworkModel experiment_model(const ExperimentConfig& config, const Topology& topology);

struct RateSummary {
  double min_rate = 0.0;   // bits/s over UEs with traffic
  double mean_rate = 0.0;
};
RateSummary summarize_rates(const Vector& rates, const TrafficProfile& traffic);

/// Sweeps every configured scenario in chain order (each warm-started from the previous one) and
/// writes results.csv, cutoffs.csv, sojourn.csv, topology.csv, association.csv, power_blocks.csv
/// and one allocation dump per (scenario, rate) under config.out_dir.
std::vector<SweepResult> run_experiment(const ExperimentConfig& config);

/// Solves one scenario at one arrival rate and writes its allocation dump and a one-row CSV.
ScenarioResult run_single(const ExperimentConfig& config, ScenarioKind kind, double lambda);

/// Writes topology.json and topology.csv under config.out_dir.
Topology run_generate(const ExperimentConfig& config);

struct AllocationDump {
  Allocation allocation;
  std::string scenario;  // empty when unknown
  double lambda = 0.0;
  double utility = 0.0;
};

void dump_allocation(const Allocation& alloc, const NetworkModel& model, const std::filesystem::path& path,
                     const std::string& scenario = "", double lambda = 0.0, double utility = 0.0);
/// Inverse of dump_allocation; the model supplies the extended-AP numbering and the band W.
AllocationDump load_allocation(const std::filesystem::path& path, const NetworkModel& model);

/// Mean sojourn of a FIFO M/M/1 queue over n_packets simulated packets (Lindley recursion).
double validate_mm1(double lambda, double mu, std::int64_t n_packets, std::uint64_t seed);

}  // namespace cotx
