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

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> scenarios;
  std::string grid;
};

void add_common(CLI::App* cmd, Common& c, bool sweep_flags) {
  cmd->add_option("--config", c.config, "YAML experiment file (defaults apply when omitted)");
  cmd->add_option("--seed", c.seed, "topology seed, overrides the config");
  cmd->add_option("--out", c.out, "output directory, overrides the config");
  if (sweep_flags) {
    cmd->add_option("--scenario", c.scenarios, "scenario(s) to run, overrides the config")->delimiter(',');
    cmd->add_option("--lambda-grid", c.grid, "comma-separated mean arrival rates in packets/s");
  }
}

cotx::ExperimentConfig resolve(const Common& c) {
  cotx::ExperimentConfig config = c.config.empty() ? cotx::default_config() : cotx::load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.out_dir = c.out;
  if (!c.scenarios.empty()) {
    config.scenarios.clear();
    for (const auto& s : c.scenarios) config.scenarios.push_back(cotx::scenario_from_string(s));
  }
  if (!c.grid.empty()) config.lambda_grid = cotx::parse_lambda_grid(c.grid);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint spectrum, association, power and AP-pairing optimizer"};
  app.require_subcommand(1);

  Common gen_opts;
  auto* gen = app.add_subcommand("generate", "write a random topology");
  add_common(gen, gen_opts, false);

  Common solve_opts;
  std::optional<double> solve_lambda;
  auto* solve = app.add_subcommand("solve", "optimize one scenario at one arrival rate");
  add_common(solve, solve_opts, true);
  solve->add_option("--lambda", solve_lambda, "mean arrival rate in packets/s (default: first grid point)");

  Common sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "cutoff sweep over the arrival-rate grid for each scenario");
  add_common(sweep, sweep_opts, true);

  double lambda = 5.0;
  double mu = 10.0;
  std::int64_t packets = 1000000;
  std::uint64_t mm1_seed = 1;
  auto* mm1 = app.add_subcommand("validate-mm1", "simulate an M/M/1 queue against 1/(mu - lambda)");
  mm1->add_option("--lambda", lambda, "arrival rate, packets/s");
  mm1->add_option("--mu", mu, "service rate, packets/s");
  mm1->add_option("--packets", packets, "number of simulated packets");
  mm1->add_option("--seed", mm1_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto config = resolve(gen_opts);
      const auto topo = cotx::run_generate(config);
      std::printf("wrote %d APs and %d UEs to %s\n", topo.ap_count(), topo.ue_count(),
                  (config.out_dir / "topology.json").c_str());
    } else if (*solve) {
      const auto config = resolve(solve_opts);
      if (config.scenarios.size() != 1 && solve_opts.scenarios.size() != 1) {
        throw cotx::Error("solve: pass exactly one --scenario");
      }
      const double rate = solve_lambda ? *solve_lambda : config.lambda_grid.front();
      const auto r = cotx::run_single(config, config.scenarios.front(), rate);
      std::printf("%s at %.15g packets/s: utility %.15g, %s, %zu patterns\n",
                  std::string(cotx::to_string(config.scenarios.front())).c_str(), rate, r.utility,
                  r.stable ? "stable" : "unstable", r.allocation.patterns.size());
    } else if (*sweep) {
      const auto config = resolve(sweep_opts);
      const auto sweeps = cotx::run_experiment(config);
      for (const auto& s : sweeps) {
        std::printf("%-17s cutoff %.15g packets/s\n", std::string(cotx::to_string(s.kind)).c_str(), s.cutoff);
      }
    } else if (*mm1) {
      const double sim = cotx::validate_mm1(lambda, mu, packets, mm1_seed);
      const double exact = 1.0 / (mu - lambda);
      std::printf("simulated %.15g s, analytic %.15g s, relative error %.3g\n", sim, exact,
                  std::abs(sim - exact) / exact);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
