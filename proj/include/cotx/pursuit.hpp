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

#include "cotx/fp_core.hpp"
#include "cotx/rate_engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace cotx {

/// Ordered list of distinct patterns; identity is (d, u, p rounded to 1e-12 pmax).
class PatternSet {
 public:
  explicit PatternSet(double pmax) : pmax_(pmax) {}

  /// Index of the pattern (normalized copy) and whether it was newly inserted.
  std::pair<int, bool> insert(Pattern pattern);
  bool contains(const Pattern& pattern) const;
  int size() const { return static_cast<int>(patterns_.size()); }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  const Pattern& operator[](int l) const { return patterns_[l]; }

 private:
  std::vector<long long> fingerprint(const Pattern& pattern) const;

  double pmax_;
  std::vector<Pattern> patterns_;
  std::map<std::vector<long long>, int> index_;
};

struct MasterOptions {
  double gap_tol = 1e-8;  // relative Frank-Wolfe gap
  int max_iters = 500;
};

struct MasterSolution {
  std::vector<double> beta;  // Hz per pattern
  double utility = 0.0;      // true utility of the rates (may be -inf)
  double smoothed = 0.0;     // objective actually maximized
  Vector rates;              // bits/s
  bool infeasible_stability = false;
  int iterations = 0;
};

/// Maximizes the smoothed utility of R beta over {beta >= 0, sum beta = W} with pairwise
/// Frank-Wolfe and exact line search. R is k x L in bits/s/Hz. `warm` must be feasible when given.
MasterSolution solve_beta(const Matrix& rate_per_hz, const TrafficProfile& traffic, const UtilitySpec& spec,
                          double bandwidth, const std::vector<double>* warm = nullptr,
                          const MasterOptions& options = {});

/// One full-reuse pattern: every physical AP serves its strongest reachable UE at pmax.
Allocation initial_allocation(const NetworkModel& model, Cooperation mode = Cooperation::noncoherent);

/// Random feasible pattern: a greedy matching over a shuffled extended-AP order, strongest-gain UE,
/// pmax on every active AP.
Pattern random_pattern(const NetworkModel& model, Cooperation mode, std::uint64_t seed);

/// Drops beta = 0 patterns and removes patterns along kernel directions of the rate matrix until
/// at most k carry bandwidth. Rates are preserved, except that a final reduction from k + 1
/// patterns frees bandwidth which is spread back proportionally (rates can only grow).
Allocation sparsify(const Allocation& alloc, const NetworkModel& model);

struct PursuitOptions {
  Cooperation mode = Cooperation::noncoherent;
  bool optimize_power = true;
  double outer_tol = 1e-5;
  int max_outer = 0;  // 0 means 4k
  std::uint64_t seed = 1;
  FpOptions fp;
  MasterOptions master;
};

struct PursuitResult {
  Allocation allocation;  // sparsified
  Vector rates;
  double utility = 0.0;
  double pre_prune_utility = 0.0;
  std::vector<double> trace;  // smoothed master utility after every outer iteration
  int outer_iterations = 0;
  int fp_iterations = 0;
  int random_patterns = 0;
  bool infeasible_stability = false;
};

/// Scheme pursuit: alternates affine pattern generation at the current utility gradient with
/// re-solving the bandwidth split over all patterns found so far.
PursuitResult pursue(const NetworkModel& model, const TrafficProfile& traffic, const UtilitySpec& spec,
                     const PursuitOptions& options, const Allocation* warm = nullptr);

}  // namespace cotx
