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

#include "cotx/pursuit.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cotx;
using cotx::testing::desk_model;
using cotx::testing::two_ap_model;

namespace {

double golden_section(const std::function<double(double)>& f) {
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double a = 0, b = 1;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc, c = b - phi * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + phi * (b - a), fd = f(d);
    }
  }
  return std::max({f(0.0), f(1.0), f(0.5 * (a + b))});
}

}  // namespace

TEST_CASE("PatternSet deduplicates") {
  const NetworkModel m = desk_model(6, 12, 1);
  PatternSet set(m.params.pmax);
  const Pattern p = random_pattern(m, Cooperation::noncoherent, 3);
  CHECK(set.insert(p) == std::pair<int, bool>{0, true});
  Pattern q = p;
  for (int e = 0; e < q.size(); ++e) q.power[e] *= 1 + 1e-15;
  CHECK(set.insert(q) == std::pair<int, bool>{0, false});
  CHECK(set.contains(q));
  CHECK(set.insert(Pattern::silent(p.size())).second);
  CHECK(set.size() == 2);
}

TEST_CASE("initial_allocation") {
  GainMatrix g(1, 1);
  g << 1e-10;
  const NetworkModel one = build_model(g, ChannelParams{});
  const Allocation a = initial_allocation(one);
  REQUIRE(a.patterns.size() == 1);
  CHECK(a.beta[0] == one.params.bandwidth_w);
  CHECK(a.patterns[0].ue[0] == 0);
  CHECK(a.patterns[0].power[0] == one.params.pmax);

  GainMatrix g2(1, 2);
  g2 << 1e-10, 0.0;
  const NetworkModel iso = build_model(g2, ChannelParams{});
  CHECK(iso.unservable_ues() == std::vector<int>{1});
  CHECK(allocation_rates(initial_allocation(iso), iso)[1] == 0.0);

  const NetworkModel m = desk_model(16, 48, 2);
  const Allocation full = initial_allocation(m, Cooperation::coherent);
  CHECK_NOTHROW(validate_allocation(full, m));
}

TEST_CASE("solve_beta") {
  TrafficProfile t{Vector::Constant(2, 3.0), 1e6};
  const UtilitySpec soj{UtilityKind::sojourn, 1.0};
  const double w = 1e8;
  SUBCASE("one pattern") {
    Matrix r(2, 1);
    r << 1, 2;
    const MasterSolution s = solve_beta(r, t, soj, w);
    CHECK(s.beta == std::vector<double>{w});
  }
  SUBCASE("dominated pattern gets nothing") {
    Matrix r(2, 2);
    r << 1.0, 0.5, 2.0, 1.0;
    const MasterSolution s = solve_beta(r, t, soj, w);
    CHECK(s.beta[0] == w);
    CHECK(s.beta[1] == 0.0);
  }
  SUBCASE("sum rate lands on a vertex") {
    Matrix r(2, 2);
    r << 1.0, 3.0, 2.0, 0.5;
    const std::vector<double> warm{0.5 * w, 0.5 * w};
    const MasterSolution s = solve_beta(r, t, {UtilityKind::sum_rate, 1.0}, w, &warm);
    CHECK(s.beta[0] == 0.0);
    CHECK(s.beta[1] == doctest::Approx(w));
  }
  SUBCASE("infeasible traffic is flagged") {
    Matrix r(2, 1);
    r << 0.01, 0.01;
    CHECK(solve_beta(r, t, soj, w).infeasible_stability);
  }
  SUBCASE("two patterns match a golden-section scan") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      Matrix r(4, 2);
      for (int j = 0; j < 4; ++j) {
        r(j, 0) = 0.1 + u(rng);
        r(j, 1) = 0.1 + u(rng);
      }
      TrafficProfile tt{Vector::Constant(4, 0.2 * w / 1e6 * 0.1 * u(rng)), 1e6};
      const MasterSolution s = solve_beta(r, tt, soj, w);
      const double best = golden_section([&](double x) {
        return utility(w * (x * r.col(0) + (1 - x) * r.col(1)), tt, soj);
      });
      CHECK(std::abs(s.utility - best) <= 1e-6 * std::abs(best));
      CHECK(s.utility >= best - 1e-6 * std::abs(best));
    }
  }
  SUBCASE("many patterns reach the optimality gap") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int k = 20;
    const int L = 60;
    Matrix r(k, L);
    for (int l = 0; l < L; ++l) {
      for (int j = 0; j < k; ++j) r(j, l) = u(rng) < 0.3 ? 0.2 + 2.0 * u(rng) : 0.0;
    }
    const double even = (r * Vector::Constant(L, w / L)).minCoeff() / 1e6;
    TrafficProfile tt{Vector::Constant(k, 0.9 * even), 1e6};
    const MasterSolution s = solve_beta(r, tt, soj, w);
    CHECK(s.iterations < MasterOptions{}.max_iters);
    const Vector g = r.transpose() * utility_gradient(s.rates, tt, soj);
    double inner = 0.0;
    for (int l = 0; l < L; ++l) inner += g[l] * s.beta[l];
    CHECK(w * g.maxCoeff() - inner <= 1e-8 * std::abs(s.utility));
  }
}

TEST_CASE("sparsify keeps rates") {
  const NetworkModel m = desk_model(4, 3, 5);
  Allocation a;
  a.cooperation = Cooperation::noncoherent;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Pattern p = random_pattern(m, a.cooperation, s);
    p.power *= 0.3 + 0.1 * static_cast<double>(s);
    a.patterns.push_back(p);
    a.beta.push_back(m.params.bandwidth_w / 8);
  }
  const Vector before = allocation_rates(a, m);
  const Allocation sp = sparsify(a, m);
  CHECK(static_cast<int>(sp.patterns.size()) <= m.ue_count());
  CHECK_NOTHROW(validate_allocation(sp, m));
  const Vector after = allocation_rates(sp, m);
  for (int j = 0; j < m.ue_count(); ++j) CHECK(after[j] >= before[j] * (1 - 1e-9));
}

TEST_CASE("pursue") {
  SUBCASE("sum-rate trace never decreases") {
    const NetworkModel m = desk_model(8, 16, 4);
    const TrafficProfile t = TrafficProfile::uniform(m, 1.0, 1e6);
    PursuitOptions o;
    o.max_outer = 10;
    const PursuitResult r = pursue(m, t, {UtilityKind::sum_rate, 1.0}, o);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] * (1 - 1e-9));
  }
  SUBCASE("two-AP coherent optimum is one cooperative pattern") {
    const NetworkModel m = two_ap_model(100.0);
    const TrafficProfile t = TrafficProfile::uniform(m, 10.0, 1e6);
    PursuitOptions o;
    o.mode = Cooperation::coherent;
    const PursuitResult r = pursue(m, t, {}, o);
    REQUIRE(r.allocation.patterns.size() == 1);
    const Pattern& p = r.allocation.patterns[0];
    CHECK(p.is_active(2));
    CHECK(p.power[2] == m.params.pmax);
    CHECK(r.rates[0] == doctest::Approx(m.params.bandwidth_w * std::log2(401.0)).epsilon(1e-9));
  }
  SUBCASE("desk-scale sojourn run is sparse and deterministic") {
    const NetworkModel m = desk_model(16, 48, 6);
    const TrafficProfile t = TrafficProfile::uniform(m, 5.0, 1e6);
    PursuitOptions o;
    o.max_outer = 30;
    const PursuitResult a = pursue(m, t, {}, o);
    const PursuitResult b = pursue(m, t, {}, o);
    CHECK(static_cast<int>(a.allocation.active_count()) <= m.ue_count());
    CHECK(a.utility == b.utility);
    CHECK(a.allocation.beta == b.allocation.beta);
    CHECK(a.utility == doctest::Approx(a.pre_prune_utility).epsilon(1e-9));
    for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] >= a.trace[i - 1] - 1e-9 * std::abs(a.trace[i - 1]));
  }
}
