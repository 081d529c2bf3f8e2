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

#include "cotx/rate_engine.hpp"

#include "cotx/pursuit.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cotx;
using cotx::testing::desk_model;
using cotx::testing::two_ap_model;

namespace {

Pattern single(int m, int e, int ue, double p) {
  Pattern pat = Pattern::silent(m);
  pat.active[e] = 1;
  pat.ue[e] = ue;
  pat.power[e] = p;
  return pat;
}

Pattern random_powers(const NetworkModel& m, Cooperation mode, std::uint64_t seed) {
  Pattern p = random_pattern(m, mode, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> f(0.05, 1.0);
  for (int e = 0; e < p.size(); ++e) p.power[e] *= f(rng);
  return p;
}

TrafficProfile traffic_for(const Vector& rates, double load, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  TrafficProfile t;
  t.packet_bits = 1e6;
  t.lambda.resize(rates.size());
  for (Eigen::Index j = 0; j < rates.size(); ++j) t.lambda[j] = load * u(rng) * rates[j] / t.packet_bits;
  return t;
}

}  // namespace

TEST_CASE("spectral efficiency of the two-AP example") {
  const NetworkModel m = two_ap_model(100.0);
  const double pmax = m.params.pmax;
  const double snr = 100.0;
  Pattern both = Pattern::silent(3);
  both.active[0] = both.active[1] = 1;
  both.ue[0] = both.ue[1] = 0;
  both.power[0] = both.power[1] = pmax;
  const double each = std::log2(1 + snr / (1 + snr));
  CHECK(spectral_efficiency(both, 0, 0, m, Cooperation::none) == doctest::Approx(each).epsilon(1e-12));
  CHECK(pattern_rates(both, m, Cooperation::none)[0] == doctest::Approx(2 * each).epsilon(1e-12));

  const Pattern pair = single(3, 2, 0, pmax);
  CHECK(spectral_efficiency(pair, 2, 0, m, Cooperation::noncoherent) == doctest::Approx(std::log2(1 + 2 * snr)).epsilon(1e-12));
  CHECK(spectral_efficiency(pair, 2, 0, m, Cooperation::coherent) == doctest::Approx(std::log2(1 + 4 * snr)).epsilon(1e-12));
}

TEST_CASE("pattern_rates") {
  ChannelParams params;
  GainMatrix g(3, 2);
  const double t = params.xi * params.n0 / params.pmax;
  g << 10 * t, 0.1 * t, 10 * t, 10 * t, 0.1 * t, 10 * t;
  const NetworkModel m = build_model(g, params);
  CHECK(pattern_rates(Pattern::silent(5), m, Cooperation::coherent).isZero());

  const Pattern alone = single(5, 0, 0, params.pmax);
  CHECK(pattern_rates(alone, m, Cooperation::none)[0] ==
        doctest::Approx(std::log2(1 + 10 * t * params.pmax / params.n0)).epsilon(1e-12));

  // Pair (0,1) serves UE 0 and AP 2 serves UE 1: UE 0 is interfered only by AP 2.
  Pattern p = single(5, 3, 0, params.pmax);
  p.active[2] = 1;
  p.ue[2] = 1;
  p.power[2] = 0.5 * params.pmax;
  validate_pattern(p, m, Cooperation::coherent);
  const Vector r = pattern_rates(p, m, Cooperation::coherent);
  const double h = 20 * t + 2 * 10 * t;
  CHECK(r[0] == doctest::Approx(std::log2(1 + h * params.pmax / (params.n0 + 0.1 * t * 0.5 * params.pmax))).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(std::log2(1 + 10 * t * 0.5 * params.pmax / (params.n0 + 10.1 * t * params.pmax))).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(spectral_efficiency(p, 3, 0, m, Cooperation::coherent)).epsilon(1e-12));
}

TEST_CASE("validation rejects broken patterns") {
  const NetworkModel m = two_ap_model();
  Pattern p = single(3, 0, 0, 2 * m.params.pmax);
  CHECK_THROWS_AS(validate_pattern(p, m, Cooperation::none), Error);
  p = single(3, 2, 0, m.params.pmax);
  CHECK_THROWS_AS(validate_pattern(p, m, Cooperation::none), Error);
  p.active[0] = 1;
  p.ue[0] = 0;
  p.power[0] = m.params.pmax;
  CHECK_THROWS_AS(validate_pattern(p, m, Cooperation::coherent), Error);

  Allocation a;
  a.patterns = {single(3, 0, 0, m.params.pmax)};
  a.beta = {0.5 * m.params.bandwidth_w};
  CHECK_THROWS_AS(validate_allocation(a, m), Error);
}

TEST_CASE("allocation_rates") {
  const NetworkModel m = desk_model(8, 16, 3);
  const Pattern p = random_powers(m, Cooperation::noncoherent, 1);
  const Pattern q = random_powers(m, Cooperation::noncoherent, 2);
  const double w = m.params.bandwidth_w;
  Allocation one{{p}, {w}, Cooperation::noncoherent};
  CHECK(allocation_rates(one, m).isApprox(w * pattern_rates(p, m, Cooperation::noncoherent), 1e-14));
  Allocation split{{p, p}, {w / 2, w / 2}, Cooperation::noncoherent};
  CHECK(allocation_rates(split, m).isApprox(allocation_rates(one, m), 1e-14));

  // Linear in beta.
  Allocation a{{p, q}, {0.3 * w, 0.7 * w}, Cooperation::noncoherent};
  Allocation b{{p, q}, {0.8 * w, 0.2 * w}, Cooperation::noncoherent};
  Allocation mix{{p, q}, {0.5 * (0.3 + 0.8) * w, 0.5 * (0.7 + 0.2) * w}, Cooperation::noncoherent};
  CHECK(allocation_rates(mix, m).isApprox(0.5 * (allocation_rates(a, m) + allocation_rates(b, m)), 1e-12));
}

TEST_CASE("rates are monotone in own power and modes share interference") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NetworkModel m = desk_model(10, 30, seed);
    Pattern p = random_powers(m, Cooperation::coherent, seed);
    for (int e = 0; e < p.size(); ++e) {
      if (!p.is_active(e)) continue;
      const int j = p.ue[e];
      Pattern up = p;
      up.power[e] = std::min(m.params.pmax, 1.5 * p.power[e]);
      CHECK(spectral_efficiency(up, e, j, m, Cooperation::coherent) >=
            spectral_efficiency(p, e, j, m, Cooperation::coherent));

      // Same interference in both modes: recover the denominator from each rate.
      const double sc = std::exp2(spectral_efficiency(p, e, j, m, Cooperation::coherent)) - 1;
      const double sn = std::exp2(spectral_efficiency(p, e, j, m, Cooperation::noncoherent)) - 1;
      const double dc = m.exts.h_coherent(e, j) * p.power[e] / sc;
      const double dn = m.exts.h_noncoherent(e, j) * p.power[e] / sn;
      CHECK(dc == doctest::Approx(dn).epsilon(1e-9));
    }
  }
}

TEST_CASE("utility values") {
  TrafficProfile t;
  t.packet_bits = 1e6;
  t.lambda = Vector::Constant(2, 5.0);
  Vector r(2);
  r << 10e6, 10e6;
  CHECK(utility(r, t, {}) == doctest::Approx(-0.2));
  r[1] = 4e6;
  CHECK(utility(r, t, {}) == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(is_stable(r, t));
  UtilitySpec sum{UtilityKind::sum_rate, 1.0};
  CHECK(utility(r, TrafficProfile{Vector::Zero(2), 1e6}, sum) == doctest::Approx(14e6));
  CHECK(utility_gradient(r, t, sum) == Vector::Ones(2));

  // Zero-traffic UEs are ignored.
  t.lambda[1] = 0.0;
  CHECK(utility(r, t, {}) == doctest::Approx(-0.2));
  CHECK(is_stable(r, t));
  t.lambda.setZero();
  CHECK_THROWS_AS(utility(r, t, {}), Error);
}

TEST_CASE("capped gradient below the stability margin") {
  TrafficProfile t{Vector::Constant(2, 5.0), 1e6};
  Vector r(2);
  r << 10e6, 3e6;
  const UtilitySpec spec{UtilityKind::sojourn, 1.0};
  const Vector c = utility_gradient(r, t, spec);
  const double eps = 1.0 / 1e6;
  CHECK(c[1] == doctest::Approx(0.5 / 1e6 / (eps * eps)));
  CHECK(c[0] == doctest::Approx(0.5 / 1e6 / 25.0));
  CHECK((c.array() >= 0).all());
}

TEST_CASE("gradient matches finite differences and utility is concave") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 6;
    Vector r(k);
    for (int j = 0; j < k; ++j) r[j] = 1e6 + 5e7 * u(rng);
    // Central differences with a 1e-3 r step carry ~1e-6 (r / (D margin))^2 truncation error, so
    // points keep at least a third of each rate as stability margin.
    const TrafficProfile t = traffic_for(r, 0.65, rng);
    for (UtilityKind kind : {UtilityKind::sojourn, UtilityKind::log_sum_rate, UtilityKind::sum_rate}) {
      const UtilitySpec spec{kind, 1.0};
      const Vector c = utility_gradient(r, t, spec);
      for (int j = 0; j < k; ++j) {
        const double step = 1e-3 * r[j];
        Vector hi = r, lo = r;
        hi[j] += step;
        lo[j] -= step;
        const double fd = (utility(hi, t, spec) - utility(lo, t, spec)) / (2 * step);
        CHECK(std::abs(fd - c[j]) <= 1e-5 * std::abs(c[j]));
      }
      Vector r2(k);
      for (int j = 0; j < k; ++j) r2[j] = r[j] * (0.9 + 0.5 * u(rng));
      const double s = u(rng);
      const double mid = utility(s * r + (1 - s) * r2, t, spec);
      const double chord = s * utility(r, t, spec) + (1 - s) * utility(r2, t, spec);
      CHECK(mid >= chord - 1e-9 * std::abs(chord));
      CHECK(smoothed_utility(r, t, spec) == doctest::Approx(utility(r, t, spec)).epsilon(1e-12));
    }
  }
}
