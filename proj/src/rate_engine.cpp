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

#include <algorithm>
#include <limits>
#include <numeric>

namespace cotx {

Pattern Pattern::silent(int extended_count) {
  Pattern p;
  p.power = Vector::Zero(extended_count);
  p.active.assign(extended_count, 0);
  p.ue.assign(extended_count, kNoUe);
  return p;
}

void Pattern::normalize() {
  for (int e = 0; e < size(); ++e) {
    if (active[e] && (ue[e] == kNoUe || !(power[e] > 0.0))) active[e] = 0;
    if (!active[e]) {
      power[e] = 0.0;
      ue[e] = kNoUe;
    }
  }
}

double Allocation::bandwidth() const { return std::accumulate(beta.begin(), beta.end(), 0.0); }

std::size_t Allocation::active_count(double threshold) const {
  return static_cast<std::size_t>(std::count_if(beta.begin(), beta.end(), [&](double b) { return b > threshold; }));
}

void validate_pattern(const Pattern& pattern, const NetworkModel& model, Cooperation mode) {
  const auto& ex = model.exts;
  const int m = ex.size();
  if (pattern.size() != m || pattern.power.size() != m || static_cast<int>(pattern.ue.size()) != m) {
    throw Error("pattern: size does not match the extended AP set");
  }
  std::vector<int> cover(ex.physical_count, 0);
  for (int e = 0; e < m; ++e) {
    const double p = pattern.power[e];
    if (!(p >= 0.0) || p > model.params.pmax * (1.0 + 1e-12)) {
      throw Error("pattern: power of AP " + std::to_string(e) + " outside [0, pmax]");
    }
    if (!pattern.is_active(e)) {
      if (p != 0.0) throw Error("pattern: inactive AP " + std::to_string(e) + " has nonzero power");
      continue;
    }
    if (ex.is_virtual(e) && mode == Cooperation::none) {
      throw Error("pattern: virtual AP " + std::to_string(e) + " active without cooperation");
    }
    const int j = pattern.ue[e];
    if (j != kNoUe) {
      const auto& cand = ex.candidates[e];
      if (!std::binary_search(cand.begin(), cand.end(), j)) {
        throw Error("pattern: AP " + std::to_string(e) + " serves UE " + std::to_string(j) + " outside its reach");
      }
    }
    for (int a : ex.members[e]) {
      if (a >= 0 && ++cover[a] > 1) {
        throw Error("pattern: physical AP " + std::to_string(a) + " used by more than one active AP");
      }
    }
  }
}

void validate_allocation(const Allocation& alloc, const NetworkModel& model, double rel_tol) {
  if (alloc.patterns.size() != alloc.beta.size()) throw Error("allocation: pattern and beta counts differ");
  if (alloc.patterns.empty()) throw Error("allocation: no patterns");
  for (double b : alloc.beta) {
    if (!(b >= 0.0)) throw Error("allocation: negative or NaN bandwidth");
  }
  const double w = model.params.bandwidth_w;
  if (std::abs(alloc.bandwidth() - w) > rel_tol * w) {
    throw Error("allocation: bandwidths sum to " + std::to_string(alloc.bandwidth()) + " Hz, expected " +
                std::to_string(w));
  }
  for (const auto& p : alloc.patterns) validate_pattern(p, model, alloc.cooperation);
}

TrafficProfile TrafficProfile::uniform(const NetworkModel& model, double mean_rate, double packet_bits) {
  TrafficProfile t;
  t.packet_bits = packet_bits;
  t.lambda = Vector::Constant(model.ue_count(), mean_rate);
  for (int j : model.unservable_ues()) t.lambda[j] = 0.0;
  return t;
}

std::string_view to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::sojourn:
      return "sojourn";
    case UtilityKind::sum_rate:
      return "sum-rate";
    case UtilityKind::log_sum_rate:
      return "log-sum-rate";
  }
  return "sojourn";
}

UtilityKind utility_kind_from_string(std::string_view name) {
  if (name == "sojourn" || name == "sojourn-time") return UtilityKind::sojourn;
  if (name == "sum-rate") return UtilityKind::sum_rate;
  if (name == "log-sum-rate") return UtilityKind::log_sum_rate;
  throw Error("unknown utility kind '" + std::string(name) + "'");
}

Vector physical_power(const Pattern& pattern, const ExtendedApSet& exts) {
  Vector out = Vector::Zero(exts.physical_count);
  for (int e = 0; e < pattern.size(); ++e) {
    if (!pattern.is_active(e)) continue;
    for (int a : exts.members[e]) {
      if (a >= 0) out[a] += pattern.power[e];
    }
  }
  return out;
}

Vector received_power(const Pattern& pattern, const NetworkModel& model) {
  return model.gains.transpose() * physical_power(pattern, model.exts);
}

double spectral_efficiency(const Pattern& pattern, int ext_ap, int ue, const NetworkModel& model,
                           Cooperation mode) {
  const auto& ex = model.exts;
  if (!pattern.is_active(ext_ap)) return 0.0;
  double interference = 0.0;
  for (int e = 0; e < pattern.size(); ++e) {
    if (e == ext_ap || !pattern.is_active(e)) continue;
    interference += ex.g(e, ue) * pattern.power[e];
  }
  const double signal = ex.h(mode)(ext_ap, ue) * pattern.power[ext_ap];
  return std::log2(1.0 + signal / (model.params.n0 + interference));
}

Vector pattern_rates(const Pattern& pattern, const NetworkModel& model, Cooperation mode) {
  const auto& ex = model.exts;
  const Matrix& h = ex.h(mode);
  const Vector received = received_power(pattern, model);
  Vector rates = Vector::Zero(model.ue_count());
  for (int e = 0; e < pattern.size(); ++e) {
    const int j = pattern.ue[e];
    if (!pattern.is_active(e) || j == kNoUe) continue;
    const double p = pattern.power[e];
    const double interference = std::max(0.0, received[j] - ex.g(e, j) * p);
    rates[j] += std::log2(1.0 + h(e, j) * p / (model.params.n0 + interference));
  }
  return rates;
}

Matrix pattern_rate_matrix(const std::vector<Pattern>& patterns, const NetworkModel& model, Cooperation mode) {
  Matrix out(model.ue_count(), static_cast<Eigen::Index>(patterns.size()));
  for (std::size_t l = 0; l < patterns.size(); ++l) out.col(l) = pattern_rates(patterns[l], model, mode);
  return out;
}

Vector allocation_rates(const Allocation& alloc, const NetworkModel& model) {
  Vector r = Vector::Zero(model.ue_count());
  for (std::size_t l = 0; l < alloc.patterns.size(); ++l) {
    if (alloc.beta[l] == 0.0) continue;
    r += alloc.beta[l] * pattern_rates(alloc.patterns[l], model, alloc.cooperation);
  }
  return r;
}

namespace {

double total_lambda(const TrafficProfile& traffic) {
  const double s = traffic.lambda.sum();
  if (!(s > 0.0)) throw Error("sojourn utility needs a positive total arrival rate");
  return s;
}

void check_sizes(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec) {
  if (spec.kind == UtilityKind::sojourn && rates.size() != traffic.lambda.size()) {
    throw Error("utility: rate and traffic dimensions differ");
  }
  if (!(spec.epsilon_grad > 0.0)) throw Error("utility: epsilon_grad must be positive");
}

}  // namespace

double utility(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec) {
  check_sizes(rates, traffic, spec);
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (spec.kind) {
    case UtilityKind::sum_rate:
      return rates.sum();
    case UtilityKind::log_sum_rate: {
      double u = 0.0;
      for (double r : rates) {
        if (!(r > 0.0)) return -inf;
        u += std::log(r);
      }
      return u;
    }
    case UtilityKind::sojourn: {
      const double lsum = total_lambda(traffic);
      double u = 0.0;
      for (Eigen::Index j = 0; j < rates.size(); ++j) {
        const double lam = traffic.lambda[j];
        if (lam == 0.0) continue;
        const double margin = rates[j] / traffic.packet_bits - lam;
        if (!(margin > 0.0)) return -inf;
        u -= (lam / lsum) / margin;
      }
      return u;
    }
  }
  return -inf;
}

double smoothed_utility(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec) {
  check_sizes(rates, traffic, spec);
  switch (spec.kind) {
    case UtilityKind::sum_rate:
      return rates.sum();
    case UtilityKind::log_sum_rate: {
      const double eps = spec.epsilon_grad;
      double u = 0.0;
      for (double r : rates) u += r >= eps ? std::log(r) : std::log(eps) + (r - eps) / eps;
      return u;
    }
    case UtilityKind::sojourn: {
      const double lsum = total_lambda(traffic);
      const double eps = spec.epsilon_grad / traffic.packet_bits;
      double u = 0.0;
      for (Eigen::Index j = 0; j < rates.size(); ++j) {
        const double lam = traffic.lambda[j];
        if (lam == 0.0) continue;
        const double x = rates[j] / traffic.packet_bits - lam;
        const double psi = x >= eps ? 1.0 / x : 2.0 / eps - x / (eps * eps);
        u -= (lam / lsum) * psi;
      }
      return u;
    }
  }
  return 0.0;
}

Vector utility_gradient(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec) {
  check_sizes(rates, traffic, spec);
  switch (spec.kind) {
    case UtilityKind::sum_rate:
      return Vector::Ones(rates.size());
    case UtilityKind::log_sum_rate:
      return rates.array().max(spec.epsilon_grad).inverse().matrix();
    case UtilityKind::sojourn: {
      const double lsum = total_lambda(traffic);
      const double d = traffic.packet_bits;
      const double eps = spec.epsilon_grad / d;
      Vector c = Vector::Zero(rates.size());
      for (Eigen::Index j = 0; j < rates.size(); ++j) {
        const double lam = traffic.lambda[j];
        if (lam == 0.0) continue;
        const double x = std::max(rates[j] / d - lam, eps);
        c[j] = (lam / lsum) / d / (x * x);
      }
      return c;
    }
  }
  return Vector::Zero(rates.size());
}

bool is_stable(const Vector& rates, const TrafficProfile& traffic) {
  for (Eigen::Index j = 0; j < rates.size(); ++j) {
    const double lam = traffic.lambda[j];
    if (lam > 0.0 && !(rates[j] / traffic.packet_bits > lam)) return false;
  }
  return true;
}

}  // namespace cotx
