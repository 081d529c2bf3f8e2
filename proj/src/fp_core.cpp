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

#include "cotx/fp_core.hpp"

#include "cotx/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cotx {

namespace {

// The ascent works in nats; dividing c by ln 2 keeps P7a in the bits/s/Hz scale of sum c_j r_j.
double nat_weight(const FpProblem& problem, int ue) { return problem.weights[ue] / std::numbers::ln2; }

// Received power per UE and, per physical AP, the active extended AP driving it.
struct Field {
  Vector received;
  std::vector<int> cover;
};

Field make_field(const FpProblem& problem, const Pattern& pattern) {
  const auto& ex = problem.model->exts;
  Field f;
  f.received = received_power(pattern, *problem.model);
  f.cover.assign(ex.physical_count, -1);
  for (int e = 0; e < pattern.size(); ++e) {
    if (!pattern.is_active(e)) continue;
    for (int a : ex.members[e]) {
      if (a >= 0) f.cover[a] = e;
    }
  }
  return f;
}

// Interference at `ue` from active APs other than `e`.
double interference_excluding(const FpProblem& problem, const FpState& s, const Field& f, int e, int ue) {
  return std::max(0.0, f.received[ue] - problem.model->exts.g(e, ue) * s.pattern.power[e]);
}

// Quadratic-transform term of an active link e serving ue.
double link_term(double w, double gamma, double y, double signal, double noise_plus_interference) {
  return w * std::log1p(gamma) - w * gamma + 2.0 * y * std::sqrt(w * (1.0 + gamma) * signal) -
         y * y * (noise_plus_interference + signal);
}

// Per physical AP a: sum over active serving links e' of y_{e'}^2 g(a -> u_{e'}).
Vector interference_cost(const FpProblem& problem, const FpState& s) {
  const auto& gains = problem.model->gains;
  Vector z = Vector::Zero(problem.model->ap_count());
  for (int e = 0; e < s.pattern.size(); ++e) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe || s.y[e] == 0.0) continue;
    z += (s.y[e] * s.y[e]) * gains.col(j);
  }
  return z;
}

double member_sum(const ExtendedApSet& ex, const Vector& per_physical, int e) {
  double v = 0.0;
  for (int a : ex.members[e]) {
    if (a >= 0) v += per_physical[a];
  }
  return v;
}

void deactivate(FpState& s, int e) {
  s.pattern.active[e] = 0;
  s.pattern.power[e] = 0.0;
  s.pattern.ue[e] = kNoUe;
  s.gamma[e] = 0.0;
  s.y[e] = 0.0;
}

void check_problem(const FpProblem& problem) {
  if (problem.model == nullptr) throw Error("fp: no model");
  if (problem.weights.size() != problem.model->ue_count()) throw Error("fp: weight vector size mismatch");
  if ((problem.weights.array() < 0.0).any() || !problem.weights.allFinite()) {
    throw Error("fp: weights must be finite and non-negative");
  }
}

bool allowed(const FpProblem& problem, int e) {
  return problem.mode != Cooperation::none || !problem.model->exts.is_virtual(e);
}

}  // namespace

FpProblem::FpProblem(const NetworkModel& m, Cooperation coop, Vector c, bool power)
    : model(&m), mode(coop), weights(std::move(c)), optimize_power(power) {
  check_problem(*this);
}

namespace {

double p7a_with(const FpProblem& problem, const FpState& s, const Field& f) {
  const Matrix& h = problem.model->exts.h(problem.mode);
  double total = 0.0;
  for (int e = 0; e < s.pattern.size(); ++e) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe) continue;
    const double p = s.pattern.power[e];
    const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
    total += link_term(nat_weight(problem, j), s.gamma[e], s.y[e], p * h(e, j), noise);
  }
  return total;
}

// Moves a field from `from` to `to` by touching only the APs whose radiated power changed.
void shift_field(const FpProblem& problem, Field& f, const Pattern& from, const Pattern& to) {
  const auto& ex = problem.model->exts;
  const Matrix& gains = problem.model->gains;
  for (int e = 0; e < to.size(); ++e) {
    const double before = from.is_active(e) ? from.power[e] : 0.0;
    const double after = to.is_active(e) ? to.power[e] : 0.0;
    if (before == after && from.is_active(e) == to.is_active(e)) continue;
    for (int a : ex.members[e]) {
      if (a < 0) continue;
      if (before != after) f.received += (after - before) * gains.row(a).transpose();
      if (from.is_active(e) && f.cover[a] == e) f.cover[a] = -1;
    }
  }
  for (int e = 0; e < to.size(); ++e) {
    if (from.is_active(e) || !to.is_active(e)) continue;
    for (int a : ex.members[e]) {
      if (a >= 0) f.cover[a] = e;
    }
  }
}

}  // namespace

double p7a_objective(const FpProblem& problem, const FpState& s) {
  return p7a_with(problem, s, make_field(problem, s.pattern));
}

void refresh_auxiliaries(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  for (int e = 0; e < s.pattern.size(); ++e) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe) {
      s.gamma[e] = 0.0;
      s.y[e] = 0.0;
      continue;
    }
    const double signal = s.pattern.power[e] * h(e, j);
    const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
    s.gamma[e] = signal / noise;
    s.y[e] = std::sqrt(nat_weight(problem, j) * (1.0 + s.gamma[e]) * signal) / (noise + signal);
  }
  s.objective = p7a_objective(problem, s);
}

FpState init_state(const FpProblem& problem) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  FpState s;
  s.pattern = Pattern::silent(ex.size());
  s.gamma = Vector::Zero(ex.size());
  s.y = Vector::Zero(ex.size());
  for (int i = 0; i < ex.physical_count; ++i) {
    int best = kNoUe;
    double best_val = 0.0;
    for (int j : ex.candidates[i]) {
      const double v = problem.weights[j] * h(i, j);
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    if (best == kNoUe) continue;
    s.pattern.active[i] = 1;
    s.pattern.ue[i] = best;
    s.pattern.power[i] = problem.model->params.pmax;
  }
  refresh_auxiliaries(problem, s);
  return s;
}

FpState init_state(const FpProblem& problem, const Pattern& start) {
  const auto& ex = problem.model->exts;
  if (start.size() != ex.size()) throw Error("fp: start pattern size mismatch");
  FpState s;
  s.pattern = start;
  s.gamma = Vector::Zero(ex.size());
  s.y = Vector::Zero(ex.size());
  const double pmax = problem.model->params.pmax;
  for (int e = 0; e < ex.size(); ++e) {
    if (!allowed(problem, e)) s.pattern.active[e] = 0;
    if (s.pattern.is_active(e)) {
      s.pattern.power[e] = problem.optimize_power ? std::clamp(s.pattern.power[e], 0.0, pmax) : pmax;
    }
  }
  s.pattern.normalize();
  validate_pattern(s.pattern, *problem.model, problem.mode);
  refresh_auxiliaries(problem, s);
  return s;
}

void update_gamma(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  for (int e = 0; e < s.pattern.size(); ++e) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe) continue;
    const double w = nat_weight(problem, j);
    const double signal = s.pattern.power[e] * h(e, j);
    if (w == 0.0) {
      s.gamma[e] = signal / (problem.model->params.n0 + interference_excluding(problem, s, f, e, j));
      continue;
    }
    // Stationarity in sqrt(1 + gamma): w s^2 - b s - w = 0.
    const double b = s.y[e] * std::sqrt(w * signal);
    const double root = (b + std::sqrt(b * b + 4.0 * w * w)) / (2.0 * w);
    s.gamma[e] = std::max(0.0, root * root - 1.0);
  }
  s.objective = p7a_objective(problem, s);
}

void update_y(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  for (int e = 0; e < s.pattern.size(); ++e) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe) {
      s.y[e] = 0.0;
      continue;
    }
    const double signal = s.pattern.power[e] * h(e, j);
    const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
    s.y[e] = std::sqrt(nat_weight(problem, j) * (1.0 + s.gamma[e]) * signal) / (noise + signal);
  }
  s.objective = p7a_objective(problem, s);
}

void update_p(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const double pmax = problem.model->params.pmax;
  const Vector z = interference_cost(problem, s);
  Vector next = s.pattern.power;
  for (int e = 0; e < s.pattern.size(); ++e) {
    if (!s.pattern.is_active(e)) continue;
    const int j = s.pattern.ue[e];
    // Cost of e's power on every other active link: sum_{e' != e} y_{e'}^2 g(e -> u_{e'}).
    double cost = member_sum(ex, z, e);
    if (j != kNoUe) cost -= s.y[e] * s.y[e] * ex.g(e, j);
    cost = std::max(0.0, cost);
    if (j == kNoUe) {
      next[e] = cost > 0.0 ? 0.0 : s.pattern.power[e];
      continue;
    }
    const double own = nat_weight(problem, j) * (1.0 + s.gamma[e]) * h(e, j);
    const double den = s.y[e] * s.y[e] * h(e, j) + cost;
    if (den > 0.0) {
      next[e] = std::min(pmax, own * s.y[e] * s.y[e] / (den * den));
    } else {
      next[e] = own > 0.0 ? pmax : 0.0;
    }
  }
  s.pattern.power = next;
  s.objective = p7a_objective(problem, s);
}

std::vector<std::pair<int, double>> utility_gains(const FpProblem& problem, const FpState& s, int e) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  std::vector<std::pair<int, double>> out;
  const double p = s.pattern.power[e];
  for (int j : ex.candidates[e]) {
    const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
    out.emplace_back(j, link_term(nat_weight(problem, j), s.gamma[e], s.y[e], p * h(e, j), noise));
  }
  return out;
}

void update_u(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  std::vector<int> next = s.pattern.ue;
  for (int e = 0; e < s.pattern.size(); ++e) {
    if (!s.pattern.is_active(e)) continue;
    const double p = s.pattern.power[e];
    int best = kNoUe;
    double best_t = 0.0;
    for (int j : ex.candidates[e]) {
      const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
      const double t = link_term(nat_weight(problem, j), s.gamma[e], s.y[e], p * h(e, j), noise);
      if (best == kNoUe ? t >= 0.0 : t > best_t) {
        best = j;
        best_t = t;
      }
    }
    next[e] = best;
  }
  s.pattern.ue = std::move(next);
  s.objective = p7a_objective(problem, s);
}

namespace {

struct Candidate {
  double weight = 0.0;
  int ue = kNoUe;
  double power = 0.0;
  double gamma = 0.0;
  double y = 0.0;
};

// Best stand-alone activation of an inactive extended AP given the current active set with the
// APs it conflicts with removed: maximize w ln(1 + p h / N) - p Z over p and the served UE.
Candidate activation_candidate(const FpProblem& problem, const FpState& s, const Field& f, const Vector& z, int e) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const double pmax = problem.model->params.pmax;
  std::vector<int> conflicts;
  for (int a : ex.members[e]) {
    if (a >= 0 && f.cover[a] >= 0 &&
        std::find(conflicts.begin(), conflicts.end(), f.cover[a]) == conflicts.end()) {
      conflicts.push_back(f.cover[a]);
    }
  }
  double cost = member_sum(ex, z, e);
  for (int c : conflicts) {
    const int uc = s.pattern.ue[c];
    if (uc != kNoUe) cost -= s.y[c] * s.y[c] * ex.g(e, uc);
  }
  cost = std::max(0.0, cost);

  Candidate best;
  best.weight = -std::numeric_limits<double>::infinity();
  for (int j : ex.candidates[e]) {
    const double w = nat_weight(problem, j);
    if (w == 0.0 || h(e, j) == 0.0) continue;
    double interference = f.received[j];
    for (int c : conflicts) interference -= ex.g(c, j) * s.pattern.power[c];
    const double noise = problem.model->params.n0 + std::max(0.0, interference);
    double p = pmax;
    if (problem.optimize_power && cost > 0.0) p = std::clamp(w / cost - noise / h(e, j), 0.0, pmax);
    const double value = w * std::log1p(p * h(e, j) / noise) - p * cost;
    if (value > best.weight) {
      best.weight = value;
      best.ue = j;
      best.power = p;
      best.gamma = p * h(e, j) / noise;
      best.y = std::sqrt(w * (1.0 + best.gamma) * p * h(e, j)) / (noise + p * h(e, j));
    }
  }
  return best;
}

}  // namespace

namespace {

// SINR and quadratic-transform optimum for the listed links only.
void refresh_links(const FpProblem& problem, FpState& s, const std::vector<int>& links, const Field& f) {
  const Matrix& h = problem.model->exts.h(problem.mode);
  for (int e : links) {
    const int j = s.pattern.ue[e];
    if (!s.pattern.is_active(e) || j == kNoUe) continue;
    const double signal = s.pattern.power[e] * h(e, j);
    const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
    s.gamma[e] = signal / noise;
    s.y[e] = std::sqrt(nat_weight(problem, j) * (1.0 + s.gamma[e]) * signal) / (noise + signal);
  }
  s.objective = p7a_with(problem, s, f);
}

void refresh_links(const FpProblem& problem, FpState& s, const std::vector<int>& links) {
  refresh_links(problem, s, links, make_field(problem, s.pattern));
}

}  // namespace

bool update_d(const FpProblem& problem, FpState& s) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Field f = make_field(problem, s.pattern);
  const Vector z = interference_cost(problem, s);
  const int m = ex.size();

  PairingGraph graph;
  graph.vertex_count = ex.physical_count;
  std::vector<int> edge_owner;
  std::vector<Candidate> candidates(m);
  for (int e = 0; e < m; ++e) {
    if (!allowed(problem, e)) continue;
    double weight;
    if (s.pattern.is_active(e)) {
      const int j = s.pattern.ue[e];
      double cost = member_sum(ex, z, e);
      double own = 0.0;
      if (j != kNoUe) {
        cost -= s.y[e] * s.y[e] * ex.g(e, j);
        const double noise = problem.model->params.n0 + interference_excluding(problem, s, f, e, j);
        own = link_term(nat_weight(problem, j), s.gamma[e], s.y[e], s.pattern.power[e] * h(e, j), noise);
      }
      weight = own - s.pattern.power[e] * std::max(0.0, cost);
    } else {
      if (ex.candidates[e].empty()) continue;
      candidates[e] = activation_candidate(problem, s, f, z, e);
      weight = candidates[e].weight;
    }
    if (!(weight > 0.0)) continue;
    const auto [a, b] = ex.members[e];
    graph.edges.push_back({a, b < 0 ? a : b, weight});
    edge_owner.push_back(e);
  }

  const Selection sel = max_weight_selection(graph);
  std::vector<char> chosen(m, 0);
  std::vector<double> edge_weight(m, 0.0);
  for (int k : sel.edges) {
    chosen[edge_owner[k]] = 1;
    edge_weight[edge_owner[k]] = graph.edges[k].weight;
  }

  auto activate = [&](FpState& t, int e) {
    const Candidate& c = candidates[e];
    for (int a : ex.members[e]) {
      if (a < 0) continue;
      for (int other : ex.involvement[a]) {
        if (other != e && t.pattern.is_active(other)) deactivate(t, other);
      }
    }
    t.pattern.active[e] = 1;
    t.pattern.ue[e] = c.ue;
    t.pattern.power[e] = c.power;
  };

  std::vector<int> switched_on;
  std::vector<int> switched_off;
  for (int e = 0; e < m; ++e) {
    if (chosen[e] && !s.pattern.is_active(e)) switched_on.push_back(e);
    if (!chosen[e] && s.pattern.is_active(e)) switched_off.push_back(e);
  }
  if (switched_on.empty() && switched_off.empty()) return true;

  FpState next = s;
  for (int e : switched_off) deactivate(next, e);
  for (int e : switched_on) activate(next, e);
  refresh_links(problem, next, switched_on);
  if (next.objective >= s.objective) {
    s = std::move(next);
    return true;
  }

  // The joint change loses to interactions the edge weights ignore: apply it piecewise instead.
  std::stable_sort(switched_on.begin(), switched_on.end(),
                   [&](int a, int b) { return edge_weight[a] > edge_weight[b]; });
  bool moved = false;
  Field current = f;
  auto attempt = [&](FpState& trial, const std::vector<int>& refreshed) {
    Field tf = current;
    shift_field(problem, tf, s.pattern, trial.pattern);
    refresh_links(problem, trial, refreshed, tf);
    if (trial.objective > s.objective) {
      s = std::move(trial);
      current = std::move(tf);
      moved = true;
    }
  };
  for (int e : switched_on) {
    FpState trial = s;
    activate(trial, e);
    attempt(trial, {e});
  }
  for (int e : switched_off) {
    if (!s.pattern.is_active(e)) continue;
    FpState trial = s;
    deactivate(trial, e);
    attempt(trial, {});
  }
  if (moved) s.objective = p7a_objective(problem, s);
  return moved;
}

namespace {

double link_rate(const FpProblem& problem, double signal, double interference) {
  return std::log2(1.0 + signal / (problem.model->params.n0 + std::max(0.0, interference)));
}

}  // namespace

namespace {

struct Move {
  int ap = -1;
  int ue = kNoUe;  // kNoUe switches the AP off
  double power = 0.0;
  double gain = 0.0;
};

// Scores every single structural move on the exact affine utility. Returns the value of the
// current pattern.
double score_moves(const FpProblem& problem, const FpState& s, std::vector<Move>& moves) {
  const auto& ex = problem.model->exts;
  const Matrix& h = ex.h(problem.mode);
  const Matrix& gains = problem.model->gains;
  const double pmax = problem.model->params.pmax;
  const Vector& c = problem.weights;
  const int m = ex.size();

  const Vector received = gains.transpose() * physical_power(s.pattern, ex);
  std::vector<int> links;
  for (int e = 0; e < m; ++e) {
    if (s.pattern.is_active(e) && s.pattern.ue[e] != kNoUe) links.push_back(e);
  }
  double base = 0.0;
  for (int e : links) {
    const int j = s.pattern.ue[e];
    const double p = s.pattern.power[e];
    base += c[j] * link_rate(problem, p * h(e, j), received[j] - ex.g(e, j) * p);
  }

  moves.clear();
  std::vector<std::pair<int, double>> delta;  // physical AP, power change
  std::vector<char> removed(m, 0);
  std::vector<int> dropped;
  for (int e = 0; e < m; ++e) {
    if (!allowed(problem, e)) continue;
    const bool on = s.pattern.is_active(e);
    if (!on && ex.candidates[e].empty()) continue;
    const double current = on ? s.pattern.power[e] : pmax;
    delta.clear();
    dropped.clear();
    for (int l : links) {
      if (ex.conflicts(l, e)) dropped.push_back(l);
    }
    if (on && std::find(dropped.begin(), dropped.end(), e) == dropped.end()) dropped.push_back(e);
    for (int l : dropped) {
      for (int a : ex.members[l]) {
        if (a >= 0) delta.emplace_back(a, -s.pattern.power[l]);
      }
      removed[l] = 1;
    }
    // Surviving links once e's conflicts are silent, with e radiating p.
    auto others = [&](bool with_e, double p) {
      double total = 0.0;
      for (int l : links) {
        if (removed[l]) continue;
        const int j = s.pattern.ue[l];
        double r = received[j];
        for (const auto& [a, dp] : delta) r += dp * gains(a, j);
        if (with_e) {
          for (int a : ex.members[e]) {
            if (a >= 0) r += p * gains(a, j);
          }
        }
        total += c[j] * link_rate(problem, s.pattern.power[l] * h(l, j), r - ex.g(l, j) * s.pattern.power[l]);
      }
      return total;
    };
    if (on) moves.push_back({e, kNoUe, 0.0, others(false, 0.0) - base});
    for (const double p : {current, pmax}) {
      const bool same_power = p == current;
      if (!same_power && (!on || current >= pmax)) continue;
      const double rest = others(true, p);
      for (int j : ex.candidates[e]) {
        if ((on && same_power && j == s.pattern.ue[e]) || c[j] == 0.0) continue;
        double r = received[j];
        for (const auto& [a, dp] : delta) r += dp * gains(a, j);
        moves.push_back({e, j, p, rest + c[j] * link_rate(problem, p * h(e, j), r) - base});
      }
    }
    for (int l : dropped) removed[l] = 0;
  }
  return base;
}

void apply_move(FpState& s, const ExtendedApSet& ex, const Move& mv) {
  for (int a : ex.members[mv.ap]) {
    if (a < 0) continue;
    for (int l : ex.involvement[a]) {
      if (s.pattern.is_active(l)) deactivate(s, l);
    }
  }
  if (mv.ue != kNoUe) {
    s.pattern.active[mv.ap] = 1;
    s.pattern.ue[mv.ap] = mv.ue;
    s.pattern.power[mv.ap] = mv.power;
  }
}

const Move* best_of(const std::vector<Move>& moves) {
  const Move* best = nullptr;
  for (const Move& mv : moves) {
    if (best == nullptr || mv.gain > best->gain) best = &mv;
  }
  return best;
}

}  // namespace

bool local_search(const FpProblem& problem, FpState& s) {
  constexpr int kLookahead = 8;
  const auto& ex = problem.model->exts;
  std::vector<Move> moves;
  const double base = score_moves(problem, s, moves);
  const double eps = 1e-12 * std::max(1.0, std::abs(base));
  if (moves.empty()) return false;

  const Move* single = best_of(moves);
  if (single->gain > eps) {
    apply_move(s, ex, *single);
    refresh_auxiliaries(problem, s);
    return true;
  }

  // Pairs of moves: the best few first moves, each followed by its best second move.
  std::vector<Move> firsts = moves;
  const auto top = firsts.begin() + std::min<std::ptrdiff_t>(kLookahead, std::ssize(firsts));
  std::partial_sort(firsts.begin(), top, firsts.end(),
                    [](const Move& a, const Move& b) { return a.gain > b.gain; });
  std::vector<Move> seconds;
  for (auto it = firsts.begin(); it != top; ++it) {
    FpState trial = s;
    apply_move(trial, ex, *it);
    score_moves(problem, trial, seconds);
    const Move* second = best_of(seconds);
    if (second != nullptr && it->gain + second->gain > eps) {
      apply_move(trial, ex, *second);
      refresh_auxiliaries(problem, trial);
      s = std::move(trial);
      return true;
    }
  }
  return false;
}

FpResult solve_affine(const FpProblem& problem, const FpOptions& options, const FpObserver& observer) {
  return solve_affine(problem, init_state(problem).pattern, options, observer);
}

FpResult solve_affine(const FpProblem& problem, const Pattern& start, const FpOptions& options,
                      const FpObserver& observer) {
  FpState s = init_state(problem, start);
  FpResult result;
  result.trace.push_back(s.objective);
  auto notify = [&](std::string_view step) {
    if (observer) observer(step, s.objective);
  };
  notify("init");
  Pattern searched;  // structure at which the last search found nothing
  for (int it = 0; it < options.max_iters; ++it) {
    const double before = s.objective;
    update_gamma(problem, s);
    notify("gamma");
    update_y(problem, s);
    notify("y");
    if (problem.optimize_power) {
      update_p(problem, s);
      notify("p");
    }
    update_u(problem, s);
    notify("u");
    update_d(problem, s);
    notify("d");
    result.iterations = it + 1;
    result.trace.push_back(s.objective);
    const double scale = std::max(std::abs(before), std::abs(s.objective));
    const double gain = s.objective - before;
    const bool same_structure = s.pattern.active == searched.active && s.pattern.ue == searched.ue;
    if (options.local_search && gain <= options.search_trigger * scale && !same_structure) {
      if (local_search(problem, s)) {
        notify("search");
        result.trace.back() = s.objective;
        continue;
      }
      searched = s.pattern;
    }
    if (scale == 0.0 || gain <= options.tol * scale) {
      result.converged = true;
      break;
    }
  }
  result.objective = s.objective;
  result.pattern = s.pattern;
  result.pattern.normalize();
  result.affine_value = problem.weights.dot(pattern_rates(result.pattern, *problem.model, problem.mode));
  return result;
}

}  // namespace cotx
