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

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

namespace cotx {

std::vector<long long> PatternSet::fingerprint(const Pattern& p) const {
  std::vector<long long> key;
  key.reserve(3 * p.size());
  for (int e = 0; e < p.size(); ++e) {
    if (!p.is_active(e)) continue;
    key.push_back(e);
    key.push_back(p.ue[e]);
    key.push_back(std::llround(p.power[e] / pmax_ * 1e12));
  }
  return key;
}

std::pair<int, bool> PatternSet::insert(Pattern pattern) {
  pattern.normalize();
  auto key = fingerprint(pattern);
  const auto it = index_.find(key);
  if (it != index_.end()) return {it->second, false};
  const int l = size();
  index_.emplace(std::move(key), l);
  patterns_.push_back(std::move(pattern));
  return {l, true};
}

bool PatternSet::contains(const Pattern& pattern) const {
  Pattern p = pattern;
  p.normalize();
  return index_.count(fingerprint(p)) != 0;
}

namespace {

constexpr int kNewtonPeriod = 10;

// Concave restriction t -> U(rates + t * dir), evaluated only where dir moves a rate.
class LineRestriction {
 public:
  LineRestriction(const Vector& rates, const Vector& dir, const TrafficProfile& traffic, const UtilitySpec& spec)
      : spec_(spec) {
    const double lsum = spec.kind == UtilityKind::sojourn ? total_arrivals(traffic) : 1.0;
    for (Eigen::Index j = 0; j < dir.size(); ++j) {
      if (dir[j] == 0.0) continue;
      double w = 1.0;
      double shift = 0.0;
      double scale = 1.0;
      if (spec.kind == UtilityKind::sojourn) {
        if (traffic.lambda[j] == 0.0) continue;
        w = traffic.lambda[j] / lsum;
        scale = 1.0 / traffic.packet_bits;
        shift = traffic.lambda[j];
      }
      terms_.push_back({rates[j] * scale - shift, dir[j] * scale, w * scale});
    }
    eps_ = spec.kind == UtilityKind::sojourn && traffic.packet_bits > 0.0 ? spec.epsilon_grad / traffic.packet_bits
                                                                          : spec.epsilon_grad;
  }

  // First and second derivative at t.
  std::pair<double, double> derivatives(double t) const {
    double d1 = 0.0;
    double d2 = 0.0;
    for (const Term& term : terms_) {
      const double x = term.x0 + t * term.slope;
      switch (spec_.kind) {
        case UtilityKind::sum_rate:
          d1 += term.slope;
          break;
        case UtilityKind::log_sum_rate:
          if (x >= eps_) {
            d1 += term.slope / x;
            d2 -= term.slope * term.slope / (x * x);
          } else {
            d1 += term.slope / eps_;
          }
          break;
        case UtilityKind::sojourn:
          if (x >= eps_) {
            d1 += term.weight * term.slope / (x * x);
            d2 -= 2.0 * term.weight * term.slope * term.slope / (x * x * x);
          } else {
            d1 += term.weight * term.slope / (eps_ * eps_);
          }
          break;
      }
    }
    return {d1, d2};
  }

 private:
  static double total_arrivals(const TrafficProfile& traffic) {
    const double s = traffic.lambda.sum();
    if (!(s > 0.0)) throw Error("sojourn utility needs a positive total arrival rate");
    return s;
  }

  struct Term {
    double x0;
    double slope;
    double weight;
  };
  const UtilitySpec& spec_;
  std::vector<Term> terms_;
  double eps_ = 0.0;
};

// Largest t in [0, hi] where the restriction still ascends. Newton on the derivative, kept inside a
// bisection bracket.
double line_search(const Vector& rates, const Vector& dir, double hi, const TrafficProfile& traffic,
                   const UtilitySpec& spec) {
  const LineRestriction line(rates, dir, traffic, spec);
  if (line.derivatives(hi).first >= 0.0) return hi;
  double lo = 0.0;
  double t = 0.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const auto [d1, d2] = line.derivatives(t);
    if (d1 >= 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (d1 == 0.0) break;
    double next = d2 < 0.0 ? t - d1 / d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
      if (d1 >= 0.0) break;
      if (line.derivatives(next).first >= 0.0) return next;
      next = 0.5 * (lo + hi);
    }
    t = next;
  }
  return lo;
}

// Diagonal second derivative of the smoothed utility in the rates (zero on the linear extension).
Vector curvature(const Vector& rates, const TrafficProfile& traffic, const UtilitySpec& spec) {
  Vector h = Vector::Zero(rates.size());
  switch (spec.kind) {
    case UtilityKind::sum_rate:
      break;
    case UtilityKind::log_sum_rate:
      for (Eigen::Index j = 0; j < rates.size(); ++j) {
        if (rates[j] >= spec.epsilon_grad) h[j] = -1.0 / (rates[j] * rates[j]);
      }
      break;
    case UtilityKind::sojourn: {
      const double lsum = traffic.lambda.sum();
      const double d = traffic.packet_bits;
      for (Eigen::Index j = 0; j < rates.size(); ++j) {
        const double lam = traffic.lambda[j];
        const double x = rates[j] / d - lam;
        if (lam > 0.0 && x >= spec.epsilon_grad / d) h[j] = -2.0 * (lam / lsum) / (d * d * x * x * x);
      }
      break;
    }
  }
  return h;
}

// One Newton step over the patterns in use, keeping the total fixed and stopping where the first
// share reaches zero. Pairwise steps alone crawl once many shares are in play.
bool support_newton(const Matrix& r_hz, const TrafficProfile& traffic, const UtilitySpec& spec,
                    std::vector<double>& beta, Vector& rates, double& value) {
  std::vector<int> support;
  for (std::size_t l = 0; l < beta.size(); ++l) {
    if (beta[l] > 0.0) support.push_back(static_cast<int>(l));
  }
  const int m = static_cast<int>(support.size());
  if (m < 2) return false;
  Matrix rs(r_hz.rows(), m);
  for (int q = 0; q < m; ++q) rs.col(q) = r_hz.col(support[q]);
  const Vector g = rs.transpose() * utility_gradient(rates, traffic, spec);
  const Vector w = -curvature(rates, traffic, spec);
  Matrix a = rs.transpose() * w.asDiagonal() * rs;
  a.diagonal().array() += 1e-9 * std::max(a.diagonal().maxCoeff(), 1e-300);
  const Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector ag = ldlt.solve(g);
  const Vector a1 = ldlt.solve(Vector::Ones(m));
  const Vector d = ag - (ag.sum() / a1.sum()) * a1;

  double hi = std::numeric_limits<double>::infinity();
  int block = -1;
  for (int q = 0; q < m; ++q) {
    if (d[q] < 0.0 && beta[support[q]] / -d[q] < hi) {
      hi = beta[support[q]] / -d[q];
      block = q;
    }
  }
  if (block < 0 || !d.allFinite()) return false;
  const Vector dir = rs * d;
  const double t = line_search(rates, dir, hi, traffic, spec);
  if (!(t > 0.0)) return false;

  const std::vector<double> before = beta;
  const double total = std::accumulate(beta.begin(), beta.end(), 0.0);
  for (int q = 0; q < m; ++q) {
    double& b = beta[support[q]];
    b = q == block && t == hi ? 0.0 : std::max(0.0, b + t * d[q]);
  }
  const double sum = std::accumulate(beta.begin(), beta.end(), 0.0);
  for (double& b : beta) b *= total / sum;
  const Vector moved = r_hz * Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const double next = smoothed_utility(moved, traffic, spec);
  if (!(next > value)) {
    beta = before;
    return false;
  }
  rates = moved;
  value = next;
  return true;
}

}  // namespace

MasterSolution solve_beta(const Matrix& r_hz, const TrafficProfile& traffic, const UtilitySpec& spec,
                          double bandwidth, const std::vector<double>* warm, const MasterOptions& options) {
  const int L = static_cast<int>(r_hz.cols());
  if (L == 0) throw Error("solve_beta: empty pattern set");
  if (!(bandwidth > 0.0)) throw Error("solve_beta: bandwidth must be positive");

  MasterSolution sol;
  if (warm != nullptr) {
    if (static_cast<int>(warm->size()) != L) throw Error("solve_beta: warm start size mismatch");
    sol.beta = *warm;
  } else {
    // Start on the best vertex.
    sol.beta.assign(L, 0.0);
    int best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < L; ++l) {
      const double u = smoothed_utility(bandwidth * r_hz.col(l), traffic, spec);
      if (u > best_u) {
        best_u = u;
        best = l;
      }
    }
    sol.beta[best] = bandwidth;
  }
  Eigen::Map<const Vector> beta_view(sol.beta.data(), L);
  Vector rates = r_hz * beta_view;
  double value = smoothed_utility(rates, traffic, spec);

  for (int it = 0; it < options.max_iters; ++it) {
    const Vector grad = r_hz.transpose() * utility_gradient(rates, traffic, spec);
    int s = 0;
    int a = -1;
    for (int l = 1; l < L; ++l) {
      if (grad[l] > grad[s]) s = l;
    }
    double inner = 0.0;
    for (int l = 0; l < L; ++l) {
      if (sol.beta[l] <= 0.0) continue;
      inner += grad[l] * sol.beta[l];
      if (a < 0 || grad[l] < grad[a]) a = l;
    }
    const double gap = bandwidth * grad[s] - inner;
    sol.iterations = it;
    if (!(gap > options.gap_tol * std::max(std::abs(value), 1e-300)) || a == s) break;
    const Vector dir = r_hz.col(s) - r_hz.col(a);
    const double step = line_search(rates, dir, sol.beta[a], traffic, spec);
    if (step <= 0.0) break;
    sol.beta[s] += step;
    sol.beta[a] = step == sol.beta[a] ? 0.0 : sol.beta[a] - step;
    rates += step * dir;
    const double next = smoothed_utility(rates, traffic, spec);
    if (!(next >= value)) {
      // Roundoff in the bisection; undo and stop.
      sol.beta[s] -= step;
      sol.beta[a] += step;
      rates = r_hz * beta_view;
      break;
    }
    value = next;
    if (it % kNewtonPeriod == kNewtonPeriod - 1) support_newton(r_hz, traffic, spec, sol.beta, rates, value);
    sol.iterations = it + 1;
  }
  sol.rates = r_hz * beta_view;
  sol.smoothed = smoothed_utility(sol.rates, traffic, spec);
  sol.utility = utility(sol.rates, traffic, spec);
  sol.infeasible_stability = spec.kind == UtilityKind::sojourn && !is_stable(sol.rates, traffic);
  return sol;
}

Allocation initial_allocation(const NetworkModel& model, Cooperation mode) {
  const auto& ex = model.exts;
  Pattern p = Pattern::silent(ex.size());
  for (int i = 0; i < ex.physical_count; ++i) {
    int best = kNoUe;
    for (int j : ex.candidates[i]) {
      if (best == kNoUe || ex.g(i, j) > ex.g(i, best)) best = j;
    }
    if (best == kNoUe) continue;
    p.active[i] = 1;
    p.ue[i] = best;
    p.power[i] = model.params.pmax;
  }
  Allocation alloc;
  alloc.patterns.push_back(std::move(p));
  alloc.beta.push_back(model.params.bandwidth_w);
  alloc.cooperation = mode;
  return alloc;
}

Pattern random_pattern(const NetworkModel& model, Cooperation mode, std::uint64_t seed) {
  const auto& ex = model.exts;
  const Matrix& h = ex.h(mode);
  std::mt19937_64 rng(seed);
  std::vector<int> order;
  for (int e = 0; e < ex.size(); ++e) {
    if (ex.candidates[e].empty()) continue;
    if (mode == Cooperation::none && ex.is_virtual(e)) continue;
    order.push_back(e);
  }
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> used(ex.physical_count, 0);
  Pattern p = Pattern::silent(ex.size());
  for (int e : order) {
    const auto [a, b] = ex.members[e];
    if (used[a] || (b >= 0 && used[b])) continue;
    used[a] = 1;
    if (b >= 0) used[b] = 1;
    int best = ex.candidates[e].front();
    for (int j : ex.candidates[e]) {
      if (h(e, j) > h(e, best)) best = j;
    }
    p.active[e] = 1;
    p.ue[e] = best;
    p.power[e] = model.params.pmax;
  }
  return p;
}

namespace {

// Moves beta against kernel direction z (restricted to `cols`) until one entry hits zero.
// Returns the bandwidth removed.
double kernel_step(std::vector<double>& beta, const std::vector<int>& cols, Vector z, bool need_positive_sum) {
  if (need_positive_sum ? z.sum() < 0.0 : z.maxCoeff() <= 0.0) z = -z;
  int hit = -1;
  double t = std::numeric_limits<double>::infinity();
  for (int q = 0; q < z.size(); ++q) {
    if (z[q] > 0.0 && beta[cols[q]] / z[q] < t) {
      t = beta[cols[q]] / z[q];
      hit = q;
    }
  }
  if (hit < 0) throw Error("sparsify: degenerate kernel direction");
  double removed = 0.0;
  for (int q = 0; q < z.size(); ++q) {
    const double before = beta[cols[q]];
    beta[cols[q]] = q == hit ? 0.0 : std::max(0.0, before - t * z[q]);
    removed += before - beta[cols[q]];
  }
  return removed;
}

// Caratheodory reduction of beta to at most k positive entries over the columns of r_hz.
std::vector<double> sparse_beta(const Matrix& r_hz, std::vector<double> beta) {
  const int k = static_cast<int>(r_hz.rows());
  const double total = std::accumulate(beta.begin(), beta.end(), 0.0);
  auto active = [&] {
    std::vector<int> cols;
    for (std::size_t l = 0; l < beta.size(); ++l) {
      if (beta[l] > 0.0) cols.push_back(static_cast<int>(l));
    }
    return cols;
  };
  for (std::vector<int> cols = active(); static_cast<int>(cols.size()) > k; cols = active()) {
    const int c = static_cast<int>(cols.size());
    Matrix m(k + 1, c);
    for (int q = 0; q < c; ++q) {
      m.col(q).head(k) = r_hz.col(cols[q]);
      m(k, q) = 1.0;
    }
    Eigen::FullPivLU<Matrix> lu(m);
    Matrix ker = lu.kernel();
    if (lu.dimensionOfKernel() > 0 && ker.cols() > 0 && ker.col(0).norm() > 0.0) {
      kernel_step(beta, cols, ker.col(0), false);
      continue;
    }
    Eigen::FullPivLU<Matrix> lu_r(m.topRows(k));
    ker = lu_r.kernel();
    kernel_step(beta, cols, ker.col(0), true);
    // Same rates on less bandwidth: hand the freed band back proportionally.
    const double sum = std::accumulate(beta.begin(), beta.end(), 0.0);
    for (double& b : beta) b *= total / sum;
  }
  return beta;
}

Allocation with_beta(const Allocation& alloc, const std::vector<double>& beta) {
  Allocation out;
  out.cooperation = alloc.cooperation;
  for (std::size_t l = 0; l < beta.size(); ++l) {
    if (beta[l] <= 0.0) continue;
    out.patterns.push_back(alloc.patterns[l]);
    out.beta.push_back(beta[l]);
  }
  return out;
}

}  // namespace

Allocation sparsify(const Allocation& alloc, const NetworkModel& model) {
  const Matrix r_hz = pattern_rate_matrix(alloc.patterns, model, alloc.cooperation);
  return with_beta(alloc, sparse_beta(r_hz, alloc.beta));
}

namespace {

void check_warm(const Allocation& warm, const NetworkModel& model, const PursuitOptions& options) {
  validate_allocation(warm, model);
  for (const Pattern& p : warm.patterns) {
    for (int e = 0; e < p.size(); ++e) {
      if (!p.is_active(e)) continue;
      if (options.mode == Cooperation::none && model.exts.is_virtual(e)) {
        throw Error("pursue: warm start activates a virtual AP but cooperation is off");
      }
      if (!options.optimize_power && p.power[e] != model.params.pmax) {
        throw Error("pursue: warm start uses a power level other than pmax with fixed power");
      }
    }
  }
}

constexpr std::size_t kStageWindow = 50;
constexpr double kStagePlateau = 5e-3;
constexpr int kPruneRounds = 5;

}  // namespace

PursuitResult pursue(const NetworkModel& model, const TrafficProfile& traffic, const UtilitySpec& spec,
                     const PursuitOptions& options, const Allocation* warm) {
  const double bandwidth = model.params.bandwidth_w;
  const int max_outer = options.max_outer > 0 ? options.max_outer : 4 * model.ue_count();
  PatternSet set(model.params.pmax);
  std::vector<double> beta;

  const Allocation start = warm != nullptr ? *warm : initial_allocation(model, options.mode);
  if (warm != nullptr) check_warm(*warm, model, options);
  for (std::size_t l = 0; l < start.patterns.size(); ++l) {
    const auto [idx, fresh] = set.insert(start.patterns[l]);
    if (fresh) beta.push_back(0.0);
    beta[idx] += start.beta[l];
  }
  // Rescale so the split covers exactly this model's band.
  const double warm_total = std::accumulate(beta.begin(), beta.end(), 0.0);
  for (double& b : beta) b *= bandwidth / warm_total;

  Matrix r_hz = pattern_rate_matrix(set.patterns(), model, options.mode);

  // Below stability the capped gradient is nearly binary across the kink at epsilon and gives the
  // pattern search no sense of which deficits are cheap to close. Until the rates stabilize, the
  // search runs on the same utility smoothed over a wider margin, narrowing tenfold per stage.
  std::vector<UtilitySpec> stages;
  if (spec.kind == UtilityKind::sojourn) {
    double mean = 0.0;
    int loaded = 0;
    for (double l : traffic.lambda) {
      if (l > 0.0) {
        mean += l;
        ++loaded;
      }
    }
    mean = loaded > 0 ? mean / loaded : 0.0;
    for (double e = mean * traffic.packet_bits; e > spec.epsilon_grad; e *= 0.1) {
      UtilitySpec wide = spec;
      wide.epsilon_grad = e;
      stages.push_back(wide);
    }
  }
  stages.push_back(spec);

  MasterSolution sol;
  PursuitResult result;
  std::uint64_t random_seed = options.seed;
  int outer = 0;
  bool exhausted = false;
  std::size_t first = stages.size() - 1;
  if (first > 0 && solve_beta(r_hz, traffic, spec, bandwidth, &beta, options.master).infeasible_stability) first = 0;
  for (std::size_t stage = first; stage < stages.size() && !exhausted; ++stage) {
    const bool last = stage + 1 == stages.size();
    const UtilitySpec& active = stages[stage];
    sol = solve_beta(r_hz, traffic, active, bandwidth, &beta, options.master);
    if (!last && is_stable(sol.rates, traffic)) {
      // Stable already: go straight to the true utility.
      beta = sol.beta;
      stage = stages.size() - 2;
      continue;
    }
    if (last) result.trace.push_back(sol.smoothed);
    // A widened stage only has to point the search the right way; once it plateaus, narrow.
    std::vector<double> history{sol.smoothed};
    for (; outer < max_outer; ++outer) {
      const Vector c = utility_gradient(sol.rates, traffic, active);
      FpProblem problem(model, options.mode, c, options.optimize_power);

      // Two starts: the default one and the incumbent pattern best aligned with c.
      int incumbent = 0;
      Vector scores = r_hz.transpose() * c;
      scores.maxCoeff(&incumbent);
      FpResult fresh = solve_affine(problem, options.fp);
      FpResult warm_fp = solve_affine(problem, set[incumbent], options.fp);
      result.fp_iterations += fresh.iterations + warm_fp.iterations;
      if (warm_fp.affine_value > fresh.affine_value) std::swap(fresh, warm_fp);

      auto [idx, added] = set.insert(fresh.pattern);
      if (!added) std::tie(idx, added) = set.insert(warm_fp.pattern);
      for (int attempt = 0; !added && attempt < 16; ++attempt) {
        std::tie(idx, added) = set.insert(random_pattern(model, options.mode, random_seed++));
        if (added) ++result.random_patterns;
      }
      if (!added) {
        exhausted = true;
        ++outer;
        break;
      }

      r_hz.conservativeResize(Eigen::NoChange, set.size());
      r_hz.col(idx) = pattern_rates(set[idx], model, options.mode);
      std::vector<double> warm_beta = sol.beta;
      warm_beta.push_back(0.0);
      const double previous = sol.smoothed;
      sol = solve_beta(r_hz, traffic, active, bandwidth, &warm_beta, options.master);
      if (last) result.trace.push_back(sol.smoothed);
      if (!last && is_stable(sol.rates, traffic)) {
        ++outer;
        break;
      }
      history.push_back(sol.smoothed);
      if (!last && history.size() > kStageWindow) {
        const double before = history[history.size() - 1 - kStageWindow];
        if (sol.smoothed - before < kStagePlateau * std::abs(before)) {
          ++outer;
          break;
        }
      }
      if (sol.smoothed - previous < options.outer_tol * std::max(std::abs(previous), 1e-300)) {
        ++outer;
        break;
      }
    }
    beta = sol.beta;
    if (outer >= max_outer && !last) {
      // Out of budget before the final stage: still report the split under the true utility.
      sol = solve_beta(r_hz, traffic, spec, bandwidth, &beta, options.master);
      result.trace.push_back(sol.smoothed);
      break;
    }
  }
  if (exhausted && result.trace.empty()) {
    sol = solve_beta(r_hz, traffic, spec, bandwidth, &beta, options.master);
    result.trace.push_back(sol.smoothed);
  }
  result.outer_iterations = outer;

  Allocation full;
  full.patterns = set.patterns();
  full.cooperation = options.mode;
  // Pruning keeps the rates unless the split had a strictly better neighbour with fewer patterns,
  // which means the master stopped short. Resume it from there and prune again.
  for (int round = 0;; ++round) {
    const std::vector<double> pruned = sparse_beta(r_hz, sol.beta);
    full.beta = sol.beta;
    result.pre_prune_utility = sol.utility;
    result.allocation = with_beta(full, pruned);
    result.rates = allocation_rates(result.allocation, model);
    result.utility = utility(result.rates, traffic, spec);
    const bool better = result.utility > sol.utility &&
                        (std::isinf(sol.utility) || result.utility - sol.utility > 1e-10 * std::abs(sol.utility));
    if (round == kPruneRounds || !better) break;
    beta = pruned;
    sol = solve_beta(r_hz, traffic, spec, bandwidth, &beta, options.master);
  }
  result.infeasible_stability = spec.kind == UtilityKind::sojourn && !is_stable(result.rates, traffic);
  return result;
}

}  // namespace cotx
