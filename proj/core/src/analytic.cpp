#include "chebyrl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "chebyrl/errors.hpp"
#include "chebyrl/ode.hpp"

namespace chebyrl {

PhaseBoundary::PhaseBoundary(std::vector<double> xs, std::vector<double> vs)
    : xs_(std::move(xs)), vs_(std::move(vs)) {
  if (xs_.size() != vs_.size() || xs_.size() < 2) {
    throw ConfigError("phase boundary needs at least two matching samples");
  }
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1])) throw ConfigError("phase boundary x samples must increase");
  }
}

std::optional<double> PhaseBoundary::value_at(double x) const {
  if (xs_.empty() || x < xs_.front() || x > xs_.back()) return std::nullopt;
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.end()) return vs_.back();
  const auto i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double f = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return vs_[i] + f * (vs_[i + 1] - vs_[i]);
}

bool PhaseBoundary::contains(double x, double v) const {
  if (v < 0.0) return false;
  const std::optional<double> vb = value_at(x);
  return vb && v >= *vb;
}

McPolicy proportional_policy(double c) {
  if (!(c >= 0.0)) throw ConfigError("proportional gain must be >= 0");
  return [c](const McState& s) { return std::clamp(c * s.v, -1.0, 1.0); };
}

double AnalyticPolicy::operator()(double x, double v) const {
  const bool phase2 = boundary && boundary->contains(x, v);
  double magnitude = (phase2 ? params.c_phase2 : params.c_phase1) * std::abs(v);
  const bool boot = std::abs(x - params.x_hat) <= params.boot_radius;
  if (boot) magnitude = std::max(magnitude, params.boot_action);
  magnitude = std::min(magnitude, 1.0);
  if (v > 0.0) return magnitude;
  if (v < 0.0) return -magnitude;
  return boot ? std::min(params.boot_action, 1.0) : 0.0;
}

double pi_ana(const McState& state, const WorstCasePolicyParams& params,
              const PhaseBoundary& boundary) {
  // Non-owning view; the policy does not outlive this call.
  const AnalyticPolicy policy{params, std::shared_ptr<const PhaseBoundary>(
                                          std::shared_ptr<const PhaseBoundary>{}, &boundary)};
  return policy(state);
}

namespace {

/// Smallest c with pred(c) true, assuming pred is false below and true above a
/// single threshold near the bracket found by doubling/halving from `start`.
template <class Pred>
std::optional<double> find_threshold(Pred&& pred, double start, double tol, const char* what,
                                     double c_max = 1024.0) {
  double lo;
  double hi;
  if (pred(start)) {
    hi = start;
    lo = start / 2.0;
    while (pred(lo)) {
      hi = lo;
      lo /= 2.0;
      if (lo < 1e-9) return hi;
    }
  } else {
    lo = start;
    hi = 2.0 * start;
    while (!pred(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > c_max) return std::nullopt;
    }
  }
  // Bracket invariant: pred(lo) false, pred(hi) true.
  if (pred(lo) || !pred(hi)) {
    throw std::logic_error(std::string("non-monotone search predicate: ") + what);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

AnalyticPolicy single_gain_policy(double c, const WorstCasePolicyParams& base) {
  AnalyticPolicy p{base, nullptr};
  p.params.c_phase1 = c;
  p.params.c_phase2 = c;
  return p;
}

AnalyticPolicy two_phase_policy(double c1, double c2, const WorstCasePolicyParams& base,
                                std::shared_ptr<const PhaseBoundary> boundary) {
  AnalyticPolicy p{base, std::move(boundary)};
  p.params.c_phase1 = c1;
  p.params.c_phase2 = c2;
  return p;
}

struct Candidate {
  int k = 0;
  double c = 0.0;
  RolloutSummary summary;
};

}  // namespace

const char* to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::kSinglePhase:
      return "single";
    case SolutionKind::kTwoPhase:
      return "two";
    case SolutionKind::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

McPolicy AnalyticSolution::policy(const SearchOptions& opts) const {
  switch (kind) {
    case SolutionKind::kSinglePhase:
      return single_gain_policy(c, opts.policy);
    case SolutionKind::kTwoPhase:
      return two_phase_policy(c1, c2, opts.policy, boundary);
    case SolutionKind::kInfeasible:
      break;
  }
  return [](const McState&) { return 0.0; };
}

Phase2Solution solve_phase2(const SearchOptions& opts) {
  const McParams& env = opts.env;
  env.validate();
  const RolloutLimits limits{opts.search_t_max, false, 1};
  auto reaches = [&](double c) {
    return mc_simulate(single_gain_policy(c, opts.policy), env.x_min, 0.0, env, limits).reached;
  };
  const std::optional<double> c2 = find_threshold(reaches, 1.0, opts.c_tol, "phase 2 gain");
  if (!c2) throw DomainError("no single-stroke solution from the left wall");

  Phase2Solution out;
  out.c2 = *c2;
  const AnalyticPolicy policy = single_gain_policy(out.c2, opts.policy);
  std::vector<double> xs{env.x_min};
  std::vector<double> vs{0.0};
  McState s{env.x_min, 0.0, 0};
  while (s.t < opts.search_t_max) {
    const double a = std::clamp(policy(s), -1.0, 1.0);
    const StepResult step = mc_step(s, a, env);
    out.loss += a * a;
    s = step.next;
    xs.push_back(s.x);
    vs.push_back(s.v);
    if (step.terminated) break;
  }
  out.steps = s.t;
  out.v_star = s.v;
  out.boundary = PhaseBoundary(std::move(xs), std::move(vs));
  return out;
}

AnalyticSolution solve_single_phase(double x0, const SearchOptions& opts) {
  const McParams& env = opts.env;
  env.validate();
  if (!(x0 >= env.x_min && x0 <= env.x_max)) throw DomainError("x0 outside the track");

  std::optional<Candidate> best;
  const RolloutLimits limits{env.t_max, false, 0};
  for (int k = 2; k <= opts.k_max; ++k) {
    auto reaches = [&](double c) {
      const RolloutLimits lim{env.t_max, false, k};
      return mc_simulate(single_gain_policy(c, opts.policy), x0, 0.0, env, lim).reached;
    };
    const std::optional<double> c = find_threshold(reaches, 0.5, opts.c_tol, "single phase gain");
    if (!c) continue;
    const RolloutSummary r = mc_simulate(single_gain_policy(*c, opts.policy), x0, 0.0, env, limits);
    if (!r.reached || r.wall_hit) continue;
    if (!best || r.loss < best->summary.loss) best = Candidate{k, *c, r};
  }

  AnalyticSolution out;
  out.x0 = x0;
  if (!best) return out;
  out.kind = SolutionKind::kSinglePhase;
  out.k = best->k;
  out.c = best->c;
  out.loss = best->summary.loss;
  out.ret = best->summary.ret;
  out.t_star = best->summary.t;
  out.v_star = best->summary.v_end;
  return out;
}

AnalyticSolution solve_two_phase(double x0, const SearchOptions& opts, const Phase2Solution* phase2) {
  const McParams& env = opts.env;
  env.validate();
  if (!(x0 >= env.x_min && x0 <= env.x_max)) throw DomainError("x0 outside the track");

  Phase2Solution own;
  if (phase2 == nullptr) {
    own = solve_phase2(opts);
    phase2 = &own;
  }
  const double c2 = phase2->c2;
  auto boundary = std::make_shared<const PhaseBoundary>(phase2->boundary);
  auto policy_for = [&](double c1) { return two_phase_policy(c1, c2, opts.policy, boundary); };
  const RolloutLimits full{env.t_max, false, 0};

  // Phase 1 for each k: smallest C1 that reaches the wall within k-1 strokes.
  std::vector<std::optional<double>> c1_min(static_cast<std::size_t>(opts.k_max) + 1);
  for (int k = 2; k <= opts.k_max; ++k) {
    auto hits_wall = [&](double c1) {
      const RolloutLimits lim{opts.search_t_max, true, k - 1};
      return mc_simulate(policy_for(c1), x0, 0.0, env, lim).wall_hit;
    };
    c1_min[k] = find_threshold(hits_wall, 0.25, opts.c_tol, "phase 1 gain");
  }

  std::optional<Candidate> best;
  auto consider = [&](int k, double c1, const RolloutSummary& r) {
    if (!r.reached || !r.wall_hit) return;
    if (!best || r.loss < best->summary.loss) best = Candidate{k, c1, r};
  };

  for (int k = 2; k <= opts.k_max; ++k) {
    if (!c1_min[k]) continue;
    const double c1 = *c1_min[k];
    const RolloutSummary r = mc_simulate(policy_for(c1), x0, 0.0, env, full);
    if (r.reached) {
      consider(k, c1, r);
      continue;
    }
    // Too slow with a zero-speed wall contact: hit the wall harder. Within the
    // same stroke class the loss grows with C1 while t* shrinks, so the optimum
    // is the smallest C1 that meets the step limit.
    double upper = 2.0 * c1;
    if (c1_min[k - 1]) upper = std::min(upper, *c1_min[k - 1]);
    auto in_time = [&](double c) {
      const RolloutSummary s = mc_simulate(policy_for(c), x0, 0.0, env, full);
      return s.reached && s.wall_hit && s.strokes <= k;
    };
    if (!in_time(upper)) continue;
    double lo = c1;
    double hi = upper;
    while (hi - lo > opts.c_tol) {
      const double mid = 0.5 * (lo + hi);
      (in_time(mid) ? hi : lo) = mid;
    }
    consider(k, hi, mc_simulate(policy_for(hi), x0, 0.0, env, full));
  }

  AnalyticSolution out;
  out.x0 = x0;
  out.c2 = c2;
  out.boundary = boundary;
  if (!best) return out;
  out.kind = SolutionKind::kTwoPhase;
  out.k = best->k;
  out.c1 = best->c;
  out.v_wall = best->summary.wall_speed;
  out.loss = best->summary.loss;
  out.ret = best->summary.ret;
  out.t_star = best->summary.t;
  out.v_star = best->summary.v_end;
  return out;
}

McPolicy pi_opt_x0(double x0, const SearchOptions& opts, const Phase2Solution* phase2) {
  AnalyticSolution sol = solve_two_phase(x0, opts, phase2);
  if (!sol.feasible()) sol = solve_single_phase(x0, opts);
  return sol.policy(opts);
}

AnalyticPolicy make_pi_ana(const WorstCasePolicyParams& params, const McParams& env) {
  SearchOptions opts;
  opts.env = env;
  opts.policy = params;
  Phase2Solution p2 = solve_phase2(opts);
  return AnalyticPolicy{params, std::make_shared<const PhaseBoundary>(std::move(p2.boundary))};
}

StrokeDecomposition stroke_decompose(const Trajectory& traj) {
  if (traj.states.empty()) throw DomainError("stroke_decompose: empty trajectory");
  StrokeDecomposition out;
  const auto& st = traj.states;
  out.times.push_back(0);
  out.positions.push_back(st[0].x);
  out.xi.push_back(0.0);
  out.wall_reset.push_back(false);

  double xi = 0.0;
  int last_sign = 0;
  for (std::size_t i = 1; i < st.size(); ++i) {
    const int sign = (st[i].v > 0.0) - (st[i].v < 0.0);
    if (sign != 0 && last_sign != 0 && sign != last_sign) {
      // The stroke ended at the last state before the new direction.
      out.times.push_back(st[i - 1].t);
      out.positions.push_back(st[i - 1].x);
      out.xi.push_back(xi);
      out.directions.push_back(last_sign);
      out.wall_reset.push_back(std::find(traj.wall_steps.begin(), traj.wall_steps.end(),
                                         st[i - 1].t) != traj.wall_steps.end());
    }
    if (sign != 0) last_sign = sign;
    xi += std::abs(st[i].x - st[i - 1].x);
  }
  out.times.push_back(st.back().t);
  out.positions.push_back(st.back().x);
  out.xi.push_back(xi);
  out.directions.push_back(last_sign);
  out.wall_reset.push_back(false);
  return out;
}

double goal_energy_residual(const Trajectory& traj, const McParams& params) {
  if (!traj.reached) throw DomainError("goal_energy_residual: goal not reached");
  const int start = traj.wall_steps.empty() ? 0 : traj.wall_steps.back();
  const McState& s = traj.states[static_cast<std::size_t>(start)];
  double work = 0.0;
  double climb = 0.0;  // U_g(x_*) accumulated as the discrete map does
  for (std::size_t t = static_cast<std::size_t>(start); t < traj.actions.size(); ++t) {
    const double dx = traj.states[t + 1].x - traj.states[t].x;
    work += traj.actions[t] * dx;
    climb += params.g * std::cos(3.0 * traj.states[t].x) * dx;
  }
  const McState& goal = traj.states.back();
  return params.a_max * work + 0.5 * s.v * s.v - climb - 0.5 * goal.v * goal.v;
}

double loss_spatial(const std::vector<double>& xs, const std::vector<double>& vs,
                    const std::vector<double>& alphas, double h) {
  if (xs.size() != vs.size() || alphas.size() + 1 > xs.size()) {
    throw ConfigError("loss_spatial: inconsistent sample counts");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double a2 = alphas[i] * alphas[i];
    const double speed = 0.5 * (std::abs(vs[i]) + std::abs(vs[i + 1]));
    loss += speed < 1e-9 ? a2 * h : a2 * std::abs(xs[i + 1] - xs[i]) / speed;
  }
  return loss;
}

double loss_spatial(const Trajectory& traj) {
  std::vector<double> xs;
  std::vector<double> vs;
  xs.reserve(traj.states.size());
  vs.reserve(traj.states.size());
  for (const McState& s : traj.states) {
    xs.push_back(s.x);
    vs.push_back(s.v);
  }
  return loss_spatial(xs, vs, traj.actions, 1.0);
}

double elliptic_k(double k) {
  if (!std::isfinite(k) || std::abs(k) >= 1.0) throw DomainError("elliptic_k: need |k| < 1");
  double a = 1.0;
  double b = std::sqrt(1.0 - k * k);
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double next_a = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = next_a;
  }
  return std::numbers::pi / (2.0 * a);
}

double oscillation_period(double x0, const McParams& params) {
  const double amplitude = 3.0 * x0 + std::numbers::pi / 2.0;
  return 4.0 / std::sqrt(3.0 * params.g) * elliptic_k(std::sin(amplitude / 2.0));
}

bool wall_feasible(double x_wall, const McParams& params) {
  if (!(x_wall < params.x_goal)) throw DomainError("wall must lie left of the goal");
  McParams p = params;
  p.x_min = x_wall;
  p.validate();
  const RolloutLimits limits{20000, false, 1};
  const RolloutSummary r =
      mc_simulate([](const McState&) { return 1.0; }, x_wall, 0.0, p, limits);
  return r.reached && !r.wall_hit;
}

FeasibilityScan wall_feasibility_scan(double lo, double hi, double step, const McParams& params) {
  if (!(step > 0.0) || !(lo <= hi)) throw ConfigError("feasibility scan needs lo <= hi, step > 0");
  FeasibilityScan out;
  out.step = step;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const bool ok = wall_feasible(x, params);
    out.walls.push_back(x);
    out.feasible.push_back(ok);
    if (!ok) {
      if (!out.infeasible_lo) out.infeasible_lo = x;
      out.infeasible_hi = x;
    }
  }
  return out;
}

McParams benchmark_variant(const VariantOverride& override_with, const McParams& base) {
  McParams p = base;
  if (override_with.x_min) p.x_min = *override_with.x_min;
  if (override_with.v_max) p.v_max = *override_with.v_max;
  p.validate();
  return p;
}

}  // namespace chebyrl
