#include "chebyrl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "chebyrl/errors.hpp"
#include "chebyrl/parallel.hpp"

namespace chebyrl {

SummaryStats summarize(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("summarize: empty sample");
  SummaryStats s;
  s.count = static_cast<long>(xs.size());
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(xs.size()));
  // Rounding in the sum can push the mean a hair outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

McPolicy mc_policy(const GaussianChebyPolicy& policy) {
  return [policy](const McState& s) {
    const double obs[2] = {s.x, s.v};
    return policy.output_gain * act_deterministic(policy, obs);
  };
}

PendulumPolicy pendulum_policy(const GaussianChebyPolicy& policy) {
  return [policy](const PendulumState& s) {
    const auto obs = s.observation();
    return policy.output_gain * act_deterministic(policy, obs);
  };
}

namespace {

// i-th of n evenly spaced points on [lo, hi], with both ends exact.
double grid_point(double lo, double hi, int i, int n) {
  return i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
}

}  // namespace

std::vector<double> start_grid(int n_points) {
  if (n_points < 1) throw ConfigError("start grid needs at least one point");
  if (n_points == 1) return {-0.5};
  std::vector<double> xs(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) xs[i] = grid_point(-0.6, -0.4, i, n_points);
  return xs;
}

namespace {

void aggregate(EvalReport& report, int t_max) {
  std::vector<double> rets;
  std::vector<double> ts;
  std::vector<double> vs;
  report.goal_failures = 0;
  for (const StartResult& r : report.per_start) {
    rets.push_back(r.ret);
    if (r.reached) {
      ts.push_back(r.t_star);
      vs.push_back(r.v_star);
    } else if (t_max > 0) {
      ++report.goal_failures;
    }
  }
  report.returns = summarize(rets);
  if (!ts.empty()) {
    report.t_star = summarize(ts);
    report.v_star = summarize(vs);
  }
}

}  // namespace

EvalReport eval_mc(const McPolicy& policy, int n_points, const McParams& params, int jobs) {
  return eval_mc([&policy](double) { return policy; }, n_points, params, jobs);
}

EvalReport eval_mc(const std::function<McPolicy(double)>& policy_for_start, int n_points,
                   const McParams& params, int jobs) {
  const std::vector<double> starts = start_grid(n_points);
  EvalReport report;
  report.env = "mountaincar";
  report.per_start.resize(starts.size());
  parallel_for(starts.size(), jobs, [&](std::size_t i) {
    const Trajectory traj = mc_rollout(policy_for_start(starts[i]), starts[i], params);
    StartResult& r = report.per_start[i];
    r.start = {starts[i]};
    r.ret = traj.ret;
    r.reached = traj.reached;
    r.t_star = traj.reached ? traj.t_star : params.t_max + 1;
    r.v_star = traj.v_star;
  });
  aggregate(report, params.t_max);
  return report;
}

void attach_regret(EvalReport& report, const EvalReport& reference) {
  if (report.per_start.size() != reference.per_start.size()) {
    throw ConfigError("regret needs reports from the same start grid");
  }
  report.regret = reference.returns.mean - report.returns.mean;
}

double policy_l2_distance(const McPolicy& a, const McPolicy& b, int nx, int nv) {
  if (nx < 2 || nv < 2) throw ConfigError("L2 grid needs at least 2 points per axis");
  double sq = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = grid_point(-1.2, 0.45, i, nx);
    for (int j = 0; j < nv; ++j) {
      const double v = grid_point(-0.07, 0.07, j, nv);
      const McState s{x, v, 0};
      const double d = std::clamp(a(s), -1.0, 1.0) - std::clamp(b(s), -1.0, 1.0);
      sq += d * d;
    }
  }
  return std::sqrt(sq / (static_cast<double>(nx) * nv));
}

EvalReport eval_pendulum(const PendulumPolicy& policy, int grid, const PendulumParams& params,
                         int jobs) {
  if (grid < 2) throw ConfigError("pendulum grid needs at least 2 points per axis");
  EvalReport report;
  report.env = "pendulum";
  const auto n = static_cast<std::size_t>(grid);
  report.per_start.resize(n * n);
  parallel_for(n * n, jobs, [&](std::size_t k) {
    const std::size_t i = k / n;
    const std::size_t j = k % n;
    const double theta0 = grid_point(-std::numbers::pi, std::numbers::pi, i, n);
    const double theta_dot0 = grid_point(-1.0, 1.0, j, n);
    PendulumState s{wrap_angle(theta0), theta_dot0, 0};
    double ret = 0.0;
    for (int t = 0; t < params.horizon; ++t) {
      const PendulumStepResult r = pendulum_step(s, policy(s), params);
      ret += r.reward;
      s = r.next;
    }
    StartResult& out = report.per_start[k];
    out.start = {theta0, theta_dot0};
    out.ret = ret;
    out.t_star = params.horizon;
  });
  aggregate(report, 0);
  return report;
}

Histogram histogram(const std::vector<double>& xs, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  const SummaryStats s = summarize(xs);
  Histogram h;
  const double lo = s.min;
  const double hi = s.max > s.min ? s.max : s.min + 1.0;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(grid_point(lo, hi, b, bins + 1));
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double x : xs) {
    auto b = static_cast<long>((x - lo) / (hi - lo) * bins);
    b = std::clamp<long>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

HeatmapGrid heatmap(const McPolicy& policy, int nx, int nv, std::optional<double> overlay_x0,
                    const McParams& params) {
  if (nx < 2 || nv < 2) throw ConfigError("heatmap needs at least 2 points per axis");
  HeatmapGrid g;
  g.nx = nx;
  g.nv = nv;
  for (int i = 0; i < nx; ++i) g.xs.push_back(grid_point(g.x_lo, g.x_hi, i, nx));
  for (int j = 0; j < nv; ++j) g.vs.push_back(grid_point(g.v_lo, g.v_hi, j, nv));
  g.actions.reserve(static_cast<std::size_t>(nx) * nv);
  for (double x : g.xs) {
    for (double v : g.vs) g.actions.push_back(std::clamp(policy({x, v, 0}), -1.0, 1.0));
  }
  if (overlay_x0) g.overlay = mc_rollout(policy, *overlay_x0, params);
  return g;
}

nlohmann::json to_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j{{"env", report.env},
                   {"points", report.per_start.size()},
                   {"returns", to_json(report.returns)},
                   {"goal_failures", report.goal_failures}};
  j["t_star"] = report.t_star ? to_json(*report.t_star) : nlohmann::json(nullptr);
  j["v_star"] = report.v_star ? to_json(*report.v_star) : nlohmann::json(nullptr);
  j["regret"] = report.regret ? nlohmann::json(*report.regret) : nlohmann::json(nullptr);
  j["l2_distance"] =
      report.l2_distance ? nlohmann::json(*report.l2_distance) : nlohmann::json(nullptr);
  return j;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << std::setprecision(17);
  if (report.env == "pendulum") {
    out << "theta0,theta_dot0,R\n";
    for (const StartResult& r : report.per_start) {
      out << r.start[0] << ',' << r.start[1] << ',' << r.ret << '\n';
    }
    return;
  }
  out << "x0,R,t_star,v_star\n";
  for (const StartResult& r : report.per_start) {
    out << r.start[0] << ',' << r.ret << ',' << r.t_star << ',' << r.v_star << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid) {
  out << "x,v,action\n" << std::setprecision(17);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.nv; ++j) {
      out << grid.xs[i] << ',' << grid.vs[j] << ','
          << grid.actions[static_cast<std::size_t>(i) * grid.nv + j] << '\n';
    }
  }
}

void write_density_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_lo,bin_hi,count\n" << std::setprecision(17);
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    out << hist.edges[b] << ',' << hist.edges[b + 1] << ',' << hist.counts[b] << '\n';
  }
}

}  // namespace chebyrl
