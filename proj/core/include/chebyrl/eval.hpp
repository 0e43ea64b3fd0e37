#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chebyrl/env.hpp"
#include "chebyrl/pendulum.hpp"
#include "chebyrl/policy.hpp"

namespace chebyrl {

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  long count = 0;
};

/// Throws DomainError on an empty sample.
SummaryStats summarize(const std::vector<double>& xs);

struct StartResult {
  std::vector<double> start;  // (x0) or (theta0, theta_dot0)
  double ret = 0.0;
  int t_star = 0;             // t_max + 1 when the goal was not reached
  double v_star = 0.0;
  bool reached = false;
};

struct EvalReport {
  std::string env;
  std::vector<StartResult> per_start;  // grid order
  SummaryStats returns;
  std::optional<SummaryStats> t_star;  // goal-reaching starts only
  std::optional<SummaryStats> v_star;
  int goal_failures = 0;
  std::optional<double> regret;
  std::optional<double> l2_distance;
};

/// Deterministic Mountain Car policy from a Chebyshev policy's mean head.
McPolicy mc_policy(const GaussianChebyPolicy& policy);

using PendulumPolicy = std::function<double(const PendulumState&)>;
/// Torque = output_gain * mu(observation).
PendulumPolicy pendulum_policy(const GaussianChebyPolicy& policy);

/// n evenly spaced starts on [-0.6, -0.4], both ends included.
std::vector<double> start_grid(int n_points);

EvalReport eval_mc(const McPolicy& policy, int n_points = 100, const McParams& params = {},
                   int jobs = 1);
/// As eval_mc with a policy built per start, e.g. a per-start optimum.
EvalReport eval_mc(const std::function<McPolicy(double)>& policy_for_start, int n_points,
                   const McParams& params = {}, int jobs = 1);

/// regret = mean(reference) - mean(report), reference from the same grid.
void attach_regret(EvalReport& report, const EvalReport& reference);

/// Root-mean-square action difference on an nx-by-nv grid over
/// [-1.2, 0.45] x [-0.07, 0.07], endpoints included.
double policy_l2_distance(const McPolicy& a, const McPolicy& b, int nx = 200, int nv = 200);

/// Returns over an n-by-n grid of starts: theta0 on [-pi, pi], theta_dot0 on [-1, 1].
EvalReport eval_pendulum(const PendulumPolicy& policy, int grid = 50,
                         const PendulumParams& params = {}, int jobs = 1);

struct Histogram {
  std::vector<double> edges;  // bins + 1 increasing edges
  std::vector<long> counts;
};

/// Equal-width bins over [min, max] of the sample; the last bin is closed.
Histogram histogram(const std::vector<double>& xs, int bins);

struct HeatmapGrid {
  int nx = 0;
  int nv = 0;
  double x_lo = -1.2;
  double x_hi = 0.45;
  double v_lo = -0.07;
  double v_hi = 0.07;
  std::vector<double> xs;
  std::vector<double> vs;
  std::vector<double> actions;  // actions[i * nv + j] at (xs[i], vs[j])
  std::optional<Trajectory> overlay;
};

HeatmapGrid heatmap(const McPolicy& policy, int nx, int nv,
                    std::optional<double> overlay_x0 = std::nullopt, const McParams& params = {});

nlohmann::json to_json(const SummaryStats& s);
nlohmann::json to_json(const EvalReport& report);

/// `x0,R,t_star,v_star` for Mountain Car, `theta0,theta_dot0,R` for Pendulum.
void write_eval_csv(std::ostream& out, const EvalReport& report);
/// `x,v,action`.
void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid);
/// `bin_lo,bin_hi,count`.
void write_density_csv(std::ostream& out, const Histogram& hist);

}  // namespace chebyrl
