#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chebyrl/rng.hpp"

namespace chebyrl {

/// Constants of MountainCarContinuous-v0.
struct McParams {
  double a_max = 0.0015;
  double g = 0.0025;
  double x_min = -1.2;
  double x_max = 0.6;
  double v_max = 0.07;
  double x_goal = 0.45;
  double v_goal = 0.0;
  int t_max = 999;
  double goal_bonus = 100.0;
  double action_cost = 0.1;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct McState {
  double x = 0.0;
  double v = 0.0;
  int t = 0;
};

struct StepResult {
  McState next;
  double reward = 0.0;
  bool terminated = false;  // goal reached
  bool truncated = false;   // step limit reached without the goal
  bool wall_hit = false;    // inelastic clamp at x_min this step
  double impact_speed = 0.0;  // |v| discarded by the wall clamp
};

/// One environment transition. The action is clamped to [-1, 1]; the reward
/// charges the clamped action. Throws DomainError on non-finite input.
StepResult mc_step(const McState& state, double action, const McParams& params = {});

/// Start state with x0 ~ U[-0.6, -0.4] drawn from `rng`, or the override.
McState mc_reset(Rng& rng, std::optional<double> x0_override = std::nullopt,
                 const McParams& params = {});
McState mc_reset(std::uint64_t seed, std::optional<double> x0_override = std::nullopt,
                 const McParams& params = {});

using McPolicy = std::function<double(const McState&)>;

struct Trajectory {
  std::vector<McState> states;  // states[0] is the start state
  std::vector<double> actions;  // clamped actions, one per step
  std::vector<double> rewards;
  std::vector<int> wall_steps;  // step indices (1-based) where the wall was hit
  std::vector<double> wall_speeds;  // impact speed of each wall hit
  double ret = 0.0;             // R = goal_bonus*[reached] - action_cost*loss
  double loss = 0.0;            // sum of squared actions
  bool reached = false;
  int t_star = 0;               // steps taken (== t_max when not reached)
  double v_star = 0.0;          // velocity on the terminating step

  [[nodiscard]] std::size_t steps() const { return actions.size(); }
};

/// Runs `policy` from (x0, v0) until the goal or the step limit.
Trajectory mc_rollout(const McPolicy& policy, double x0, const McParams& params = {},
                      double v0 = 0.0);

/// Cheap summary of a rollout for search loops; no per-step storage.
struct RolloutSummary {
  bool reached = false;
  bool wall_hit = false;     // stopped at, or passed through, a wall contact
  int t = 0;                 // steps taken
  int strokes = 1;           // 1 + sign changes of v, ignoring zeros
  double loss = 0.0;
  double v_end = 0.0;
  double wall_speed = 0.0;   // impact speed of the first wall contact
  double ret = 0.0;
};

struct RolloutLimits {
  int t_max = 999;
  bool stop_at_wall = false;
  /// Abort once this many strokes have started (0 disables).
  int max_strokes = 0;
};

/// Allocation-free rollout honoring `limits` instead of params.t_max.
template <class Policy>
RolloutSummary mc_simulate(Policy&& policy, double x0, double v0, const McParams& params,
                           const RolloutLimits& limits);

/// CSV `t,x,v,action,reward`; row t holds the state before step t+1 and the
/// action/reward of that step. The final state row has empty action/reward.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

template <class Policy>
RolloutSummary mc_simulate(Policy&& policy, double x0, double v0, const McParams& params,
                           const RolloutLimits& limits) {
  RolloutSummary out;
  McState state{x0, v0, 0};
  int last_sign = 0;
  while (state.t < limits.t_max) {
    double a = policy(state);
    a = a < -1.0 ? -1.0 : (a > 1.0 ? 1.0 : a);
    const StepResult step = mc_step(state, a, params);
    out.loss += a * a;
    state = step.next;
    const int sign = (state.v > 0.0) - (state.v < 0.0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++out.strokes;
      last_sign = sign;
    }
    if (limits.max_strokes > 0 && out.strokes > limits.max_strokes) break;
    if (step.wall_hit && !out.wall_hit) {
      out.wall_hit = true;
      out.wall_speed = step.impact_speed;
      if (limits.stop_at_wall) break;
    }
    if (step.terminated) {
      out.reached = true;
      break;
    }
  }
  out.t = state.t;
  out.v_end = state.v;
  out.ret = (out.reached ? params.goal_bonus : 0.0) - params.action_cost * out.loss;
  return out;
}

}  // namespace chebyrl
