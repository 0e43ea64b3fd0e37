#include "chebyrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "chebyrl/errors.hpp"

namespace chebyrl {

void McParams::validate() const {
  const double values[] = {a_max, g, x_min, x_max, v_max, x_goal, v_goal, goal_bonus, action_cost};
  for (double value : values) {
    if (!std::isfinite(value)) throw ConfigError("mountain car parameters must be finite");
  }
  if (!(x_min < x_goal && x_goal <= x_max)) {
    throw ConfigError("mountain car bounds require x_min < x_goal <= x_max");
  }
  if (!(a_max > 0.0 && g > 0.0 && v_max > 0.0)) {
    throw ConfigError("a_max, g and v_max must be positive");
  }
  if (t_max < 1) throw ConfigError("t_max must be at least 1");
}

StepResult mc_step(const McState& state, double action, const McParams& params) {
  if (!std::isfinite(action) || !std::isfinite(state.x) || !std::isfinite(state.v)) {
    throw DomainError("mc_step: non-finite state or action");
  }
  const double force = std::clamp(action, -1.0, 1.0);

  double v = state.v + force * params.a_max - params.g * std::cos(3.0 * state.x);
  v = std::clamp(v, -params.v_max, params.v_max);
  double x = state.x + v;
  x = std::min(x, params.x_max);

  StepResult result;
  if (x <= params.x_min) {
    x = params.x_min;
    if (v < 0.0) {
      result.impact_speed = -v;
      v = 0.0;
      result.wall_hit = true;
    }
  }
  result.next = {x, v, state.t + 1};
  result.terminated = x >= params.x_goal && v >= params.v_goal;
  result.truncated = !result.terminated && result.next.t >= params.t_max;
  result.reward = -params.action_cost * force * force + (result.terminated ? params.goal_bonus : 0.0);
  return result;
}

McState mc_reset(Rng& rng, std::optional<double> x0_override, const McParams& params) {
  if (x0_override) {
    const double x0 = *x0_override;
    if (!std::isfinite(x0) || x0 < params.x_min || x0 > params.x_max) {
      throw DomainError("mc_reset: x0 override outside [x_min, x_max]");
    }
    return {x0, 0.0, 0};
  }
  return {rng.uniform(-0.6, -0.4), 0.0, 0};
}

McState mc_reset(std::uint64_t seed, std::optional<double> x0_override, const McParams& params) {
  Rng rng(seed);
  return mc_reset(rng, x0_override, params);
}

Trajectory mc_rollout(const McPolicy& policy, double x0, const McParams& params, double v0) {
  Trajectory traj;
  McState state{x0, v0, 0};
  traj.states.reserve(static_cast<std::size_t>(params.t_max) + 1);
  traj.states.push_back(state);
  while (state.t < params.t_max) {
    const double action = std::clamp(policy(state), -1.0, 1.0);
    const StepResult step = mc_step(state, action, params);
    traj.actions.push_back(action);
    traj.rewards.push_back(step.reward);
    traj.loss += action * action;
    if (step.wall_hit) {
      traj.wall_steps.push_back(step.next.t);
      traj.wall_speeds.push_back(step.impact_speed);
    }
    state = step.next;
    traj.states.push_back(state);
    if (step.terminated) {
      traj.reached = true;
      traj.v_star = state.v;
      break;
    }
  }
  traj.t_star = state.t;
  traj.ret = (traj.reached ? params.goal_bonus : 0.0) - params.action_cost * traj.loss;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,v,action,reward\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const McState& s = traj.states[i];
    out << s.t << ',' << s.x << ',' << s.v << ',';
    if (i < traj.actions.size()) out << traj.actions[i] << ',' << traj.rewards[i];
    else out << ',';
    out << '\n';
  }
}

}  // namespace chebyrl
