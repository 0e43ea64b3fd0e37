#include "chebyrl/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "chebyrl/errors.hpp"

namespace chebyrl {

void PendulumParams::validate() const {
  if (!(max_torque > 0 && dt > 0 && gravity > 0 && mass > 0 && length > 0 && max_speed > 0)) {
    throw ConfigError("pendulum constants must be positive");
  }
  if (horizon < 1) throw ConfigError("pendulum horizon must be at least 1");
}

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(theta + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod maps pi to -pi; keep the half-open interval (-pi, pi].
  return wrapped == -std::numbers::pi ? std::numbers::pi : wrapped;
}

std::array<double, 3> PendulumState::observation(const PendulumParams& params) const {
  return {std::cos(theta), std::sin(theta), theta_dot / params.max_speed};
}

PendulumStepResult pendulum_step(const PendulumState& state, double torque,
                                 const PendulumParams& params) {
  if (!std::isfinite(torque) || !std::isfinite(state.theta) || !std::isfinite(state.theta_dot)) {
    throw DomainError("pendulum_step: non-finite state or torque");
  }
  const double u = std::clamp(torque, -params.max_torque, params.max_torque);
  const double th = wrap_angle(state.theta);
  const double cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;

  const double accel = 3.0 * params.gravity / (2.0 * params.length) * std::sin(state.theta) +
                       3.0 / (params.mass * params.length * params.length) * u;
  const double theta_dot =
      std::clamp(state.theta_dot + accel * params.dt, -params.max_speed, params.max_speed);
  const double theta = state.theta + theta_dot * params.dt;

  PendulumStepResult result;
  result.next = {wrap_angle(theta), theta_dot, state.t + 1};
  result.reward = -cost;
  result.truncated = result.next.t >= params.horizon;
  return result;
}

PendulumState pendulum_reset(Rng& rng) {
  const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double theta_dot = rng.uniform(-1.0, 1.0);
  return {wrap_angle(theta), theta_dot, 0};
}

void write_trajectory_csv(std::ostream& out, const PendulumTrajectory& traj) {
  out << "t,theta,theta_dot,torque,reward\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const PendulumState& s = traj.states[i];
    out << s.t << ',' << s.theta << ',' << s.theta_dot << ',';
    if (i < traj.torques.size()) out << traj.torques[i] << ',' << traj.rewards[i];
    else out << ',';
    out << '\n';
  }
}

}  // namespace chebyrl
