#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "chebyrl/rng.hpp"

namespace chebyrl {

/// Pendulum-v1 constants.
struct PendulumParams {
  double max_torque = 2.0;
  double dt = 0.05;
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double max_speed = 8.0;
  int horizon = 200;

  void validate() const;
};

/// Angle wrapped into (-pi, pi]; theta = 0 is upright.
struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
  int t = 0;

  /// (cos theta, sin theta, theta_dot / max_speed), every channel in [-1, 1].
  [[nodiscard]] std::array<double, 3> observation(const PendulumParams& params = {}) const;
};

struct PendulumStepResult {
  PendulumState next;
  double reward = 0.0;
  bool truncated = false;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

PendulumStepResult pendulum_step(const PendulumState& state, double torque,
                                 const PendulumParams& params = {});

/// theta ~ U[-pi, pi], theta_dot ~ U[-1, 1].
PendulumState pendulum_reset(Rng& rng);

struct PendulumTrajectory {
  std::vector<PendulumState> states;
  std::vector<double> torques;
  std::vector<double> rewards;
  double ret = 0.0;
};

/// CSV `t,theta,theta_dot,torque,reward`.
void write_trajectory_csv(std::ostream& out, const PendulumTrajectory& traj);

}  // namespace chebyrl
