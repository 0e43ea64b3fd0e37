#include "chebyrl/task.hpp"

#include "chebyrl/errors.hpp"

namespace chebyrl {

const char* to_string(EnvKind kind) {
  return kind == EnvKind::kMountainCar ? "mountaincar" : "pendulum";
}

EnvKind parse_env(const std::string& name) {
  if (name == "mountaincar") return EnvKind::kMountainCar;
  if (name == "pendulum") return EnvKind::kPendulum;
  throw ConfigError("unknown environment '" + name + "' (expected mountaincar or pendulum)");
}

MountainCarTask::MountainCarTask(McParams params) : params_(params) { params_.validate(); }

std::vector<Bounds> MountainCarTask::obs_bounds() const {
  return {{params_.x_min, params_.x_max}, {-params_.v_max, params_.v_max}};
}

void MountainCarTask::reset(Rng& rng) { state_ = mc_reset(rng, std::nullopt, params_); }

void MountainCarTask::reset_to(double x0) { state_ = {x0, 0.0, 0}; }

void MountainCarTask::observe(std::span<double> out) const {
  out[0] = state_.x;
  out[1] = state_.v;
}

TaskStep MountainCarTask::step(double action) {
  const StepResult r = mc_step(state_, action, params_);
  state_ = r.next;
  return {r.reward, r.terminated, r.truncated};
}

PendulumTask::PendulumTask(PendulumParams params) : params_(params) { params_.validate(); }

std::vector<Bounds> PendulumTask::obs_bounds() const { return {{-1, 1}, {-1, 1}, {-1, 1}}; }

void PendulumTask::reset(Rng& rng) { state_ = pendulum_reset(rng); }

void PendulumTask::reset_to(double theta, double theta_dot) {
  state_ = {wrap_angle(theta), theta_dot, 0};
}

void PendulumTask::observe(std::span<double> out) const {
  const auto obs = state_.observation(params_);
  out[0] = obs[0];
  out[1] = obs[1];
  out[2] = obs[2];
}

TaskStep PendulumTask::step(double action) {
  const PendulumStepResult r = pendulum_step(state_, params_.max_torque * action, params_);
  state_ = r.next;
  return {r.reward, false, r.truncated};
}

TaskFactory task_factory(EnvKind kind) {
  if (kind == EnvKind::kMountainCar) return [] { return std::make_unique<MountainCarTask>(); };
  return [] { return std::make_unique<PendulumTask>(); };
}

}  // namespace chebyrl
