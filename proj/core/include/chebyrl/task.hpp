#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chebyrl/cheby.hpp"
#include "chebyrl/env.hpp"
#include "chebyrl/pendulum.hpp"
#include "chebyrl/rng.hpp"

namespace chebyrl {

enum class EnvKind { kMountainCar, kPendulum };

const char* to_string(EnvKind kind);
/// Accepts "mountaincar" and "pendulum"; throws ConfigError otherwise.
EnvKind parse_env(const std::string& name);

struct TaskStep {
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;

  [[nodiscard]] bool done() const { return terminated || truncated; }
};

/// Uniform view of an environment for the trainers: observations in raw
/// units with fixed bounds, actions in normalized units.
class Task {
 public:
  virtual ~Task() = default;

  [[nodiscard]] virtual EnvKind kind() const = 0;
  [[nodiscard]] virtual int obs_dim() const = 0;
  [[nodiscard]] virtual std::vector<Bounds> obs_bounds() const = 0;
  /// Environment action per unit of policy output.
  [[nodiscard]] virtual double output_gain() const = 0;

  virtual void reset(Rng& rng) = 0;
  virtual void observe(std::span<double> out) const = 0;
  /// Applies output_gain() * action.
  virtual TaskStep step(double action) = 0;
};

using TaskFactory = std::function<std::unique_ptr<Task>()>;

class MountainCarTask final : public Task {
 public:
  explicit MountainCarTask(McParams params = {});

  [[nodiscard]] EnvKind kind() const override { return EnvKind::kMountainCar; }
  [[nodiscard]] int obs_dim() const override { return 2; }
  [[nodiscard]] std::vector<Bounds> obs_bounds() const override;
  [[nodiscard]] double output_gain() const override { return 1.0; }

  void reset(Rng& rng) override;
  void reset_to(double x0);
  void observe(std::span<double> out) const override;
  TaskStep step(double action) override;

  [[nodiscard]] const McState& state() const { return state_; }

 private:
  McParams params_;
  McState state_;
};

class PendulumTask final : public Task {
 public:
  explicit PendulumTask(PendulumParams params = {});

  [[nodiscard]] EnvKind kind() const override { return EnvKind::kPendulum; }
  [[nodiscard]] int obs_dim() const override { return 3; }
  [[nodiscard]] std::vector<Bounds> obs_bounds() const override;
  [[nodiscard]] double output_gain() const override { return params_.max_torque; }

  void reset(Rng& rng) override;
  void reset_to(double theta, double theta_dot);
  void observe(std::span<double> out) const override;
  TaskStep step(double action) override;

  [[nodiscard]] const PendulumState& state() const { return state_; }

 private:
  PendulumParams params_;
  PendulumState state_;
};

TaskFactory task_factory(EnvKind kind);

}  // namespace chebyrl
