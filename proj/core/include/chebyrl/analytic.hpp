#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "chebyrl/env.hpp"

namespace chebyrl {

/// Constants of the worst-case analytic policy.
struct WorstCasePolicyParams {
  double c_phase2 = 4.8358;
  double c_phase1 = 4.3346;
  double x_hat = -std::numbers::pi / 6.0;  // potential minimum
  double boot_radius = 0.01;
  double boot_action = 0.1;
};

/// Velocity profile v_b(x) of the optimal final stroke from (x_min, 0); the
/// region on or above it (with v >= 0) is phase 2.
class PhaseBoundary {
 public:
  PhaseBoundary() = default;
  /// `xs` must be strictly increasing.
  PhaseBoundary(std::vector<double> xs, std::vector<double> vs);

  /// Linear interpolation; nullopt outside [xs.front(), xs.back()].
  [[nodiscard]] std::optional<double> value_at(double x) const;
  /// v >= 0 and v >= v_b(x); ties count as phase 2.
  [[nodiscard]] bool contains(double x, double v) const;

  [[nodiscard]] const std::vector<double>& xs() const { return xs_; }
  [[nodiscard]] const std::vector<double>& vs() const { return vs_; }
  [[nodiscard]] bool empty() const { return xs_.empty(); }

 private:
  std::vector<double> xs_;
  std::vector<double> vs_;
};

/// alpha = clamp(C*v, -1, 1).
McPolicy proportional_policy(double c);

/// sign(v) * max(C(x, v)|v|, alpha_boot(x)) with C = c_phase2 inside the
/// boundary region and c_phase1 elsewhere. At v == 0 inside the boot band the
/// action is +boot_action so a car at rest near x_hat starts moving.
struct AnalyticPolicy {
  WorstCasePolicyParams params;
  std::shared_ptr<const PhaseBoundary> boundary;

  double operator()(const McState& s) const { return (*this)(s.x, s.v); }
  double operator()(double x, double v) const;
};

/// pi_ana at one state.
double pi_ana(const McState& state, const WorstCasePolicyParams& params,
              const PhaseBoundary& boundary);

struct SearchOptions {
  McParams env{};
  WorstCasePolicyParams policy{};  // supplies x_hat and the bootstrap
  double c_tol = 1e-8;
  double v_wall_tol = 1e-6;
  int k_max = 60;
  int search_t_max = 20000;  // horizon while locating the wall in phase 1
};

/// Smallest C that carries the car from (x_min, 0) to the goal in one stroke,
/// plus the boundary polyline sampled at every step of that stroke.
struct Phase2Solution {
  double c2 = 0.0;
  double loss = 0.0;
  int steps = 0;
  double v_star = 0.0;
  PhaseBoundary boundary;
};

Phase2Solution solve_phase2(const SearchOptions& opts = {});

enum class SolutionKind { kSinglePhase, kTwoPhase, kInfeasible };

const char* to_string(SolutionKind kind);

struct AnalyticSolution {
  SolutionKind kind = SolutionKind::kInfeasible;
  double x0 = 0.0;
  int k = 0;
  double c = 0.0;   // single phase
  double c1 = 0.0;  // two phase
  double c2 = 0.0;
  double v_wall = 0.0;
  double loss = 0.0;
  double ret = 0.0;
  int t_star = 0;
  double v_star = 0.0;
  std::shared_ptr<const PhaseBoundary> boundary;

  [[nodiscard]] bool feasible() const { return kind != SolutionKind::kInfeasible; }
  /// The policy realizing this solution.
  [[nodiscard]] McPolicy policy(const SearchOptions& opts = {}) const;
};

/// Wall-free k-stroke solutions for k = 2..k_max; returns the loss-minimal one.
AnalyticSolution solve_single_phase(double x0, const SearchOptions& opts = {});

/// Wall-assisted solutions: phase 1 swings up to x_min, phase 2 is one stroke
/// to the goal. `phase2` may be supplied to skip recomputing it.
AnalyticSolution solve_two_phase(double x0, const SearchOptions& opts = {},
                                 const Phase2Solution* phase2 = nullptr);

/// The per-start optimal policy: the two-phase solution for x0, falling back
/// to the single-phase one when no wall-assisted solution exists.
McPolicy pi_opt_x0(double x0, const SearchOptions& opts = {},
                   const Phase2Solution* phase2 = nullptr);

/// The worst-case policy with the reference constants and a computed boundary.
AnalyticPolicy make_pi_ana(const WorstCasePolicyParams& params = {}, const McParams& env = {});

/// Stroke structure of a rollout: boundaries are the last state before each
/// sign change of v (zeros skipped); a wall reset is such a boundary.
struct StrokeDecomposition {
  std::vector<int> times;          // t_0 = 0, ..., t_k = end of the last stroke
  std::vector<double> positions;   // x at each boundary
  std::vector<double> xi;          // unrolled coordinate at each boundary
  std::vector<int> directions;     // +1 / -1 per stroke
  std::vector<bool> wall_reset;    // boundary i > 0 ends at the wall
  [[nodiscard]] int strokes() const { return static_cast<int>(directions.size()); }
};

/// Throws DomainError for an empty trajectory.
StrokeDecomposition stroke_decompose(const Trajectory& traj);

/// Action work along the final wall-free segment minus the energy needed at
/// the goal: a_max*sum(alpha_t*dx_t) + v_s^2/2 - U_g(x_*) - v_*^2/2, with U_g
/// referenced to the segment start s and accumulated as sum(g*cos(3x_t)*dx_t),
/// the work the discrete dynamics actually charge. The closed-form U_g would
/// leave an O(g*v^2) error per step. Throws DomainError when the goal was not
/// reached.
double goal_energy_residual(const Trajectory& traj, const McParams& params = {});

/// Loss written as a spatial integral: sum alpha^2 |dx| / |v_mid| with the
/// trapezoid speed; steps with |v_mid| < 1e-9 contribute alpha^2 * h.
double loss_spatial(const std::vector<double>& xs, const std::vector<double>& vs,
                    const std::vector<double>& alphas, double h);
double loss_spatial(const Trajectory& traj);

/// K(k) = pi / (2 AGM(1, sqrt(1 - k^2))); throws DomainError for |k| >= 1.
double elliptic_k(double k);

/// T = 4/sqrt(3g) * K(sin(alpha/2)), alpha = 3 x0 + pi/2.
double oscillation_period(double x0, const McParams& params = {});

/// True when full throttle from rest at x_wall (with x_min = x_wall) reaches
/// the goal in a single stroke.
bool wall_feasible(double x_wall, const McParams& params = {});

struct FeasibilityScan {
  double step = 1e-3;
  std::vector<double> walls;
  std::vector<bool> feasible;
  /// Smallest and largest scanned wall positions that are infeasible.
  std::optional<double> infeasible_lo;
  std::optional<double> infeasible_hi;
};

FeasibilityScan wall_feasibility_scan(double lo = -1.2, double hi = 0.449, double step = 1e-3,
                                      const McParams& params = {});

/// Parameter overrides for the proposed harder benchmark variants.
struct VariantOverride {
  std::optional<double> x_min;
  std::optional<double> v_max;
};

/// Throws ConfigError when the result violates the environment invariants.
McParams benchmark_variant(const VariantOverride& override_with, const McParams& base = {});

}  // namespace chebyrl
