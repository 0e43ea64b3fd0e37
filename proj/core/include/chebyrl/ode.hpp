#pragma once

#include <functional>
#include <vector>

#include "chebyrl/env.hpp"

namespace chebyrl {

/// Continuous-time Mountain Car x'' = a_max*alpha(x, x') - g*cos(3x), time in
/// environment steps. Used only for validation; searches use the discrete env.
struct OdeState {
  double x = 0.0;
  double v = 0.0;
};

using ControlLaw = std::function<double(double x, double v)>;

/// One classical RK4 step with a control that is re-evaluated at each stage.
OdeState rk4_step(const ControlLaw& alpha, const OdeState& s, double h, const McParams& params = {});

struct OdeSample {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double alpha = 0.0;  // control at the sample
};

/// Integrates with fixed step h until t_end or until `stop` returns true.
/// Walls and speed limits are not applied.
std::vector<OdeSample> integrate_ode(const ControlLaw& alpha, OdeState start, double h,
                                     double t_end, const McParams& params = {},
                                     const std::function<bool(const OdeSample&)>& stop = {});

/// U_g(x) = (g/3)(sin 3x - sin 3x_ref).
double gravity_potential(double x, double x_ref, const McParams& params = {});

/// Period of the zero-action oscillation from rest at x0, measured by RK4:
/// time between the start and the second return to zero velocity.
double measure_period_rk4(double x0, double h, const McParams& params = {});

}  // namespace chebyrl
