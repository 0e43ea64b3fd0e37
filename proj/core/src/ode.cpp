#include "chebyrl/ode.hpp"

#include <cmath>

#include "chebyrl/errors.hpp"

namespace chebyrl {

namespace {

struct Deriv {
  double dx;
  double dv;
};

Deriv rhs(const ControlLaw& alpha, double x, double v, const McParams& p) {
  const double a = alpha ? alpha(x, v) : 0.0;
  return {v, p.a_max * a - p.g * std::cos(3.0 * x)};
}

}  // namespace

OdeState rk4_step(const ControlLaw& alpha, const OdeState& s, double h, const McParams& params) {
  const Deriv k1 = rhs(alpha, s.x, s.v, params);
  const Deriv k2 = rhs(alpha, s.x + 0.5 * h * k1.dx, s.v + 0.5 * h * k1.dv, params);
  const Deriv k3 = rhs(alpha, s.x + 0.5 * h * k2.dx, s.v + 0.5 * h * k2.dv, params);
  const Deriv k4 = rhs(alpha, s.x + h * k3.dx, s.v + h * k3.dv, params);
  return {s.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
          s.v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv)};
}

std::vector<OdeSample> integrate_ode(const ControlLaw& alpha, OdeState start, double h,
                                     double t_end, const McParams& params,
                                     const std::function<bool(const OdeSample&)>& stop) {
  if (!(h > 0.0) || !std::isfinite(t_end)) throw ConfigError("integrate_ode: need h > 0");
  std::vector<OdeSample> out;
  OdeState s = start;
  const auto steps = static_cast<long>(std::ceil(t_end / h));
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (long i = 0;; ++i) {
    const OdeSample sample{static_cast<double>(i) * h, s.x, s.v, alpha ? alpha(s.x, s.v) : 0.0};
    out.push_back(sample);
    if (i >= steps || (stop && stop(sample))) break;
    s = rk4_step(alpha, s, h, params);
  }
  return out;
}

double gravity_potential(double x, double x_ref, const McParams& params) {
  return params.g / 3.0 * (std::sin(3.0 * x) - std::sin(3.0 * x_ref));
}

double measure_period_rk4(double x0, double h, const McParams& params) {
  OdeState s{x0, 0.0};
  double t = 0.0;
  int crossings = 0;
  // A sign change of v between two steps brackets a turning point; the
  // crossing time is placed by linear interpolation in v.
  const double t_limit = 1e6;
  while (t < t_limit) {
    const OdeState next = rk4_step({}, s, h, params);
    const bool crossed = (s.v > 0.0 && next.v <= 0.0) || (s.v < 0.0 && next.v >= 0.0);
    if (crossed && t > 0.0) {
      ++crossings;
      if (crossings == 2) return t + h * s.v / (s.v - next.v);
    }
    s = next;
    t += h;
  }
  throw DomainError("measure_period_rk4: no oscillation detected");
}

}  // namespace chebyrl
