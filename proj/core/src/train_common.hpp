#pragma once

#include <chrono>
#include <cmath>
#include <span>

#include "chebyrl/policy.hpp"

namespace chebyrl::detail {

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline bool policy_finite(const GaussianChebyPolicy& p) {
  return all_finite(p.mu.coeffs()) && all_finite(p.sigma.coeffs()) &&
         (!p.critic || all_finite(p.critic->coeffs()));
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace chebyrl::detail
