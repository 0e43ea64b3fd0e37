#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chebyrl/cheby.hpp"

namespace chebyrl {

struct OpCount {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;
};

/// Largest degree accepted by the power-basis conversion.
inline constexpr int kMaxHornerDegree = 30;

/// Operations of one nested-Horner evaluation: (d+1)^n - 1 multiplications and
/// as many additions.
OpCount horner_op_count(int n, int d);

/// Exact monomial coefficients of T_0..T_d: row k holds the coefficients of
/// x^0..x^d in T_k, (d+1)x(d+1) row-major.
std::vector<std::int64_t> chebyshev_to_monomial(int d);

/// Evaluates a ChebyModel through its nested power-basis form.
///
/// The model is viewed as a polynomial in x1 whose coefficients are
/// polynomials in x2, and so on; each nesting level is evaluated with the
/// one-dimensional Horner scheme. A call costs (d+1)^n - 1 multiplications
/// and as many additions. The conversion happens once, in the constructor,
/// so the evaluator is a snapshot: later changes to the model are not seen.
class HornerEvaluator {
 public:
  /// Throws ConfigError when the degree exceeds kMaxHornerDegree.
  explicit HornerEvaluator(const ChebyModel& model);

  double eval(std::span<const double> raw, OpCount* counter = nullptr) const;

  [[nodiscard]] std::span<const double> power_coeffs() const { return power_; }
  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] int degree() const { return d_; }

 private:
  int n_;
  int d_;
  std::vector<Bounds> bounds_;
  std::vector<double> power_;
};

}  // namespace chebyrl
