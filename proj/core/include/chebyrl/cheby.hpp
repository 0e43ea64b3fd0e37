#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chebyrl {

/// Raw input interval mapped affinely onto [-1, 1].
struct Bounds {
  double lo = -1.0;
  double hi = 1.0;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Values of all (d+1)^n product polynomials T_{i1..in} at one scaled input,
/// flattened row-major with i1 slowest.
using BasisVector = std::vector<double>;

/// (d+1)^n; throws ConfigError for n < 1, d < 0 or sizes beyond 2^31.
std::size_t basis_size(int n, int d);

/// T_0(x) .. T_d(x) by the three-term recurrence. `out` must hold d+1 values.
void chebyshev_values(double x, int d, std::span<double> out);

/// Clamps each raw coordinate into its bounds, then maps to [-1, 1].
/// Throws ConfigError when lo >= hi and DomainError on non-finite input.
void scale_input(std::span<const double> raw, std::span<const Bounds> bounds, std::span<double> out);
std::vector<double> scale_input(std::span<const double> raw, std::span<const Bounds> bounds);

void basis_values(std::span<const double> x_scaled, int d, BasisVector& out);
BasisVector basis_values(std::span<const double> x_scaled, int d);

/// n-variate max-degree-d Chebyshev expansion with input scaling.
class ChebyModel {
 public:
  ChebyModel(int n, int d, std::vector<Bounds> bounds);
  ChebyModel(int n, int d, std::vector<Bounds> bounds, std::vector<double> coeffs);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] int degree() const { return d_; }
  [[nodiscard]] std::size_t size() const { return coeffs_.size(); }
  [[nodiscard]] std::span<const Bounds> bounds() const { return bounds_; }
  [[nodiscard]] std::span<const double> coeffs() const { return coeffs_; }
  [[nodiscard]] std::span<double> coeffs() { return coeffs_; }

  /// Flat index of the multi-index (i1, .., in).
  [[nodiscard]] std::size_t flat_index(std::span<const int> multi_index) const;

  /// Inner product of the coefficients with basis_values(scale_input(raw)).
  [[nodiscard]] double eval(std::span<const double> raw) const;
  /// As eval(raw), leaving the basis vector used in `basis`.
  double eval(std::span<const double> raw, BasisVector& basis) const;

  friend bool operator==(const ChebyModel&, const ChebyModel&) = default;

 private:
  int n_;
  int d_;
  std::vector<Bounds> bounds_;
  std::vector<double> coeffs_;
};

/// Tensor-product Gauss-Chebyshev rule with m nodes per dimension for
/// the integral of f(x) * prod_i (1 - x_i^2)^(-1/2) over [-1, 1]^n.
double gauss_chebyshev_integrate(const std::function<double(std::span<const double>)>& f, int n,
                                 int m);

/// <T_f, T_g>_w over [-1, 1]^n using 2d+1 quadrature nodes per dimension.
double weighted_inner_product(std::span<const int> f_index, std::span<const int> g_index, int d,
                              int n);

}  // namespace chebyrl
