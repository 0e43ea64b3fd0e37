#include "chebyrl/cheby.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chebyrl/errors.hpp"

namespace chebyrl {

namespace {

constexpr std::size_t kMaxBasisSize = std::size_t{1} << 31;

// Per-thread scratch so eval() stays reentrant without allocating.
thread_local std::vector<double> tl_scaled;
thread_local BasisVector tl_basis;

}  // namespace

std::size_t basis_size(int n, int d) {
  if (n < 1) throw ConfigError("input dimension must be >= 1, got " + std::to_string(n));
  if (d < 0) throw ConfigError("degree must be >= 0, got " + std::to_string(d));
  std::size_t size = 1;
  for (int i = 0; i < n; ++i) {
    size *= static_cast<std::size_t>(d) + 1;
    if (size > kMaxBasisSize) throw ConfigError("basis size (d+1)^n is too large");
  }
  return size;
}

void chebyshev_values(double x, int d, std::span<double> out) {
  out[0] = 1.0;
  if (d == 0) return;
  out[1] = x;
  const double two_x = 2.0 * x;
  for (int k = 1; k < d; ++k) out[k + 1] = two_x * out[k] - out[k - 1];
}

void scale_input(std::span<const double> raw, std::span<const Bounds> bounds, std::span<double> out) {
  if (raw.size() != bounds.size()) {
    throw ConfigError("input has " + std::to_string(raw.size()) + " components, bounds have " +
                      std::to_string(bounds.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto [lo, hi] = bounds[i];
    if (!(lo < hi)) throw ConfigError("degenerate bounds in dimension " + std::to_string(i));
    if (!std::isfinite(raw[i])) throw DomainError("non-finite model input");
    const double x = raw[i] < lo ? lo : (raw[i] > hi ? hi : raw[i]);
    const double s = 2.0 * (x - lo) / (hi - lo) - 1.0;
    // Rounding can leave s a hair outside [-1, 1] at the endpoints.
    out[i] = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
  }
}

std::vector<double> scale_input(std::span<const double> raw, std::span<const Bounds> bounds) {
  std::vector<double> out(raw.size());
  scale_input(raw, bounds, out);
  return out;
}

void basis_values(std::span<const double> x_scaled, int d, BasisVector& out) {
  const int n = static_cast<int>(x_scaled.size());
  const std::size_t size = basis_size(n, d);
  const auto m = static_cast<std::size_t>(d) + 1;
  out.resize(size);

  // Build the outer product dimension by dimension: after processing the
  // first j dimensions, out[0 .. m^j) holds their product basis.
  thread_local std::vector<double> t;
  t.resize(m);
  chebyshev_values(x_scaled[0], d, t);
  std::copy(t.begin(), t.end(), out.begin());
  std::size_t filled = m;
  for (int j = 1; j < n; ++j) {
    chebyshev_values(x_scaled[j], d, t);
    // Expand in place from the back so no source entry is overwritten early.
    for (std::size_t p = filled; p-- > 0;) {
      const double head = out[p];
      for (std::size_t k = m; k-- > 0;) out[p * m + k] = head * t[k];
    }
    filled *= m;
  }
}

BasisVector basis_values(std::span<const double> x_scaled, int d) {
  BasisVector out;
  basis_values(x_scaled, d, out);
  return out;
}

ChebyModel::ChebyModel(int n, int d, std::vector<Bounds> bounds)
    : ChebyModel(n, d, std::move(bounds), std::vector<double>(basis_size(n, d), 0.0)) {}

ChebyModel::ChebyModel(int n, int d, std::vector<Bounds> bounds, std::vector<double> coeffs)
    : n_(n), d_(d), bounds_(std::move(bounds)), coeffs_(std::move(coeffs)) {
  const std::size_t size = basis_size(n, d);
  if (bounds_.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("expected " + std::to_string(n) + " bounds, got " +
                      std::to_string(bounds_.size()));
  }
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (!std::isfinite(bounds_[i].lo) || !std::isfinite(bounds_[i].hi) ||
        !(bounds_[i].lo < bounds_[i].hi)) {
      throw ConfigError("bounds of dimension " + std::to_string(i) + " must satisfy lo < hi");
    }
  }
  if (coeffs_.size() != size) {
    throw ConfigError("expected " + std::to_string(size) + " coefficients, got " +
                      std::to_string(coeffs_.size()));
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ConfigError("non-finite coefficient");
  }
}

std::size_t ChebyModel::flat_index(std::span<const int> multi_index) const {
  if (multi_index.size() != static_cast<std::size_t>(n_)) {
    throw ConfigError("multi-index has wrong length");
  }
  std::size_t flat = 0;
  for (int i : multi_index) {
    if (i < 0 || i > d_) throw ConfigError("multi-index entry out of range");
    flat = flat * (static_cast<std::size_t>(d_) + 1) + static_cast<std::size_t>(i);
  }
  return flat;
}

double ChebyModel::eval(std::span<const double> raw) const { return eval(raw, tl_basis); }

double ChebyModel::eval(std::span<const double> raw, BasisVector& basis) const {
  tl_scaled.resize(raw.size());
  scale_input(raw, bounds_, tl_scaled);
  basis_values(tl_scaled, d_, basis);
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) acc += coeffs_[i] * basis[i];
  return acc;
}

double gauss_chebyshev_integrate(const std::function<double(std::span<const double>)>& f, int n,
                                 int m) {
  if (n < 1 || m < 1) throw ConfigError("quadrature needs n >= 1 and m >= 1");
  std::vector<double> nodes(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    nodes[j] = std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * m));
  }
  const double weight = std::pow(std::numbers::pi / m, n);

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n), nodes[0]);
  double sum = 0.0;
  while (true) {
    sum += f(x);
    int dim = n - 1;
    while (dim >= 0 && ++idx[dim] == m) {
      idx[dim] = 0;
      x[dim] = nodes[0];
      --dim;
    }
    if (dim < 0) break;
    x[dim] = nodes[idx[dim]];
  }
  return weight * sum;
}

double weighted_inner_product(std::span<const int> f_index, std::span<const int> g_index, int d,
                              int n) {
  if (f_index.size() != static_cast<std::size_t>(n) ||
      g_index.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("multi-index length must equal n");
  }
  for (int i = 0; i < n; ++i) {
    if (f_index[i] < 0 || f_index[i] > d || g_index[i] < 0 || g_index[i] > d) {
      throw ConfigError("multi-index entry exceeds the degree bound");
    }
  }
  std::vector<double> t(static_cast<std::size_t>(d) + 1);
  auto integrand = [&](std::span<const double> x) {
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
      chebyshev_values(x[i], d, t);
      prod *= t[f_index[i]] * t[g_index[i]];
    }
    return prod;
  };
  // The integrand has degree <= 2d per variable; 2d+1 nodes integrate it exactly.
  return gauss_chebyshev_integrate(integrand, n, 2 * d + 1);
}

}  // namespace chebyrl
