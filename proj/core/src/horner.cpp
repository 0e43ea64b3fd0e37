#include "chebyrl/horner.hpp"

#include <string>

#include "chebyrl/errors.hpp"

namespace chebyrl {

OpCount horner_op_count(int n, int d) {
  const std::uint64_t ops = basis_size(n, d) - 1;
  return {ops, ops};
}

std::vector<std::int64_t> chebyshev_to_monomial(int d) {
  if (d < 0 || d > kMaxHornerDegree) {
    throw ConfigError("power-basis conversion supports degrees 0.." +
                      std::to_string(kMaxHornerDegree) + ", got " + std::to_string(d));
  }
  const auto m = static_cast<std::size_t>(d) + 1;
  std::vector<std::int64_t> c(m * m, 0);
  c[0] = 1;
  if (d >= 1) c[m + 1] = 1;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    // T_{k+1} = 2x T_k - T_{k-1}
    for (std::size_t j = 0; j < m; ++j) {
      std::int64_t v = -c[(k - 1) * m + j];
      if (j > 0) v += 2 * c[k * m + j - 1];
      c[(k + 1) * m + j] = v;
    }
  }
  return c;
}

HornerEvaluator::HornerEvaluator(const ChebyModel& model)
    : n_(model.dim()),
      d_(model.degree()),
      bounds_(model.bounds().begin(), model.bounds().end()),
      power_(model.coeffs().begin(), model.coeffs().end()) {
  const std::vector<std::int64_t> conv = chebyshev_to_monomial(d_);
  const auto m = static_cast<std::size_t>(d_) + 1;

  // Change basis along one axis at a time: P[.., j, ..] = sum_k P[.., k, ..] * conv[k][j].
  std::vector<double> line(m);
  std::size_t stride = power_.size();
  for (int axis = 0; axis < n_; ++axis) {
    stride /= m;
    const std::size_t block = stride * m;
    for (std::size_t base = 0; base < power_.size(); base += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        for (std::size_t j = 0; j < m; ++j) {
          double acc = 0.0;
          for (std::size_t k = j; k < m; ++k) {
            acc += power_[base + k * stride + inner] * static_cast<double>(conv[k * m + j]);
          }
          line[j] = acc;
        }
        for (std::size_t j = 0; j < m; ++j) power_[base + j * stride + inner] = line[j];
      }
    }
  }
}

double HornerEvaluator::eval(std::span<const double> raw, OpCount* counter) const {
  thread_local std::vector<double> scaled;
  thread_local std::vector<double> work;
  scaled.resize(raw.size());
  scale_input(raw, bounds_, scaled);

  const auto m = static_cast<std::size_t>(d_) + 1;
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;

  // Innermost dimension first: each contiguous block of m coefficients is a
  // polynomial in x_n; Horner collapses it to one value, leaving a tensor of
  // one fewer dimension whose entries are coefficients in x_{n-1}.
  const double* src = power_.data();
  std::size_t count = power_.size();
  work.resize(count / m);
  for (int axis = n_ - 1; axis >= 0; --axis) {
    const double x = scaled[axis];
    const std::size_t blocks = count / m;
    for (std::size_t b = 0; b < blocks; ++b) {
      const double* p = src + b * m;
      double r = p[m - 1];
      for (std::size_t j = m - 1; j-- > 0;) r = r * x + p[j];
      work[b] = r;
    }
    mults += blocks * (m - 1);
    adds += blocks * (m - 1);
    src = work.data();
    count = blocks;
  }
  if (counter != nullptr) {
    counter->mults += mults;
    counter->adds += adds;
  }
  return src[0];
}

}  // namespace chebyrl
