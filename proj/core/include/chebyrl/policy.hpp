#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chebyrl/cheby.hpp"
#include "chebyrl/rng.hpp"

namespace chebyrl {

struct PolicyInit {
  std::uint64_t seed = 0;
  double amplitude = 1e-3;  // mu/critic/sigma coefficients ~ U[-amplitude, amplitude]
  double sigma_const = 1.0; // constant term of the sigma head
};

/// Gaussian policy N(mu(s), sigma(s)) with Chebyshev heads.
///
/// All policy math happens in normalized action units; environments receive
/// output_gain * action (1 for Mountain Car, max_torque for Pendulum).
struct GaussianChebyPolicy {
  ChebyModel mu;
  ChebyModel sigma;
  std::optional<ChebyModel> critic;
  double sigma_floor = 1e-4;
  double output_gain = 1.0;

  [[nodiscard]] int state_dim() const { return mu.dim(); }
};

/// Throws ConfigError for d_mu < 1, d_sigma outside 0..3, or a critic degree < 0
/// when a critic is requested.
GaussianChebyPolicy init_policy(int n, int d_mu, int d_sigma, const std::vector<Bounds>& bounds,
                                const PolicyInit& init, std::optional<int> d_critic = std::nullopt);

/// One stochastic action together with what the score function needs.
struct ActSample {
  double action = 0.0;    // unclamped Gaussian sample
  double log_prob = 0.0;  // log-density of `action`
  double mu = 0.0;
  double sigma = 0.0;     // sigma_eff
  bool floored = false;   // sigma head was below the floor
  BasisVector basis_mu;
  BasisVector basis_sigma;
};

/// Throws DivergenceError when a head evaluates to a non-finite value.
ActSample act_stochastic(const GaussianChebyPolicy& policy, std::span<const double> state, Rng& rng);
void act_stochastic(const GaussianChebyPolicy& policy, std::span<const double> state, Rng& rng,
                    ActSample& out);

/// mu(s) in normalized units.
double act_deterministic(const GaussianChebyPolicy& policy, std::span<const double> state);

double gaussian_log_prob(double action, double mean, double stddev);

struct PolicyGrad {
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// Score of `action` under the heads cached in `sample` (mu, sigma_eff, bases),
/// written into `out` (resized as needed).
void logprob_grad(const ActSample& sample, double action, PolicyGrad& out);
/// Score of `action` at `state`, evaluating the heads afresh.
PolicyGrad logprob_grad(const GaussianChebyPolicy& policy, std::span<const double> state,
                        double action);

/// Fills the mean/sigma/basis fields of `out` without sampling.
void evaluate_heads(const GaussianChebyPolicy& policy, std::span<const double> state, ActSample& out);

}  // namespace chebyrl
