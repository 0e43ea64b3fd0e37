#include "chebyrl/policy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chebyrl/errors.hpp"

namespace chebyrl {

namespace {

void fill_uniform(std::span<double> coeffs, Rng& rng, double amplitude) {
  for (double& c : coeffs) c = amplitude == 0.0 ? 0.0 : rng.uniform(-amplitude, amplitude);
}

}  // namespace

GaussianChebyPolicy init_policy(int n, int d_mu, int d_sigma, const std::vector<Bounds>& bounds,
                                const PolicyInit& init, std::optional<int> d_critic) {
  if (d_mu < 1) throw ConfigError("mean degree must be >= 1, got " + std::to_string(d_mu));
  if (d_sigma < 0 || d_sigma > 3) {
    throw ConfigError("sigma degree must be in 0..3, got " + std::to_string(d_sigma));
  }
  if (d_critic && *d_critic < 0) throw ConfigError("critic degree must be >= 0");
  if (!(init.amplitude >= 0.0) || !std::isfinite(init.amplitude)) {
    throw ConfigError("init amplitude must be finite and >= 0");
  }

  Rng rng(init.seed);
  ChebyModel mu(n, d_mu, bounds);
  ChebyModel sigma(n, d_sigma, bounds);
  fill_uniform(mu.coeffs(), rng, init.amplitude);
  fill_uniform(sigma.coeffs(), rng, init.amplitude);
  sigma.coeffs()[0] = init.sigma_const;

  std::optional<ChebyModel> critic;
  if (d_critic) {
    critic.emplace(n, *d_critic, bounds);
    fill_uniform(critic->coeffs(), rng, init.amplitude);
  }
  return GaussianChebyPolicy{std::move(mu), std::move(sigma), std::move(critic)};
}

double gaussian_log_prob(double action, double mean, double stddev) {
  const double z = (action - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - 0.5 * std::log(2.0 * std::numbers::pi);
}

void evaluate_heads(const GaussianChebyPolicy& policy, std::span<const double> state, ActSample& out) {
  out.mu = policy.mu.eval(state, out.basis_mu);
  const double raw_sigma = policy.sigma.eval(state, out.basis_sigma);
  if (!std::isfinite(out.mu) || !std::isfinite(raw_sigma)) {
    throw DivergenceError("policy head evaluated to a non-finite value");
  }
  out.floored = raw_sigma < policy.sigma_floor;
  out.sigma = out.floored ? policy.sigma_floor : raw_sigma;
}

void act_stochastic(const GaussianChebyPolicy& policy, std::span<const double> state, Rng& rng,
                    ActSample& out) {
  evaluate_heads(policy, state, out);
  out.action = out.mu + out.sigma * rng.normal();
  out.log_prob = gaussian_log_prob(out.action, out.mu, out.sigma);
  if (!std::isfinite(out.action) || !std::isfinite(out.log_prob)) {
    throw DivergenceError("sampled action is non-finite");
  }
}

ActSample act_stochastic(const GaussianChebyPolicy& policy, std::span<const double> state, Rng& rng) {
  ActSample out;
  act_stochastic(policy, state, rng, out);
  return out;
}

double act_deterministic(const GaussianChebyPolicy& policy, std::span<const double> state) {
  const double a = policy.mu.eval(state);
  if (!std::isfinite(a)) throw DivergenceError("policy mean is non-finite");
  return a;
}

void logprob_grad(const ActSample& sample, double action, PolicyGrad& out) {
  const double diff = action - sample.mu;
  const double s = sample.sigma;
  const double g_mu = diff / (s * s);
  const double g_sigma = sample.floored ? 0.0 : diff * diff / (s * s * s) - 1.0 / s;
  out.mu.resize(sample.basis_mu.size());
  out.sigma.resize(sample.basis_sigma.size());
  for (std::size_t i = 0; i < out.mu.size(); ++i) out.mu[i] = g_mu * sample.basis_mu[i];
  for (std::size_t i = 0; i < out.sigma.size(); ++i) out.sigma[i] = g_sigma * sample.basis_sigma[i];
}

PolicyGrad logprob_grad(const GaussianChebyPolicy& policy, std::span<const double> state,
                        double action) {
  ActSample sample;
  evaluate_heads(policy, state, sample);
  PolicyGrad out;
  logprob_grad(sample, action, out);
  return out;
}

}  // namespace chebyrl
