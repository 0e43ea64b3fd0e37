#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/policy.hpp"
#include "chebyrl/rng.hpp"

namespace chebyrl {
namespace {

const std::vector<Bounds> kMcBounds{{-1.2, 0.6}, {-0.07, 0.07}};

GaussianChebyPolicy random_policy(std::uint64_t seed, int d_mu = 3, int d_sigma = 2) {
  GaussianChebyPolicy p = init_policy(2, d_mu, d_sigma, kMcBounds, {seed, 0.3, 1.0});
  return p;
}

TEST(InitPolicy, ZeroAmplitudeGivesExactHeads) {
  const GaussianChebyPolicy p = init_policy(2, 3, 1, kMcBounds, {1, 0.0, 1.0});
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> s{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
    EXPECT_EQ(act_deterministic(p, s), 0.0);
    EXPECT_EQ(p.sigma.eval(s), 1.0);
  }
}

TEST(InitPolicy, SeededAndSized) {
  const GaussianChebyPolicy a = init_policy(2, 3, 1, kMcBounds, {17});
  const GaussianChebyPolicy b = init_policy(2, 3, 1, kMcBounds, {17});
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.mu.size(), 16u);
  EXPECT_EQ(a.sigma.coeffs()[0], 1.0);
  for (double c : a.mu.coeffs()) EXPECT_LE(std::abs(c), 1e-3);
  for (std::size_t i = 1; i < a.sigma.size(); ++i) EXPECT_LE(std::abs(a.sigma.coeffs()[i]), 1e-3);
}

TEST(InitPolicy, InvalidDegreesRejected) {
  EXPECT_THROW(init_policy(2, 0, 1, kMcBounds, {}), ConfigError);
  EXPECT_THROW(init_policy(2, 3, 4, kMcBounds, {}), ConfigError);
  EXPECT_THROW(init_policy(2, 3, -1, kMcBounds, {}), ConfigError);
  EXPECT_THROW(init_policy(2, 3, 1, kMcBounds, {}, -1), ConfigError);
}

TEST(ActStochastic, StandardNormalSamples) {
  const GaussianChebyPolicy p = init_policy(2, 3, 1, kMcBounds, {1, 0.0, 1.0});
  Rng rng(99);
  const std::vector<double> s{-0.5, 0.01};
  double sum = 0.0;
  double sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double a = act_stochastic(p, s, rng).action;
    sum += a;
    sq += a * a;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.03);
}

TEST(ActStochastic, LogProbAtModeAndDensity) {
  EXPECT_NEAR(gaussian_log_prob(0.3, 0.3, 0.5), -0.5 * std::log(2.0 * std::numbers::pi * 0.25),
              1e-14);
  const double a = 1.1;
  const double m = 0.2;
  const double sd = 0.7;
  const double density = std::exp(-0.5 * (a - m) * (a - m) / (sd * sd)) /
                         (sd * std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(gaussian_log_prob(a, m, sd), std::log(density), 1e-13);
}

TEST(ActStochastic, SigmaFloorApplies) {
  GaussianChebyPolicy p = init_policy(2, 3, 0, kMcBounds, {1, 0.0, -2.0});
  Rng rng(1);
  const std::vector<double> s{-0.5, 0.0};
  const ActSample a = act_stochastic(p, s, rng);
  EXPECT_EQ(a.sigma, p.sigma_floor);
  EXPECT_TRUE(a.floored);
  const PolicyGrad g = logprob_grad(p, s, a.action);
  for (double x : g.sigma) EXPECT_EQ(x, 0.0);
}

TEST(ActStochastic, NonFiniteHeadIsDivergence) {
  GaussianChebyPolicy p = random_policy(4);
  p.mu.coeffs()[3] = INFINITY;
  Rng rng(2);
  const std::vector<double> s{-0.5, 0.01};
  EXPECT_THROW(act_stochastic(p, s, rng), DivergenceError);
}

TEST(ActDeterministic, PureAndLinearInVelocity) {
  const double c = 4.8358;
  ChebyModel mu(2, 3, kMcBounds);
  // T_1 of the scaled velocity is v/0.07, so coefficient (0, 1) = C * 0.07.
  const std::vector<int> idx{0, 1};
  mu.coeffs()[mu.flat_index(idx)] = c * 0.07;
  const GaussianChebyPolicy p{mu, ChebyModel(2, 0, kMcBounds, {1.0}), std::nullopt};
  for (int i = 0; i < 100; ++i) {
    const double x = -1.2 + 1.8 * i / 99.0;
    const double v = -0.07 + 0.14 * ((i * 37) % 100) / 99.0;
    const std::vector<double> s{x, v};
    EXPECT_NEAR(act_deterministic(p, s), c * v, 1e-10);
    EXPECT_EQ(act_deterministic(p, s), act_deterministic(p, s));
  }
}

TEST(LogProbGrad, ZeroMuScoreAtMean) {
  const GaussianChebyPolicy p = random_policy(6);
  const std::vector<double> s{-0.4, 0.02};
  ActSample h;
  evaluate_heads(p, s, h);
  const PolicyGrad g = logprob_grad(p, s, h.mu);
  for (double x : g.mu) EXPECT_EQ(x, 0.0);
}

TEST(LogProbGrad, SigmaScoreVanishesOneSdAway) {
  const GaussianChebyPolicy p = init_policy(2, 3, 2, kMcBounds, {1, 0.0, 1.0});
  const std::vector<double> s{-0.4, 0.02};
  const PolicyGrad g = logprob_grad(p, s, 1.0);
  for (double x : g.sigma) EXPECT_NEAR(x, 0.0, 1e-15);
}

double log_prob_at(const GaussianChebyPolicy& p, std::span<const double> s, double a) {
  ActSample h;
  evaluate_heads(p, s, h);
  return gaussian_log_prob(a, h.mu, h.sigma);
}

TEST(LogProbGrad, MatchesCentralFiniteDifferences) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    GaussianChebyPolicy p = random_policy(100 + trial);
    p.sigma.coeffs()[0] = 1.5;  // keep sigma well above the floor
    const std::vector<double> s{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
    const double a = rng.normal(0.0, 1.5);
    const PolicyGrad g = logprob_grad(p, s, a);
    const double h = 1e-6;
    for (int head = 0; head < 2; ++head) {
      ChebyModel& m = head == 0 ? p.mu : p.sigma;
      const std::vector<double>& analytic = head == 0 ? g.mu : g.sigma;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double keep = m.coeffs()[i];
        m.coeffs()[i] = keep + h;
        const double up = log_prob_at(p, s, a);
        m.coeffs()[i] = keep - h;
        const double down = log_prob_at(p, s, a);
        m.coeffs()[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max(std::abs(fd), 1e-3);
        ASSERT_LT(std::abs(fd - analytic[i]) / scale, 1e-4)
            << "head " << head << " coeff " << i << " fd " << fd << " analytic " << analytic[i];
      }
    }
  }
}

TEST(LogProbGrad, ScoreHasZeroMean) {
  GaussianChebyPolicy p = random_policy(12, 2, 1);
  p.sigma.coeffs()[0] = 0.8;
  const std::vector<double> s{-0.7, -0.03};
  Rng rng(13);
  const int n = 100000;
  const std::size_t dims = p.mu.size() + p.sigma.size();
  std::vector<double> sum(dims, 0.0);
  std::vector<double> sq(dims, 0.0);
  ActSample sample;
  PolicyGrad g;
  for (int i = 0; i < n; ++i) {
    act_stochastic(p, s, rng, sample);
    logprob_grad(sample, sample.action, g);
    for (std::size_t k = 0; k < dims; ++k) {
      const double x = k < g.mu.size() ? g.mu[k] : g.sigma[k - g.mu.size()];
      sum[k] += x;
      sq[k] += x * x;
    }
  }
  for (std::size_t k = 0; k < dims; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt((sq[k] / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean), 3.0 * se + 1e-15) << "component " << k;
  }
}

}  // namespace
}  // namespace chebyrl
