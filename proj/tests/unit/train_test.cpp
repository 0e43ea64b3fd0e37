#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/rng.hpp"
#include "chebyrl/train.hpp"

namespace chebyrl {
namespace {

// Two fixed states visited in order; reward -(a - 1)^2 in the first and
// -a^2 in the second, so the expected return has a closed-form gradient.
class TwoStepTask final : public Task {
 public:
  [[nodiscard]] EnvKind kind() const override { return EnvKind::kMountainCar; }
  [[nodiscard]] int obs_dim() const override { return 1; }
  [[nodiscard]] std::vector<Bounds> obs_bounds() const override { return {{-1.0, 1.0}}; }
  [[nodiscard]] double output_gain() const override { return 1.0; }
  void reset(Rng&) override { t_ = 0; }
  void observe(std::span<double> out) const override { out[0] = t_ == 0 ? 0.5 : -0.5; }
  TaskStep step(double a) override {
    const double r = t_ == 0 ? -(a - 1.0) * (a - 1.0) : -a * a;
    ++t_;
    return {r, t_ == 2, false};
  }

 private:
  int t_ = 0;
};

TEST(ReinforceGradient, SingleStepUndiscounted) {
  const GaussianChebyPolicy p = init_policy(1, 2, 1, {{-1.0, 1.0}}, {3, 0.3, 1.0});
  const std::vector<double> obs{0.2};
  const std::vector<double> act{0.7};
  const std::vector<double> rew{-2.5};
  const PolicyGrad g = reinforce_gradient(p, obs, act, rew, 0.0, true);
  const PolicyGrad score = logprob_grad(p, obs, 0.7);
  for (std::size_t i = 0; i < g.mu.size(); ++i) EXPECT_DOUBLE_EQ(g.mu[i], -2.5 * score.mu[i]);
  for (std::size_t i = 0; i < g.sigma.size(); ++i) {
    EXPECT_DOUBLE_EQ(g.sigma[i], -2.5 * score.sigma[i]);
  }
}

TEST(ReinforceGradient, UnbiasedOnTwoStepTask) {
  GaussianChebyPolicy p = init_policy(1, 1, 1, {{-1.0, 1.0}}, {5, 0.3, 1.0});
  p.sigma.coeffs()[0] = 0.8;
  const double gamma = 0.9;
  // Exact gradient of E[r0 + gamma r1]: d/dmu E[-(a-1)^2] = -2(mu-1),
  // d/dsigma = -2 sigma; the basis at state s is (1, s).
  const double s0 = 0.5;
  const double s1 = -0.5;
  auto mu_at = [&](double s) { return p.mu.coeffs()[0] + p.mu.coeffs()[1] * s; };
  auto sd_at = [&](double s) { return p.sigma.coeffs()[0] + p.sigma.coeffs()[1] * s; };
  const std::vector<double> exact{
      -2.0 * (mu_at(s0) - 1.0) + gamma * -2.0 * mu_at(s1),
      -2.0 * (mu_at(s0) - 1.0) * s0 + gamma * -2.0 * mu_at(s1) * s1,
      -2.0 * sd_at(s0) + gamma * -2.0 * sd_at(s1),
      -2.0 * sd_at(s0) * s0 + gamma * -2.0 * sd_at(s1) * s1};

  TwoStepTask task;
  Rng rng(2718);
  const int n = 100000;
  std::vector<double> sum(4, 0.0);
  std::vector<double> sq(4, 0.0);
  std::vector<double> obs(2);
  std::vector<double> act(2);
  std::vector<double> rew(2);
  std::vector<double> o(1);
  for (int e = 0; e < n; ++e) {
    task.reset(rng);
    for (int t = 0; t < 2; ++t) {
      task.observe(o);
      obs[t] = o[0];
      act[t] = act_stochastic(p, o, rng).action;
      rew[t] = task.step(act[t]).reward;
    }
    const PolicyGrad g = reinforce_gradient(p, obs, act, rew, gamma, true);
    const double x[4] = {g.mu[0], g.mu[1], g.sigma[0], g.sigma[1]};
    for (int k = 0; k < 4; ++k) {
      sum[k] += x[k];
      sq[k] += x[k] * x[k];
    }
  }
  for (int k = 0; k < 4; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt((sq[k] / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - exact[k]), 3.0 * se) << "component " << k << " mean " << mean
                                                   << " exact " << exact[k];
  }
}

TEST(Reinforce, DivergenceIsRecordedNotThrown) {
  ReinforceConfig c;
  c.episodes = 20;
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.lr = 1e300;
  const GaussianChebyPolicy init =
      init_policy(2, 3, 1, task_factory(EnvKind::kMountainCar)()->obs_bounds(), {1});
  const TrainRun run = train_reinforce(task_factory(EnvKind::kMountainCar), init, c);
  EXPECT_TRUE(run.diverged);
  EXPECT_FALSE(run.policy.has_value());
  EXPECT_FALSE(run.divergence_reason.empty());
}

TEST(Reinforce, SgdMostlyFailsOnMountainCar) {
  ProtocolConfig c;
  c.algo = Algo::kReinforce;
  c.reinforce.optimizer.kind = OptimizerKind::kSgd;
  c.reinforce.optimizer.weight_decay = 0.0;
  const ProtocolResult r = train_protocol(c);
  int failed = 0;
  for (const RunStats& s : r.runs) failed += s.run.diverged || s.eval_mean < 0.0;
  EXPECT_GT(failed, c.runs / 2);
}

TEST(Ars, SingleDirectionMovesTowardBetterSide) {
  std::vector<double> theta{0.0, 0.0};
  const std::vector<std::vector<double>> deltas{{1.0, -2.0}};
  ASSERT_TRUE(ars_update(theta, deltas, {2.0}, {1.0}, 1, 0.1));
  EXPECT_GT(theta[0], 0.0);
  EXPECT_LT(theta[1], 0.0);
  EXPECT_NEAR(theta[1] / theta[0], -2.0, 1e-12);
}

TEST(Ars, FlatReturnsSkipUpdate) {
  std::vector<double> theta{0.3};
  EXPECT_FALSE(ars_update(theta, {{1.0}, {-1.0}}, {5.0, 5.0}, {5.0, 5.0}, 2, 0.1));
  EXPECT_EQ(theta[0], 0.3);
}

TEST(Ars, ConstantShiftInvariance) {
  Rng rng(8);
  std::vector<std::vector<double>> deltas(8, std::vector<double>(5));
  std::vector<double> rp(8);
  std::vector<double> rm(8);
  for (auto& d : deltas) {
    for (double& x : d) x = rng.normal();
  }
  for (int i = 0; i < 8; ++i) {
    rp[i] = rng.uniform(-10.0, 10.0);
    rm[i] = rng.uniform(-10.0, 10.0);
  }
  std::vector<double> a(5, 0.1);
  std::vector<double> b(5, 0.1);
  ASSERT_TRUE(ars_update(a, deltas, rp, rm, 4, 0.02));
  for (double& r : rp) r += 1234.5;
  for (double& r : rm) r += 1234.5;
  ASSERT_TRUE(ars_update(b, deltas, rp, rm, 4, 0.02));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Ars, SolvesQuadraticBandit) {
  std::vector<double> theta{0.0};
  Rng rng(21);
  const double nu = 0.05;
  auto reward = [](double t) { return -(t - 3.0) * (t - 3.0); };
  int iterations = 0;
  for (; iterations < 500 && std::abs(theta[0] - 3.0) >= 0.05; ++iterations) {
    std::vector<std::vector<double>> deltas(8, std::vector<double>(1));
    std::vector<double> rp(8);
    std::vector<double> rm(8);
    for (int i = 0; i < 8; ++i) {
      deltas[i][0] = rng.normal();
      rp[i] = reward(theta[0] + nu * deltas[i][0]);
      rm[i] = reward(theta[0] - nu * deltas[i][0]);
    }
    ars_update(theta, deltas, rp, rm, 4, 0.02);
  }
  EXPECT_LT(std::abs(theta[0] - 3.0), 0.05);
  EXPECT_LE(iterations, 500);
}

TEST(Ppo, SurrogateWeightCases) {
  EXPECT_DOUBLE_EQ(surrogate_weight({1.0, 0.7}, 0.2), 0.7);
  EXPECT_EQ(surrogate_weight({1.3, 0.7}, 0.2), 0.0);    // clipped from above
  EXPECT_EQ(surrogate_weight({0.7, -0.5}, 0.2), 0.0);   // clipped from below
  EXPECT_DOUBLE_EQ(surrogate_weight({0.7, 0.5}, 0.2), 0.35);   // min keeps the unclipped term
  EXPECT_DOUBLE_EQ(surrogate_weight({1.3, -0.5}, 0.2), -0.65);
}

TEST(Ppo, FullyClippedMinibatchGivesZeroPolicyUpdate) {
  const GaussianChebyPolicy p = init_policy(2, 3, 1, {{-1.2, 0.6}, {-0.07, 0.07}}, {2, 0.3, 1.0});
  Rng rng(4);
  std::vector<double> grad(p.mu.size(), 0.0);
  for (int i = 0; i < 64; ++i) {
    const std::vector<double> s{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
    const ActSample a = act_stochastic(p, s, rng);
    const PolicyGrad score = logprob_grad(p, s, a.action);
    const double w = surrogate_weight({1.2 + rng.uniform(0.01, 1.0), rng.uniform(0.1, 2.0)}, 0.2);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += w * score.mu[k];
  }
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Ppo, RequiresCritic) {
  const auto make = task_factory(EnvKind::kMountainCar);
  const GaussianChebyPolicy init = init_policy(2, 3, 1, make()->obs_bounds(), {1});
  EXPECT_THROW(train_ppo(make, init, PpoConfig{}), ConfigError);
}

TEST(Configs, ValidationRejectsBadValues) {
  ReinforceConfig r;
  r.gamma = 1.5;
  EXPECT_THROW(validate(r), ConfigError);
  ArsConfig a;
  a.top = 9;
  EXPECT_THROW(validate(a), ConfigError);
  PpoConfig p;
  p.clip = 1.0;
  EXPECT_THROW(validate(p), ConfigError);
  p = PpoConfig{};
  p.lambda = 0.0;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Configs, JsonRoundTripAndUnknownKeys) {
  ProtocolConfig c = default_protocol(Algo::kArs, EnvKind::kPendulum);
  c.base_seed = 77;
  c.ars.nu = 0.3;
  ProtocolConfig back;
  apply_json(to_json(c), back);
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(apply_json(nlohmann::json{{"degre", 3}}, back), ConfigError);
  EXPECT_THROW(apply_json(nlohmann::json{{"ars", {{"nuu", 0.1}}}}, back), ConfigError);
  EXPECT_THROW(apply_json(nlohmann::json{{"runs", "many"}}, back), ConfigError);
  EXPECT_THROW(apply_json(nlohmann::json{{"algo", "sac"}}, back), ConfigError);
}

TEST(Protocol, SingleRunIsReturned) {
  ProtocolConfig c;
  c.algo = Algo::kArs;
  c.runs = 1;
  c.ars.total_steps = 5000;
  const ProtocolResult r = train_protocol(c);
  ASSERT_EQ(r.runs.size(), 1u);
  ASSERT_TRUE(r.best.has_value());
  EXPECT_EQ(*r.best, 0u);
  EXPECT_EQ(r.runs[0].eval_returns.size(), 50u);
}

TEST(Protocol, SelectionIgnoresOrderAndPrefersLowerSeedOnTies) {
  std::vector<RunStats> runs(6);
  const double means[] = {3.0, 7.0, 7.0, -1.0, 5.0, 7.0};
  for (int i = 0; i < 6; ++i) {
    runs[i].seed = 10 + i;
    runs[i].eval_mean = means[i];
  }
  runs[1].run.diverged = true;  // excluded despite its mean
  const auto pick = [](const std::vector<RunStats>& rs) { return rs[*select_best(rs)].seed; };
  EXPECT_EQ(pick(runs), 12u);
  std::mt19937 shuffle(3);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(runs.begin(), runs.end(), shuffle);
    EXPECT_EQ(pick(runs), 12u);
  }
  for (RunStats& r : runs) r.run.diverged = true;
  EXPECT_FALSE(select_best(runs).has_value());
}

TEST(Protocol, RunsAreBitIdenticalAcrossWorkerCounts) {
  for (Algo algo : {Algo::kReinforce, Algo::kArs, Algo::kPpo}) {
    ProtocolConfig c;
    c.algo = algo;
    c.runs = 3;
    c.reinforce.episodes = 10;
    c.ars.total_steps = 20000;
    c.ppo.total_steps = 4096;
    c.jobs = 1;
    const ProtocolResult a = train_protocol(c);
    c.jobs = 3;
    const ProtocolResult b = train_protocol(c);
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
      const TrainRun& x = a.runs[i].run;
      const TrainRun& y = b.runs[i].run;
      ASSERT_EQ(x.returns.size(), y.returns.size());
      EXPECT_EQ(0, std::memcmp(x.returns.data(), y.returns.data(),
                               x.returns.size() * sizeof(double)));
      ASSERT_EQ(x.policy.has_value(), y.policy.has_value());
      if (x.policy) {
        EXPECT_EQ(x.policy->mu, y.policy->mu) << to_string(algo);
        EXPECT_EQ(x.policy->sigma, y.policy->sigma);
      }
      EXPECT_EQ(a.runs[i].eval_mean, b.runs[i].eval_mean);
    }
  }
}

TEST(Protocol, InvalidSigmaDegreeFailsBeforeTraining) {
  ProtocolConfig c;
  c.sigma_degree = 4;
  EXPECT_THROW(train_protocol(c), ConfigError);
}

}  // namespace
}  // namespace chebyrl
