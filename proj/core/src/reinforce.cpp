#include <cmath>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/train.hpp"
#include "train_common.hpp"

namespace chebyrl {

PolicyGrad reinforce_gradient(const GaussianChebyPolicy& policy,
                              std::span<const double> observations,
                              std::span<const double> actions, std::span<const double> rewards,
                              double gamma, bool discount_weighting) {
  const std::size_t steps = actions.size();
  const auto n = static_cast<std::size_t>(policy.state_dim());
  if (rewards.size() != steps || observations.size() != steps * n) {
    throw ConfigError("reinforce_gradient: inconsistent episode lengths");
  }
  std::vector<double> returns_to_go(steps);
  double g = 0.0;
  for (std::size_t t = steps; t-- > 0;) {
    g = rewards[t] + gamma * g;
    returns_to_go[t] = g;
  }
  PolicyGrad total{std::vector<double>(policy.mu.size(), 0.0),
                   std::vector<double>(policy.sigma.size(), 0.0)};
  ActSample sample;
  PolicyGrad score;
  double discount = 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double weight = (discount_weighting ? discount : 1.0) * returns_to_go[t];
    discount *= gamma;
    evaluate_heads(policy, observations.subspan(t * n, n), sample);
    logprob_grad(sample, actions[t], score);
    for (std::size_t i = 0; i < total.mu.size(); ++i) total.mu[i] += weight * score.mu[i];
    for (std::size_t i = 0; i < total.sigma.size(); ++i) total.sigma[i] += weight * score.sigma[i];
  }
  return total;
}

TrainRun train_reinforce(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                         const ReinforceConfig& config) {
  validate(config);
  const detail::Stopwatch clock;
  TrainRun run;
  run.algo = Algo::kReinforce;
  run.seed = config.seed;
  run.config = to_json(config);

  GaussianChebyPolicy policy = init;
  Optimizer opt_mu(config.optimizer, policy.mu.size());
  Optimizer opt_sigma(config.optimizer, policy.sigma.size());
  const Rng master(config.seed);
  Rng env_rng = master.split(1);
  Rng act_rng = master.split(2);

  const std::unique_ptr<Task> task = make_task();
  const auto n = static_cast<std::size_t>(task->obs_dim());

  std::vector<double> observations;  // flattened, n per step
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> returns_to_go;
  ActSample sample;
  PolicyGrad score;
  std::vector<double> neg_mu;
  std::vector<double> neg_sigma;
  std::vector<double> obs(n);

  auto fail = [&](const char* why) {
    run.diverged = true;
    run.divergence_reason = why;
  };

  try {
    for (int episode = 0; episode < config.episodes && !run.diverged; ++episode) {
      observations.clear();
      actions.clear();
      rewards.clear();
      task->reset(env_rng);
      double episode_return = 0.0;
      while (true) {
        task->observe(obs);
        act_stochastic(policy, obs, act_rng, sample);
        const TaskStep step = task->step(sample.action);
        observations.insert(observations.end(), obs.begin(), obs.end());
        actions.push_back(sample.action);
        rewards.push_back(step.reward);
        episode_return += step.reward;
        if (step.done()) break;
      }
      run.env_steps += static_cast<long>(actions.size());
      run.returns.push_back(episode_return);

      if (config.per_step_updates) {
        const std::size_t steps = actions.size();
        returns_to_go.assign(steps, 0.0);
        double g = 0.0;
        for (std::size_t t = steps; t-- > 0;) {
          g = rewards[t] + config.gamma * g;
          returns_to_go[t] = g;
        }
        double discount = 1.0;
        for (std::size_t t = 0; t < steps; ++t) {
          const double weight = (config.discount_weighting ? discount : 1.0) * returns_to_go[t];
          discount *= config.gamma;
          // Score at the current parameters, which have moved since the
          // action was sampled.
          evaluate_heads(policy, std::span<const double>(observations.data() + t * n, n), sample);
          logprob_grad(sample, actions[t], score);
          neg_mu.resize(score.mu.size());
          neg_sigma.resize(score.sigma.size());
          for (std::size_t i = 0; i < neg_mu.size(); ++i) neg_mu[i] = -weight * score.mu[i];
          for (std::size_t i = 0; i < neg_sigma.size(); ++i) neg_sigma[i] = -weight * score.sigma[i];
          opt_mu.step(policy.mu.coeffs(), neg_mu);
          opt_sigma.step(policy.sigma.coeffs(), neg_sigma);
        }
      } else {
        PolicyGrad total = reinforce_gradient(policy, observations, actions, rewards,
                                              config.gamma, config.discount_weighting);
        for (double& x : total.mu) x = -x;
        for (double& x : total.sigma) x = -x;
        opt_mu.step(policy.mu.coeffs(), total.mu);
        opt_sigma.step(policy.sigma.coeffs(), total.sigma);
      }
      if (!detail::policy_finite(policy)) fail("non-finite policy coefficients");
      if (!std::isfinite(episode_return)) fail("non-finite episode return");
    }
  } catch (const DivergenceError& e) {
    fail(e.what());
  } catch (const DomainError& e) {
    fail(e.what());
  }

  if (!run.diverged) run.policy = std::move(policy);
  run.wall_seconds = clock.seconds();
  return run;
}

}  // namespace chebyrl
