#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/train.hpp"
#include "train_common.hpp"

namespace chebyrl {

double surrogate_weight(const SurrogateSample& s, double clip) {
  // d/dtheta min(rA, clip(r)A) = rA * score on the unclipped branch, else 0.
  const bool clipped = (s.advantage > 0.0 && s.ratio > 1.0 + clip) ||
                       (s.advantage < 0.0 && s.ratio < 1.0 - clip);
  return clipped ? 0.0 : s.ratio * s.advantage;
}

namespace {

struct Transition {
  std::size_t obs_offset = 0;
  double action = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  double advantage = 0.0;
  double ret = 0.0;
};

}  // namespace

TrainRun train_ppo(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                   const PpoConfig& config) {
  validate(config);
  if (!init.critic) throw ConfigError("PPO needs a policy with a critic head");
  const detail::Stopwatch clock;
  TrainRun run;
  run.algo = Algo::kPpo;
  run.seed = config.seed;
  run.config = to_json(config);

  GaussianChebyPolicy policy = init;
  ChebyModel& critic = *policy.critic;
  OptimizerConfig oc;
  oc.kind = OptimizerKind::kAdam;
  oc.lr = config.step_size;
  oc.eps = 1e-5;
  Optimizer opt_mu(oc, policy.mu.size());
  Optimizer opt_sigma(oc, policy.sigma.size());
  Optimizer opt_critic(oc, critic.size());

  const Rng master(config.seed);
  Rng env_rng = master.split(1);
  Rng act_rng = master.split(2);
  Rng shuffle_rng = master.split(3);

  const std::unique_ptr<Task> task = make_task();
  const auto n = static_cast<std::size_t>(task->obs_dim());
  const auto rollout_len = static_cast<std::size_t>(config.rollout);

  std::vector<double> observations(rollout_len * n);
  std::vector<Transition> buffer(rollout_len);
  std::vector<double> obs(n);
  std::vector<double> next_obs(n);
  ActSample sample;
  PolicyGrad score;
  BasisVector critic_basis;
  std::vector<double> g_mu(policy.mu.size());
  std::vector<double> g_sigma(policy.sigma.size());
  std::vector<double> g_critic(critic.size());
  std::vector<std::size_t> order(rollout_len);

  task->reset(env_rng);
  double episode_return = 0.0;
  double last_logged = 0.0;

  try {
    while (run.env_steps < config.total_steps && !run.diverged) {
      double finished_sum = 0.0;
      int finished = 0;
      for (std::size_t t = 0; t < rollout_len; ++t) {
        task->observe(obs);
        std::copy(obs.begin(), obs.end(), observations.begin() + static_cast<long>(t * n));
        act_stochastic(policy, obs, act_rng, sample);
        Transition& tr = buffer[t];
        tr.obs_offset = t * n;
        tr.action = sample.action;
        tr.log_prob = sample.log_prob;
        tr.value = critic.eval(obs);
        const TaskStep step = task->step(sample.action);
        ++run.env_steps;
        tr.reward = step.reward;
        tr.terminated = step.terminated;
        tr.truncated = step.truncated && !step.terminated;
        episode_return += step.reward;
        if (tr.truncated) {
          // Time-limit ends are not terminal: bootstrap from the cut-off state.
          task->observe(next_obs);
          tr.reward += config.gamma * critic.eval(next_obs);
        }
        if (step.done()) {
          finished_sum += episode_return;
          ++finished;
          episode_return = 0.0;
          task->reset(env_rng);
        }
      }
      if (finished > 0) last_logged = finished_sum / finished;
      run.returns.push_back(last_logged);

      // GAE over the buffer; the state after the last step bootstraps the tail.
      task->observe(next_obs);
      double next_value = critic.eval(next_obs);
      double gae = 0.0;
      for (std::size_t t = rollout_len; t-- > 0;) {
        Transition& tr = buffer[t];
        const bool end = tr.terminated || tr.truncated;
        const double nv = end ? 0.0 : next_value;
        const double delta = tr.reward + config.gamma * nv - tr.value;
        gae = delta + config.gamma * config.lambda * (end ? 0.0 : gae);
        tr.advantage = gae;
        tr.ret = gae + tr.value;
        next_value = tr.value;
      }

      const auto mb = static_cast<std::size_t>(config.minibatch);
      for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = rollout_len; i > 1; --i) {
          const auto j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
          std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < rollout_len; start += mb) {
          const std::size_t end = std::min(start + mb, rollout_len);
          const double count = static_cast<double>(end - start);

          double adv_mean = 0.0;
          for (std::size_t k = start; k < end; ++k) adv_mean += buffer[order[k]].advantage;
          adv_mean /= count;
          double adv_var = 0.0;
          for (std::size_t k = start; k < end; ++k) {
            const double d = buffer[order[k]].advantage - adv_mean;
            adv_var += d * d;
          }
          const double adv_sd = count > 1 ? std::sqrt(adv_var / (count - 1.0)) : 0.0;

          std::fill(g_mu.begin(), g_mu.end(), 0.0);
          std::fill(g_sigma.begin(), g_sigma.end(), 0.0);
          std::fill(g_critic.begin(), g_critic.end(), 0.0);
          for (std::size_t k = start; k < end; ++k) {
            const Transition& tr = buffer[order[k]];
            const std::span<const double> s(observations.data() + tr.obs_offset, n);
            evaluate_heads(policy, s, sample);
            const double log_prob = gaussian_log_prob(tr.action, sample.mu, sample.sigma);
            const SurrogateSample ss{std::exp(log_prob - tr.log_prob),
                                     (tr.advantage - adv_mean) / (adv_sd + 1e-8)};
            const double w = surrogate_weight(ss, config.clip);
            logprob_grad(sample, tr.action, score);
            // Loss = -surrogate - c_ent * entropy + c_v * (V - R)^2, averaged.
            for (std::size_t i = 0; i < g_mu.size(); ++i) g_mu[i] -= w * score.mu[i] / count;
            const double ent = sample.floored ? 0.0 : config.entropy_coef / sample.sigma;
            for (std::size_t i = 0; i < g_sigma.size(); ++i) {
              g_sigma[i] -= (w * score.sigma[i] + ent * sample.basis_sigma[i]) / count;
            }
            const double v = critic.eval(s, critic_basis);
            const double dv = 2.0 * config.value_coef * (v - tr.ret) / count;
            for (std::size_t i = 0; i < g_critic.size(); ++i) g_critic[i] += dv * critic_basis[i];
          }
          if (config.max_grad_norm > 0.0) {
            double sq = 0.0;
            for (double g : g_mu) sq += g * g;
            for (double g : g_sigma) sq += g * g;
            for (double g : g_critic) sq += g * g;
            const double norm = std::sqrt(sq);
            if (norm > config.max_grad_norm) {
              const double f = config.max_grad_norm / (norm + 1e-6);
              for (double& g : g_mu) g *= f;
              for (double& g : g_sigma) g *= f;
              for (double& g : g_critic) g *= f;
            }
          }
          opt_mu.step(policy.mu.coeffs(), g_mu);
          opt_sigma.step(policy.sigma.coeffs(), g_sigma);
          opt_critic.step(critic.coeffs(), g_critic);
        }
      }
      if (!detail::policy_finite(policy)) {
        run.diverged = true;
        run.divergence_reason = "non-finite coefficients";
      }
    }
  } catch (const DivergenceError& e) {
    run.diverged = true;
    run.divergence_reason = e.what();
  } catch (const DomainError& e) {
    run.diverged = true;
    run.divergence_reason = e.what();
  }

  if (!run.diverged) run.policy = std::move(policy);
  run.wall_seconds = clock.seconds();
  return run;
}

}  // namespace chebyrl
