#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/train.hpp"
#include "train_common.hpp"

namespace chebyrl {

namespace {

/// Welford accumulator per observation dimension.
struct RunningStats {
  explicit RunningStats(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {}

  void push(std::span<const double> x) {
    ++count;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(count);
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  long count = 0;
  std::vector<double> mean;
  std::vector<double> m2;
};

std::vector<Bounds> normalized_bounds(const RunningStats& stats, const std::vector<Bounds>& base,
                                      double clip) {
  if (stats.count < 2) return base;
  std::vector<Bounds> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double width = base[i].hi - base[i].lo;
    const double sd = std::max(std::sqrt(stats.m2[i] / static_cast<double>(stats.count)),
                               1e-3 * width);
    out[i] = {stats.mean[i] - clip * sd, stats.mean[i] + clip * sd};
  }
  return out;
}

/// Deterministic episode under mean head `model`; visited states are appended
/// to `states` when it is non-null.
double rollout(Task& task, const ChebyModel& model, Rng start_rng, long& steps,
               std::vector<double>* states) {
  std::vector<double> obs(static_cast<std::size_t>(task.obs_dim()));
  task.reset(start_rng);
  double ret = 0.0;
  while (true) {
    task.observe(obs);
    if (states != nullptr) states->insert(states->end(), obs.begin(), obs.end());
    const double a = model.eval(obs);
    if (!std::isfinite(a)) throw DivergenceError("ARS policy output is non-finite");
    const TaskStep step = task.step(a);
    ret += step.reward;
    ++steps;
    if (step.done()) break;
  }
  return ret;
}

}  // namespace

bool ars_update(std::vector<double>& theta, const std::vector<std::vector<double>>& deltas,
                const std::vector<double>& r_plus, const std::vector<double>& r_minus, int top,
                double step_size) {
  const std::size_t n_dir = deltas.size();
  if (r_plus.size() != n_dir || r_minus.size() != n_dir || top < 1 ||
      static_cast<std::size_t>(top) > n_dir) {
    throw ConfigError("ars_update: inconsistent direction counts");
  }
  std::vector<std::size_t> order(n_dir);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::max(r_plus[a], r_minus[a]) > std::max(r_plus[b], r_minus[b]);
  });
  order.resize(static_cast<std::size_t>(top));

  double mean = 0.0;
  for (std::size_t i : order) mean += r_plus[i] + r_minus[i];
  mean /= 2.0 * top;
  double var = 0.0;
  for (std::size_t i : order) {
    var += (r_plus[i] - mean) * (r_plus[i] - mean) + (r_minus[i] - mean) * (r_minus[i] - mean);
  }
  const double sigma_r = std::sqrt(var / (2.0 * top));
  if (!(sigma_r > 0.0) || !std::isfinite(sigma_r)) return false;

  const double scale = step_size / (top * sigma_r);
  for (std::size_t i : order) {
    const double diff = r_plus[i] - r_minus[i];
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += scale * diff * deltas[i][j];
  }
  return true;
}

TrainRun train_ars(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                   const ArsConfig& config) {
  validate(config);
  const detail::Stopwatch clock;
  TrainRun run;
  run.algo = Algo::kArs;
  run.seed = config.seed;
  run.config = to_json(config);

  const std::unique_ptr<Task> task = make_task();
  const std::vector<Bounds> base_bounds(init.mu.bounds().begin(), init.mu.bounds().end());
  const int n = init.mu.dim();
  const int d = init.mu.degree();
  std::vector<double> theta(init.mu.coeffs().begin(), init.mu.coeffs().end());
  RunningStats stats(static_cast<std::size_t>(n));
  std::vector<Bounds> bounds = base_bounds;

  const Rng master(config.seed);
  const auto n_dir = static_cast<std::size_t>(config.directions);
  std::vector<std::vector<double>> deltas(n_dir, std::vector<double>(theta.size()));
  std::vector<double> r_plus(n_dir);
  std::vector<double> r_minus(n_dir);
  std::vector<double> states;
  std::vector<double> perturbed(theta.size());

  try {
    for (std::uint64_t iter = 0; run.env_steps < config.total_steps; ++iter) {
      Rng iter_rng = master.split(iter);
      for (auto& delta : deltas) {
        for (double& x : delta) x = iter_rng.normal();
      }
      states.clear();
      for (std::size_t i = 0; i < n_dir; ++i) {
        // Both signs of a direction start from the same state.
        const Rng start_rng = iter_rng.split(i);
        for (int sign : {+1, -1}) {
          for (std::size_t j = 0; j < theta.size(); ++j) {
            perturbed[j] = theta[j] + sign * config.nu * deltas[i][j];
          }
          const ChebyModel model(n, d, bounds, perturbed);
          const double r = rollout(*task, model, start_rng, run.env_steps,
                                   config.normalize_obs ? &states : nullptr);
          (sign > 0 ? r_plus : r_minus)[i] = r;
        }
      }
      ars_update(theta, deltas, r_plus, r_minus, config.top, config.step_size);
      if (!detail::all_finite(theta)) {
        run.diverged = true;
        run.divergence_reason = "non-finite coefficients";
        break;
      }
      double mean = 0.0;
      for (std::size_t i = 0; i < n_dir; ++i) mean += r_plus[i] + r_minus[i];
      run.returns.push_back(mean / (2.0 * static_cast<double>(n_dir)));

      if (config.normalize_obs) {
        for (std::size_t k = 0; k + static_cast<std::size_t>(n) <= states.size(); k += n) {
          stats.push(std::span<const double>(states.data() + k, static_cast<std::size_t>(n)));
        }
        bounds = normalized_bounds(stats, base_bounds, config.obs_clip);
      }
    }
  } catch (const DivergenceError& e) {
    run.diverged = true;
    run.divergence_reason = e.what();
  } catch (const ConfigError& e) {
    // Non-finite coefficients are rejected when a model is built.
    run.diverged = true;
    run.divergence_reason = e.what();
  }

  if (!run.diverged) {
    GaussianChebyPolicy out = init;
    out.mu = ChebyModel(n, d, bounds, theta);
    out.sigma = ChebyModel(n, init.sigma.degree(), bounds,
                           {init.sigma.coeffs().begin(), init.sigma.coeffs().end()});
    run.policy = std::move(out);
  }
  run.wall_seconds = clock.seconds();
  return run;
}

}  // namespace chebyrl
