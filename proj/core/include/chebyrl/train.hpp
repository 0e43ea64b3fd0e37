#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chebyrl/optim.hpp"
#include "chebyrl/policy.hpp"
#include "chebyrl/task.hpp"

namespace chebyrl {

enum class Algo { kReinforce, kArs, kPpo };

const char* to_string(Algo algo);
/// "reinforce", "ars", "ppo"; throws ConfigError otherwise.
Algo parse_algo(const std::string& name);

struct ReinforceConfig {
  int episodes = 100;
  double gamma = 0.9;
  OptimizerConfig optimizer{};
  /// Update after every time step with the score re-evaluated at the current
  /// parameters (the textbook episodic algorithm); false sums the episode's
  /// terms into a single optimizer step.
  bool per_step_updates = true;
  /// Multiply the t-th term by gamma^t.
  bool discount_weighting = true;
  std::uint64_t seed = 0;
};

struct ArsConfig {
  long total_steps = 80'000;
  int directions = 8;  // N
  int top = 4;         // b
  double nu = 0.15;    // perturbation std in coefficient space
  double step_size = 0.02;
  /// Running mean/std state normalization. The normalizer is affine per
  /// dimension, so it is folded into the model's input bounds as
  /// [mean - obs_clip*std, mean + obs_clip*std].
  bool normalize_obs = true;
  double obs_clip = 3.0;
  std::uint64_t seed = 0;
};

struct PpoConfig {
  long total_steps = 70'000;
  int rollout = 2048;
  int epochs = 5;
  int minibatch = 64;
  double clip = 0.2;
  double lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double gamma = 0.99;
  double step_size = 1e-4;
  double max_grad_norm = 0.5;  // <= 0 disables global-norm clipping
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ReinforceConfig& c);
nlohmann::json to_json(const ArsConfig& c);
nlohmann::json to_json(const PpoConfig& c);
/// Overlay `j` onto `c`; unknown keys or wrong types throw ConfigError.
void apply_json(const nlohmann::json& j, ReinforceConfig& c);
void apply_json(const nlohmann::json& j, ArsConfig& c);
void apply_json(const nlohmann::json& j, PpoConfig& c);
void validate(const ReinforceConfig& c);
void validate(const ArsConfig& c);
void validate(const PpoConfig& c);

struct TrainRun {
  Algo algo = Algo::kReinforce;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<double> returns;  // per episode (REINFORCE) or per update (ARS, PPO)
  long env_steps = 0;
  bool diverged = false;
  std::string divergence_reason;
  double wall_seconds = 0.0;
  std::optional<GaussianChebyPolicy> policy;  // empty when diverged
};

/// Ascent direction of one episode at fixed parameters:
/// sum_t w_t * G_t * score(a_t | s_t), with G_t the discounted return-to-go and
/// w_t = gamma^t when `discount_weighting` (else 1). `observations` holds
/// obs_dim values per step.
PolicyGrad reinforce_gradient(const GaussianChebyPolicy& policy,
                              std::span<const double> observations,
                              std::span<const double> actions, std::span<const double> rewards,
                              double gamma, bool discount_weighting);

TrainRun train_reinforce(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                         const ReinforceConfig& config);

TrainRun train_ars(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                   const ArsConfig& config);

/// `init` must carry a critic.
TrainRun train_ppo(const TaskFactory& make_task, const GaussianChebyPolicy& init,
                   const PpoConfig& config);

/// One ARS update from already evaluated perturbations, exposed for tests.
/// Returns false (and leaves theta untouched) when the used returns have zero
/// spread.
bool ars_update(std::vector<double>& theta, const std::vector<std::vector<double>>& deltas,
                const std::vector<double>& r_plus, const std::vector<double>& r_minus, int top,
                double step_size);

/// Ascent direction of the clipped surrogate for one minibatch, exposed for
/// tests: sum_i [unclipped_i] * ratio_i * A_i * score_i / batch.
struct SurrogateSample {
  double ratio = 1.0;
  double advantage = 0.0;
};
/// Weight multiplying the score of a sample in the clipped-surrogate gradient.
double surrogate_weight(const SurrogateSample& s, double clip);

struct ProtocolConfig {
  Algo algo = Algo::kReinforce;
  EnvKind env = EnvKind::kMountainCar;
  int runs = 20;
  std::uint64_t base_seed = 0;
  int degree = 3;
  int sigma_degree = 1;
  std::optional<int> critic_degree;  // defaults to `degree` for PPO
  double init_amplitude = 1e-3;
  int eval_episodes = 50;
  int jobs = 1;
  ReinforceConfig reinforce{};
  ArsConfig ars{};
  PpoConfig ppo{};
};

/// Protocol defaults for an (algorithm, environment) pair. Mountain Car uses
/// degree 3; Pendulum uses degree 6 (ARS) or 5 (PPO), and ARS on Pendulum gets
/// a larger budget and more directions because episodes carry no goal signal.
ProtocolConfig default_protocol(Algo algo, EnvKind env);

nlohmann::json to_json(const ProtocolConfig& c);
void apply_json(const nlohmann::json& j, ProtocolConfig& c);

struct RunStats {
  std::uint64_t seed = 0;
  TrainRun run;
  std::vector<double> eval_returns;  // deterministic episodes, empty when diverged
  double eval_mean = 0.0;
  double eval_std = 0.0;
};

struct ProtocolResult {
  std::vector<RunStats> runs;     // ordered by run index
  std::optional<std::size_t> best;  // index of the highest eval mean
  [[nodiscard]] int diverged_count() const;
};

/// Trains `runs` policies with seeds base_seed + i, evaluates each with
/// deterministic episodes from random starts, and selects the best mean
/// (ties go to the lower seed).
ProtocolResult train_protocol(const ProtocolConfig& config);

/// Deterministic episode returns of `policy` from starts drawn with `seed`.
std::vector<double> evaluate_episodes(const TaskFactory& make_task,
                                      const GaussianChebyPolicy& policy, int episodes,
                                      std::uint64_t seed);

/// Index of the maximum among non-diverged runs, lower seed on ties.
std::optional<std::size_t> select_best(const std::vector<RunStats>& runs);

}  // namespace chebyrl
