#include <algorithm>
#include <cmath>
#include <string>

#include "chebyrl/errors.hpp"
#include "chebyrl/parallel.hpp"
#include "chebyrl/train.hpp"

namespace chebyrl {

using nlohmann::json;

const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::kReinforce:
      return "reinforce";
    case Algo::kArs:
      return "ars";
    case Algo::kPpo:
      return "ppo";
  }
  return "unknown";
}

Algo parse_algo(const std::string& name) {
  if (name == "reinforce") return Algo::kReinforce;
  if (name == "ars") return Algo::kArs;
  if (name == "ppo") return Algo::kPpo;
  throw ConfigError("unknown algorithm '" + name + "' (expected reinforce, ars or ppo)");
}

namespace {

template <class T>
T read(const json& j, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError("");
    } else {
      if (!j.is_string()) throw ConfigError("");
    }
    return j.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " config must be a JSON object");
}

[[noreturn]] void unknown_key(const std::string& key, const char* what) {
  throw ConfigError("unknown " + std::string(what) + " config key '" + key + "'");
}

}  // namespace

json to_json(const ReinforceConfig& c) {
  return {{"episodes", c.episodes},
          {"gamma", c.gamma},
          {"optimizer", to_string(c.optimizer.kind)},
          {"step_size", c.optimizer.lr},
          {"weight_decay", c.optimizer.weight_decay},
          {"per_step_updates", c.per_step_updates},
          {"discount_weighting", c.discount_weighting},
          {"seed", c.seed}};
}

json to_json(const ArsConfig& c) {
  return {{"total_steps", c.total_steps}, {"directions", c.directions},
          {"top", c.top},                 {"nu", c.nu},
          {"step_size", c.step_size},     {"normalize_obs", c.normalize_obs},
          {"obs_clip", c.obs_clip},       {"seed", c.seed}};
}

json to_json(const PpoConfig& c) {
  return {{"total_steps", c.total_steps}, {"rollout", c.rollout},
          {"epochs", c.epochs},           {"minibatch", c.minibatch},
          {"clip", c.clip},               {"lambda", c.lambda},
          {"value_coef", c.value_coef},   {"entropy_coef", c.entropy_coef},
          {"gamma", c.gamma},             {"step_size", c.step_size},
          {"max_grad_norm", c.max_grad_norm}, {"seed", c.seed}};
}

void apply_json(const json& j, ReinforceConfig& c) {
  require_object(j, "reinforce");
  for (const auto& [key, value] : j.items()) {
    if (key == "episodes") c.episodes = read<int>(value, key);
    else if (key == "gamma") c.gamma = read<double>(value, key);
    else if (key == "optimizer") c.optimizer.kind = parse_optimizer(read<std::string>(value, key));
    else if (key == "step_size") c.optimizer.lr = read<double>(value, key);
    else if (key == "weight_decay") c.optimizer.weight_decay = read<double>(value, key);
    else if (key == "per_step_updates") c.per_step_updates = read<bool>(value, key);
    else if (key == "discount_weighting") c.discount_weighting = read<bool>(value, key);
    else if (key == "seed") c.seed = read<std::uint64_t>(value, key);
    else unknown_key(key, "reinforce");
  }
}

void apply_json(const json& j, ArsConfig& c) {
  require_object(j, "ars");
  for (const auto& [key, value] : j.items()) {
    if (key == "total_steps") c.total_steps = read<long>(value, key);
    else if (key == "directions") c.directions = read<int>(value, key);
    else if (key == "top") c.top = read<int>(value, key);
    else if (key == "nu") c.nu = read<double>(value, key);
    else if (key == "step_size") c.step_size = read<double>(value, key);
    else if (key == "normalize_obs") c.normalize_obs = read<bool>(value, key);
    else if (key == "obs_clip") c.obs_clip = read<double>(value, key);
    else if (key == "seed") c.seed = read<std::uint64_t>(value, key);
    else unknown_key(key, "ars");
  }
}

void apply_json(const json& j, PpoConfig& c) {
  require_object(j, "ppo");
  for (const auto& [key, value] : j.items()) {
    if (key == "total_steps") c.total_steps = read<long>(value, key);
    else if (key == "rollout") c.rollout = read<int>(value, key);
    else if (key == "epochs") c.epochs = read<int>(value, key);
    else if (key == "minibatch") c.minibatch = read<int>(value, key);
    else if (key == "clip") c.clip = read<double>(value, key);
    else if (key == "lambda") c.lambda = read<double>(value, key);
    else if (key == "value_coef") c.value_coef = read<double>(value, key);
    else if (key == "entropy_coef") c.entropy_coef = read<double>(value, key);
    else if (key == "gamma") c.gamma = read<double>(value, key);
    else if (key == "step_size") c.step_size = read<double>(value, key);
    else if (key == "max_grad_norm") c.max_grad_norm = read<double>(value, key);
    else if (key == "seed") c.seed = read<std::uint64_t>(value, key);
    else unknown_key(key, "ppo");
  }
}

void validate(const ReinforceConfig& c) {
  if (c.episodes < 1) throw ConfigError("reinforce: episodes must be >= 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("reinforce: need 0 < gamma <= 1");
  if (!(c.optimizer.lr > 0.0)) throw ConfigError("reinforce: step size must be > 0");
}

void validate(const ArsConfig& c) {
  if (c.total_steps < 1) throw ConfigError("ars: total_steps must be >= 1");
  if (c.directions < 1 || c.top < 1 || c.top > c.directions) {
    throw ConfigError("ars: need 1 <= top <= directions");
  }
  if (!(c.nu > 0.0) || !(c.step_size > 0.0)) throw ConfigError("ars: nu and step_size must be > 0");
  if (!(c.obs_clip > 0.0)) throw ConfigError("ars: obs_clip must be > 0");
}

void validate(const PpoConfig& c) {
  if (c.total_steps < 1 || c.rollout < 1 || c.epochs < 1 || c.minibatch < 1) {
    throw ConfigError("ppo: step counts must be >= 1");
  }
  if (!(c.clip > 0.0 && c.clip < 1.0)) throw ConfigError("ppo: need 0 < clip < 1");
  if (!(c.lambda > 0.0 && c.lambda <= 1.0)) throw ConfigError("ppo: need 0 < lambda <= 1");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("ppo: need 0 < gamma <= 1");
  if (!(c.step_size > 0.0)) throw ConfigError("ppo: step size must be > 0");
}

ProtocolConfig default_protocol(Algo algo, EnvKind env) {
  ProtocolConfig c;
  c.algo = algo;
  c.env = env;
  if (env == EnvKind::kPendulum) {
    c.degree = algo == Algo::kPpo ? 5 : 6;
    c.runs = 12;
    c.ars.total_steps = 1'000'000;
    c.ars.directions = 32;
    c.ars.top = 16;
  }
  return c;
}

json to_json(const ProtocolConfig& c) {
  json j{{"algo", to_string(c.algo)},
         {"env", to_string(c.env)},
         {"runs", c.runs},
         {"base_seed", c.base_seed},
         {"degree", c.degree},
         {"sigma_degree", c.sigma_degree},
         {"critic_degree", c.critic_degree ? json(*c.critic_degree) : json(nullptr)},
         {"init_amplitude", c.init_amplitude},
         {"eval_episodes", c.eval_episodes}};
  switch (c.algo) {
    case Algo::kReinforce:
      j["reinforce"] = to_json(c.reinforce);
      break;
    case Algo::kArs:
      j["ars"] = to_json(c.ars);
      break;
    case Algo::kPpo:
      j["ppo"] = to_json(c.ppo);
      break;
  }
  return j;
}

void apply_json(const json& j, ProtocolConfig& c) {
  require_object(j, "protocol");
  for (const auto& [key, value] : j.items()) {
    if (key == "algo") c.algo = parse_algo(read<std::string>(value, key));
    else if (key == "env") c.env = parse_env(read<std::string>(value, key));
    else if (key == "runs") c.runs = read<int>(value, key);
    else if (key == "base_seed") c.base_seed = read<std::uint64_t>(value, key);
    else if (key == "degree") c.degree = read<int>(value, key);
    else if (key == "sigma_degree") c.sigma_degree = read<int>(value, key);
    else if (key == "critic_degree") {
      c.critic_degree = value.is_null() ? std::nullopt : std::optional<int>(read<int>(value, key));
    } else if (key == "init_amplitude") c.init_amplitude = read<double>(value, key);
    else if (key == "eval_episodes") c.eval_episodes = read<int>(value, key);
    else if (key == "jobs") c.jobs = read<int>(value, key);
    else if (key == "reinforce") apply_json(value, c.reinforce);
    else if (key == "ars") apply_json(value, c.ars);
    else if (key == "ppo") apply_json(value, c.ppo);
    else unknown_key(key, "top-level");
  }
}

int ProtocolResult::diverged_count() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(),
                                        [](const RunStats& r) { return r.run.diverged; }));
}

std::vector<double> evaluate_episodes(const TaskFactory& make_task,
                                      const GaussianChebyPolicy& policy, int episodes,
                                      std::uint64_t seed) {
  const std::unique_ptr<Task> task = make_task();
  std::vector<double> obs(static_cast<std::size_t>(task->obs_dim()));
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    task->reset(rng);
    double ret = 0.0;
    while (true) {
      task->observe(obs);
      const TaskStep step = task->step(act_deterministic(policy, obs));
      ret += step.reward;
      if (step.done()) break;
    }
    out.push_back(ret);
  }
  return out;
}

std::optional<std::size_t> select_best(const std::vector<RunStats>& runs) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].run.diverged) continue;
    if (!best) {
      best = i;
      continue;
    }
    const RunStats& a = runs[i];
    const RunStats& b = runs[*best];
    if (a.eval_mean > b.eval_mean || (a.eval_mean == b.eval_mean && a.seed < b.seed)) best = i;
  }
  return best;
}

ProtocolResult train_protocol(const ProtocolConfig& config) {
  if (config.runs < 1) throw ConfigError("protocol: runs must be >= 1");
  if (config.eval_episodes < 1) throw ConfigError("protocol: eval_episodes must be >= 1");
  const TaskFactory make_task = task_factory(config.env);
  const std::unique_ptr<Task> probe = make_task();
  const std::optional<int> critic_degree =
      config.algo == Algo::kPpo ? std::optional<int>(config.critic_degree.value_or(config.degree))
                                : std::nullopt;
  // Validate degrees up front so a bad config fails before any training.
  (void)init_policy(probe->obs_dim(), config.degree, config.sigma_degree, probe->obs_bounds(),
                    PolicyInit{0, config.init_amplitude, 1.0}, critic_degree);

  ProtocolResult result;
  result.runs.resize(static_cast<std::size_t>(config.runs));
  parallel_for(result.runs.size(), config.jobs, [&](std::size_t i) {
    RunStats& stats = result.runs[i];
    stats.seed = config.base_seed + i;
    GaussianChebyPolicy init =
        init_policy(probe->obs_dim(), config.degree, config.sigma_degree, probe->obs_bounds(),
                    PolicyInit{stats.seed, config.init_amplitude, 1.0}, critic_degree);
    init.output_gain = probe->output_gain();
    switch (config.algo) {
      case Algo::kReinforce: {
        ReinforceConfig c = config.reinforce;
        c.seed = stats.seed;
        stats.run = train_reinforce(make_task, init, c);
        break;
      }
      case Algo::kArs: {
        ArsConfig c = config.ars;
        c.seed = stats.seed;
        stats.run = train_ars(make_task, init, c);
        break;
      }
      case Algo::kPpo: {
        PpoConfig c = config.ppo;
        c.seed = stats.seed;
        stats.run = train_ppo(make_task, init, c);
        break;
      }
    }
    if (stats.run.diverged) return;
    stats.eval_returns = evaluate_episodes(make_task, *stats.run.policy, config.eval_episodes,
                                           stats.seed ^ 0x5eede7a100000000ULL);
    double sum = 0.0;
    for (double r : stats.eval_returns) sum += r;
    stats.eval_mean = sum / static_cast<double>(stats.eval_returns.size());
    double sq = 0.0;
    for (double r : stats.eval_returns) sq += (r - stats.eval_mean) * (r - stats.eval_mean);
    stats.eval_std = std::sqrt(sq / static_cast<double>(stats.eval_returns.size()));
  });
  result.best = select_best(result.runs);
  return result;
}

}  // namespace chebyrl
