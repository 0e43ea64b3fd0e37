#include "chebyrl/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "chebyrl/errors.hpp"

#ifndef CHEBYRL_VERSION
#define CHEBYRL_VERSION "0.0.0"
#endif

namespace chebyrl {

using nlohmann::json;

const char* version() { return CHEBYRL_VERSION; }

namespace {

const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + ": expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

template <class T>
T get(const json& j, const char* key, const char* what) {
  const json& v = field(j, key, what);
  bool ok = false;
  if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
  else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
  else ok = v.is_number();
  if (!ok) throw SchemaError(std::string(what) + ": key '" + key + "' has the wrong type");
  return v.get<T>();
}

}  // namespace

json to_json(const ChebyModel& model) {
  json bounds = json::array();
  for (const Bounds& b : model.bounds()) bounds.push_back({b.lo, b.hi});
  return {{"n", model.dim()},
          {"d", model.degree()},
          {"bounds", bounds},
          {"coeffs", std::vector<double>(model.coeffs().begin(), model.coeffs().end())}};
}

ChebyModel model_from_json(const json& j) {
  constexpr const char* what = "model";
  const int n = get<int>(j, "n", what);
  const int d = get<int>(j, "d", what);
  const json& jb = field(j, "bounds", what);
  const json& jc = field(j, "coeffs", what);
  if (!jb.is_array() || static_cast<int>(jb.size()) != n) {
    throw SchemaError("model: 'bounds' must hold one [lo, hi] pair per input");
  }
  std::vector<Bounds> bounds;
  for (const json& b : jb) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw SchemaError("model: each bound must be a [lo, hi] pair of numbers");
    }
    bounds.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  if (!jc.is_array()) throw SchemaError("model: 'coeffs' must be an array");
  std::vector<double> coeffs;
  for (const json& c : jc) {
    if (!c.is_number()) throw SchemaError("model: coefficients must be numbers");
    coeffs.push_back(c.get<double>());
  }
  try {
    if (coeffs.size() != basis_size(n, d)) {
      throw SchemaError("model: expected " + std::to_string(basis_size(n, d)) +
                        " coefficients, got " + std::to_string(coeffs.size()));
    }
    return ChebyModel(n, d, std::move(bounds), std::move(coeffs));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

json to_json(const PolicyFile& file) {
  const GaussianChebyPolicy& p = file.policy;
  return {{"env", file.env},
          {"algo", file.algo},
          {"seed", file.seed},
          {"output_gain", p.output_gain},
          {"sigma_floor", p.sigma_floor},
          {"mu", to_json(p.mu)},
          {"sigma", to_json(p.sigma)},
          {"critic", p.critic ? to_json(*p.critic) : json(nullptr)}};
}

PolicyFile policy_from_json(const json& j) {
  constexpr const char* what = "policy";
  PolicyFile out{get<std::string>(j, "env", what), get<std::string>(j, "algo", what),
                 get<std::uint64_t>(j, "seed", what),
                 GaussianChebyPolicy{model_from_json(field(j, "mu", what)),
                                     model_from_json(field(j, "sigma", what)), std::nullopt}};
  try {
    parse_env(out.env);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("policy: ") + e.what());
  }
  out.policy.output_gain = get<double>(j, "output_gain", what);
  if (j.contains("sigma_floor")) out.policy.sigma_floor = get<double>(j, "sigma_floor", what);
  if (j.contains("critic") && !j.at("critic").is_null()) {
    out.policy.critic = model_from_json(j.at("critic"));
  }
  if (out.policy.sigma.dim() != out.policy.mu.dim() ||
      (out.policy.critic && out.policy.critic->dim() != out.policy.mu.dim())) {
    throw SchemaError("policy: heads disagree on the state dimension");
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  // nlohmann::json prints doubles with the shortest round-trip representation.
  write_text_file(path, j.dump(indent) + "\n");
}

json to_json(const RunStats& stats) {
  const TrainRun& run = stats.run;
  return {{"seed", stats.seed},
          {"algo", to_string(run.algo)},
          {"config", run.config},
          {"env_steps", run.env_steps},
          {"returns", run.returns},
          {"diverged", run.diverged},
          {"divergence_reason", run.divergence_reason},
          {"wall_seconds", run.wall_seconds},
          {"eval_returns", stats.eval_returns},
          {"eval_mean", stats.eval_mean},
          {"eval_std", stats.eval_std}};
}

void write_learning_curve_csv(std::ostream& out, const std::vector<double>& returns) {
  out << "update,mean_return\n" << std::setprecision(17);
  for (std::size_t i = 0; i < returns.size(); ++i) out << i << ',' << returns[i] << '\n';
}

json to_json(const Phase2Solution& s) {
  return {{"c2", s.c2}, {"loss", s.loss}, {"steps", s.steps}, {"v_star", s.v_star}};
}

json to_json(const AnalyticSolution& s) {
  json j{{"kind", to_string(s.kind)},
         {"x0", s.x0},
         {"feasible", s.feasible()},
         {"k", s.k},
         {"loss", s.loss},
         {"return", s.ret},
         {"t_star", s.t_star},
         {"v_star", s.v_star}};
  if (s.kind == SolutionKind::kSinglePhase) j["c"] = s.c;
  if (s.kind == SolutionKind::kTwoPhase) {
    j["c1"] = s.c1;
    j["c2"] = s.c2;
    j["v_wall"] = s.v_wall;
  }
  return j;
}

json to_json(const FeasibilityScan& scan) {
  return {{"step", scan.step},
          {"points", scan.walls.size()},
          {"infeasible_lo", scan.infeasible_lo ? json(*scan.infeasible_lo) : json(nullptr)},
          {"infeasible_hi", scan.infeasible_hi ? json(*scan.infeasible_hi) : json(nullptr)}};
}

void write_boundary_csv(std::ostream& out, const PhaseBoundary& boundary) {
  out << "x,v_boundary\n" << std::setprecision(17);
  for (std::size_t i = 0; i < boundary.xs().size(); ++i) {
    out << boundary.xs()[i] << ',' << boundary.vs()[i] << '\n';
  }
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

json to_json(const Manifest& m) {
  return {{"command", m.command},     {"config", m.config},       {"config_hash", m.config_hash},
          {"base_seed", m.base_seed}, {"artifacts", m.artifacts}, {"version", m.version},
          {"timestamp", m.timestamp}};
}

Manifest manifest_from_json(const json& j) {
  constexpr const char* what = "manifest";
  Manifest m;
  const json& cmd = field(j, "command", what);
  if (!cmd.is_array()) throw SchemaError("manifest: 'command' must be an array of strings");
  for (const json& c : cmd) {
    if (!c.is_string()) throw SchemaError("manifest: 'command' must be an array of strings");
    m.command.push_back(c.get<std::string>());
  }
  m.config = field(j, "config", what);
  m.config_hash = get<std::string>(j, "config_hash", what);
  if (m.config_hash != config_hash(m.config)) {
    throw SchemaError("manifest: config hash does not match the stored config");
  }
  m.base_seed = get<std::uint64_t>(j, "base_seed", what);
  const json& arts = field(j, "artifacts", what);
  if (!arts.is_array()) throw SchemaError("manifest: 'artifacts' must be an array");
  for (const json& a : arts) {
    if (!a.is_string()) throw SchemaError("manifest: artifact paths must be strings");
    m.artifacts.push_back(a.get<std::string>());
  }
  m.version = get<std::string>(j, "version", what);
  m.timestamp = get<std::string>(j, "timestamp", what);
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace chebyrl
