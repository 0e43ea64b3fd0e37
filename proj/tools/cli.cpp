#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "chebyrl/analytic.hpp"
#include "chebyrl/errors.hpp"
#include "chebyrl/eval.hpp"
#include "chebyrl/horner.hpp"
#include "chebyrl/io.hpp"
#include "chebyrl/parallel.hpp"
#include "chebyrl/task.hpp"
#include "chebyrl/train.hpp"

namespace chebyrl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collects artifacts of one output directory and finishes it with a manifest.
class OutputDir {
 public:
  explicit OutputDir(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
  }

  [[nodiscard]] bool enabled() const { return dir_.has_value(); }

  void json_file(const std::string& name, const json& j) {
    if (!dir_) return;
    write_json_file(*dir_ / name, j);
    artifacts_.push_back(name);
  }

  void text_file(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    if (!dir_) return;
    std::ostringstream buf;
    writer(buf);
    write_text_file(*dir_ / name, buf.str());
    artifacts_.push_back(name);
  }

  void finish(const std::vector<std::string>& command, const json& config,
              std::uint64_t base_seed) {
    if (!dir_) return;
    Manifest m;
    m.command = command;
    m.config = config;
    m.config_hash = config_hash(config);
    m.base_seed = base_seed;
    m.artifacts = artifacts_;
    m.version = version();
    m.timestamp = utc_timestamp();
    write_json_file(*dir_ / "manifest.json", to_json(m));
  }

 private:
  std::optional<fs::path> dir_;
  std::vector<std::string> artifacts_;
};

struct Globals {
  bool pretty = false;
  int jobs = 0;
  bool replaying = false;
};

void print_result(std::ostream& out, const json& j, bool pretty);

void print_pretty(std::ostream& out, const json& j, const std::string& indent) {
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      out << indent << key << ":\n";
      print_pretty(out, value, indent + "  ");
    } else if (value.is_array() && !value.empty() && value.front().is_object()) {
      out << indent << key << ":\n";
      for (const json& row : value) {
        out << indent << "  -";
        for (const auto& [k, v] : row.items()) {
          out << ' ' << k << '=';
          if (v.is_number_float()) out << std::setprecision(6) << v.get<double>();
          else out << v.dump();
        }
        out << '\n';
      }
    } else if (value.is_number_float()) {
      out << indent << key << ": " << std::setprecision(6) << value.get<double>() << '\n';
    } else {
      out << indent << key << ": " << value.dump() << '\n';
    }
  }
}

void print_result(std::ostream& out, const json& j, bool pretty) {
  if (pretty) print_pretty(out, j, "");
  else out << j.dump(2) << '\n';
}

void require_start(double x0) {
  if (!(x0 >= -0.6 && x0 <= -0.4)) {
    throw UsageError("--x0 must lie in the start range [-0.6, -0.4]");
  }
}

// ----------------------------------------------------------------- analytic

struct AnalyticArgs {
  std::optional<double> x0;
  std::string mode = "two";
  std::optional<int> scan;
  std::optional<std::string> out;
};

json solution_table_row(const AnalyticSolution& s) { return to_json(s); }

int cmd_analytic(const AnalyticArgs& a, const Globals& g, const std::vector<std::string>& command,
                 std::ostream& out) {
  if (a.x0) require_start(*a.x0);
  if (a.scan && *a.scan < 1) throw UsageError("--scan-x0 needs at least one point");
  const bool scan = a.scan.has_value() || !a.x0;
  if (scan && !a.scan && (a.mode == "single" || a.mode == "two")) {
    throw UsageError("--mode " + a.mode + " needs --x0 or --scan-x0");
  }
  const int points = a.scan.value_or(100);

  OutputDir dir(a.out ? std::optional<fs::path>(*a.out) : std::nullopt);
  json config{{"command", "analytic"}, {"mode", a.mode}};
  if (scan) config["scan_x0"] = points;
  else config["x0"] = *a.x0;

  const SearchOptions opts;
  const Phase2Solution phase2 = solve_phase2(opts);
  json result{{"mode", a.mode}, {"phase2", to_json(phase2)}};

  auto solve = [&](double x0) {
    if (a.mode == "single") return solve_single_phase(x0, opts);
    AnalyticSolution s = solve_two_phase(x0, opts, &phase2);
    if (a.mode == "opt-x0" && !s.feasible()) s = solve_single_phase(x0, opts);
    return s;
  };

  if (a.mode == "worst" || (a.mode == "opt-x0" && scan)) {
    const AnalyticPolicy pa = make_pi_ana(opts.policy, opts.env);
    if (scan) {
      EvalReport report;
      if (a.mode == "worst") {
        report = eval_mc(McPolicy(pa), points, opts.env, g.jobs);
      } else {
        report = eval_mc([&](double x0) { return pi_opt_x0(x0, opts, &phase2); }, points,
                         opts.env, g.jobs);
      }
      result["report"] = to_json(report);
      dir.json_file("report.json", to_json(report));
      dir.text_file("eval.csv", [&](std::ostream& o) { write_eval_csv(o, report); });
    } else {
      const Trajectory traj = mc_rollout(pa, *a.x0, opts.env);
      result["rollout"] = {{"x0", *a.x0},           {"reached", traj.reached},
                           {"return", traj.ret},    {"t_star", traj.t_star},
                           {"v_star", traj.v_star}, {"loss", traj.loss}};
      dir.text_file("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
    }
    dir.text_file("boundary.csv", [&](std::ostream& o) { write_boundary_csv(o, *pa.boundary); });
  } else if (scan) {
    const std::vector<double> starts = start_grid(points);
    std::vector<AnalyticSolution> sols(starts.size());
    parallel_for(starts.size(), g.jobs, [&](std::size_t i) { sols[i] = solve(starts[i]); });
    json rows = json::array();
    for (const AnalyticSolution& s : sols) rows.push_back(solution_table_row(s));
    result["solutions"] = rows;
    dir.json_file("solutions.json", rows);
    dir.text_file("solutions.csv", [&](std::ostream& o) {
      o << "x0,kind,k,c,c1,c2,loss,R,t_star,v_star\n" << std::setprecision(17);
      for (const AnalyticSolution& s : sols) {
        o << s.x0 << ',' << to_string(s.kind) << ',' << s.k << ',' << s.c << ',' << s.c1 << ','
          << s.c2 << ',' << s.loss << ',' << s.ret << ',' << s.t_star << ',' << s.v_star << '\n';
      }
    });
  } else {
    const AnalyticSolution s = solve(*a.x0);
    result["solution"] = to_json(s);
    dir.json_file("solution.json", to_json(s));
    if (s.feasible()) {
      const Trajectory traj = mc_rollout(s.policy(opts), *a.x0, opts.env);
      dir.text_file("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
    }
    const PhaseBoundary& b = s.boundary ? *s.boundary : phase2.boundary;
    dir.text_file("boundary.csv", [&](std::ostream& o) { write_boundary_csv(o, b); });
  }
  dir.finish(command, config, 0);
  print_result(out, result, g.pretty);
  return kExitOk;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string env = "mountaincar";
  std::string algo;
  std::optional<int> degree;
  std::optional<int> sigma_degree;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::string> out;
};

std::string run_name(std::size_t i) {
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << i;
  return s.str();
}

int cmd_train(const TrainArgs& a, const Globals& g, const std::vector<std::string>& command,
              std::ostream& out, std::ostream& err) {
  ProtocolConfig cfg = default_protocol(parse_algo(a.algo), parse_env(a.env));
  if (a.config) apply_json(read_json_file(*a.config), cfg);
  if (a.degree) cfg.degree = *a.degree;
  if (a.sigma_degree) cfg.sigma_degree = *a.sigma_degree;
  if (a.runs) cfg.runs = *a.runs;
  if (a.seed) cfg.base_seed = *a.seed;
  if (const char* env_seed = std::getenv("CHEBY_SEED"); env_seed && !g.replaying) {
    try {
      std::size_t used = 0;
      cfg.base_seed = std::stoull(env_seed, &used);
      if (used != std::string(env_seed).size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("CHEBY_SEED must be an unsigned integer");
    }
  }
  if (cfg.sigma_degree < 0 || cfg.sigma_degree > 3) {
    throw UsageError("--sigma-degree must be between 0 and 3");
  }
  if (cfg.degree < 1) throw UsageError("--degree must be at least 1");
  if (cfg.runs < 1) throw UsageError("--runs must be at least 1");
  cfg.jobs = g.jobs;

  const ProtocolResult result = train_protocol(cfg);

  OutputDir dir(a.out ? std::optional<fs::path>(*a.out) : std::nullopt);
  json config = to_json(cfg);
  config["command"] = "train";
  dir.json_file("config.json", config);
  json runs = json::array();
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const RunStats& r = result.runs[i];
    json artifact = to_json(r);
    artifact.erase("wall_seconds");  // keeps artifacts bit-identical on replay
    dir.json_file("runs/run_" + run_name(i) + ".json", artifact);
    dir.text_file("curves/run_" + run_name(i) + ".csv",
                  [&](std::ostream& o) { write_learning_curve_csv(o, r.run.returns); });
    runs.push_back({{"seed", r.seed},
                    {"diverged", r.run.diverged},
                    {"eval_mean", r.eval_mean},
                    {"eval_std", r.eval_std}});
  }
  json summary{{"algo", to_string(cfg.algo)},
               {"env", to_string(cfg.env)},
               {"degree", cfg.degree},
               {"runs", runs},
               {"diverged", result.diverged_count()}};
  if (result.best) {
    const RunStats& best = result.runs[*result.best];
    summary["best"] = {{"seed", best.seed}, {"eval_mean", best.eval_mean}};
    dir.json_file("best_policy.json",
                  to_json(PolicyFile{to_string(cfg.env), to_string(cfg.algo), best.seed,
                                     *best.run.policy}));
  } else {
    summary["best"] = nullptr;
  }
  dir.json_file("summary.json", summary);
  dir.finish(command, config, cfg.base_seed);
  print_result(out, summary, g.pretty);
  if (!result.best) {
    err << "all " << result.runs.size() << " runs diverged\n";
    return kExitTrainingFailed;
  }
  return kExitOk;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::optional<std::string> policy;
  bool analytic_worst = false;
  std::optional<std::string> env;
  std::optional<int> grid;
  bool heatmap = false;
  int heatmap_points = 200;
  std::optional<double> overlay_x0;
  int bins = 50;
  std::optional<std::string> out;
};

int cmd_eval(const EvalArgs& a, const Globals& g, const std::vector<std::string>& command,
             std::ostream& out) {
  if (a.policy.has_value() == a.analytic_worst) {
    throw UsageError("give exactly one of --policy and --analytic-worst");
  }
  std::optional<PolicyFile> file;
  if (a.policy) file = policy_from_json(read_json_file(*a.policy));
  const EnvKind env = parse_env(a.env.value_or(file ? file->env : "mountaincar"));
  if (file) {
    const int want = env == EnvKind::kMountainCar ? 2 : 3;
    if (file->policy.state_dim() != want) {
      throw SchemaError("policy: state dimension " + std::to_string(file->policy.state_dim()) +
                        " does not match " + to_string(env));
    }
  }
  if (a.overlay_x0) require_start(*a.overlay_x0);

  OutputDir dir(a.out ? std::optional<fs::path>(*a.out) : std::nullopt);
  json config{{"command", "eval"},
              {"env", to_string(env)},
              {"policy", file ? to_json(*file) : json("analytic-worst")},
              {"heatmap", a.heatmap}};
  json result;

  if (env == EnvKind::kPendulum) {
    if (!file) throw UsageError("--analytic-worst applies to mountaincar only");
    if (a.heatmap || a.overlay_x0) throw UsageError("--heatmap applies to mountaincar only");
    const int grid = a.grid.value_or(50);
    if (grid < 2) throw UsageError("--grid must be at least 2");
    config["grid"] = grid;
    const EvalReport report = eval_pendulum(pendulum_policy(file->policy), grid, {}, g.jobs);
    std::vector<double> rets;
    for (const StartResult& r : report.per_start) rets.push_back(r.ret);
    const Histogram hist = histogram(rets, a.bins);
    result = to_json(report);
    dir.json_file("report.json", result);
    dir.text_file("eval.csv", [&](std::ostream& o) { write_eval_csv(o, report); });
    dir.text_file("density.csv", [&](std::ostream& o) { write_density_csv(o, hist); });
  } else {
    const int grid = a.grid.value_or(100);
    if (grid < 1) throw UsageError("--grid must be at least 1");
    config["grid"] = grid;
    const AnalyticPolicy pa = make_pi_ana();
    const McPolicy policy = file ? mc_policy(file->policy) : McPolicy(pa);
    EvalReport report = eval_mc(policy, grid, {}, g.jobs);
    const EvalReport reference = file ? eval_mc(McPolicy(pa), grid, {}, g.jobs) : report;
    attach_regret(report, reference);
    report.l2_distance = policy_l2_distance(policy, pa);
    result = to_json(report);
    dir.json_file("report.json", result);
    dir.text_file("eval.csv", [&](std::ostream& o) { write_eval_csv(o, report); });
    if (a.heatmap || a.overlay_x0) {
      if (a.heatmap_points < 2) throw UsageError("--heatmap-points must be at least 2");
      const HeatmapGrid hm = heatmap(policy, a.heatmap_points, a.heatmap_points, a.overlay_x0);
      dir.text_file("heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(o, hm); });
      if (hm.overlay) {
        dir.text_file("overlay.csv", [&](std::ostream& o) { write_trajectory_csv(o, *hm.overlay); });
        result["overlay"] = {{"x0", *a.overlay_x0},
                             {"reached", hm.overlay->reached},
                             {"t_star", hm.overlay->t_star},
                             {"return", hm.overlay->ret}};
      }
    }
  }
  dir.finish(command, config, file ? file->seed : 0);
  print_result(out, result, g.pretty);
  return kExitOk;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  std::string sweep;
  long steps = 20'000;
  std::optional<std::string> out;
};

std::pair<int, int> parse_sweep(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--degree-sweep expects a..b");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const std::string sa = text.substr(0, dots);
    const std::string sb = text.substr(dots + 2);
    const int lo = std::stoi(sa, &used_a);
    const int hi = std::stoi(sb, &used_b);
    if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument("");
    if (lo < 1) throw UsageError("--degree-sweep must start at degree 1 or above");
    if (hi < lo) throw UsageError("--degree-sweep '" + text + "' is empty");
    return {lo, hi};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("--degree-sweep expects integers a..b");
  }
}

double rollout_steps_per_second(const ChebyModel& model, long steps) {
  const McParams params;
  McState s{-0.5, 0.0, 0};
  double sink = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (long i = 0; i < steps; ++i) {
    const double obs[2] = {s.x, s.v};
    const StepResult r = mc_step(s, std::clamp(model.eval(obs), -1.0, 1.0), params);
    sink += r.reward;
    s = r.terminated || r.truncated ? McState{-0.5, 0.0, 0} : r.next;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!std::isfinite(sink)) return 0.0;
  return static_cast<double>(steps) / std::max(secs, 1e-12);
}

int cmd_bench(const BenchArgs& a, const Globals& g, const std::vector<std::string>& command,
              std::ostream& out) {
  const auto [lo, hi] = parse_sweep(a.sweep);
  if (a.steps < 1) throw UsageError("--steps must be positive");
  std::ostringstream csv;
  csv << "degree,steps_per_s,mults\n" << std::setprecision(17);
  const std::vector<Bounds> bounds{{-1.2, 0.6}, {-0.07, 0.07}};
  for (int d = lo; d <= hi; ++d) {
    Rng rng(static_cast<std::uint64_t>(d));
    std::vector<double> coeffs(basis_size(2, d));
    for (double& c : coeffs) c = rng.uniform(-1e-3, 1e-3);
    const ChebyModel model(2, d, bounds, coeffs);
    csv << d << ',' << rollout_steps_per_second(model, a.steps) << ','
        << horner_op_count(2, d).mults << '\n';
  }
  OutputDir dir(a.out ? std::optional<fs::path>(*a.out) : std::nullopt);
  dir.text_file("bench.csv", [&](std::ostream& o) { o << csv.str(); });
  dir.finish(command, {{"command", "bench"}, {"degree_sweep", a.sweep}, {"steps", a.steps}}, 0);
  (void)g;
  out << csv.str();
  return kExitOk;
}

// ------------------------------------------------------------------- driver

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             bool replaying) {
  CLI::App app{"Chebyshev-polynomial policies for continuous control"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Globals g;
  g.replaying = replaying;
  std::optional<std::string> replay;
  app.add_flag("--pretty", g.pretty, "Human-readable output instead of JSON");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all logical cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--replay", replay, "Re-run the command recorded in a manifest");
  std::optional<std::string> replay_out;
  app.add_option("--out", replay_out, "Output directory for --replay");

  AnalyticArgs aa;
  CLI::App* analytic = app.add_subcommand("analytic", "Closed-form policies and searches");
  analytic->add_option("--x0", aa.x0, "Start position in [-0.6, -0.4]");
  analytic->add_option("--mode", aa.mode, "single | two | worst | opt-x0")
      ->check(CLI::IsMember({"single", "two", "worst", "opt-x0"}));
  analytic->add_option("--scan-x0", aa.scan, "Evaluate on n evenly spaced starts");
  analytic->add_option("--out", aa.out, "Output directory");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Best-of-n training protocol");
  train->add_option("--env", ta.env, "mountaincar | pendulum")
      ->check(CLI::IsMember({"mountaincar", "pendulum"}));
  train->add_option("--algo", ta.algo, "reinforce | ars | ppo")
      ->required()
      ->check(CLI::IsMember({"reinforce", "ars", "ppo"}));
  train->add_option("--degree", ta.degree, "Degree of the mean head");
  train->add_option("--sigma-degree", ta.sigma_degree, "Degree of the sigma head (0..3)");
  train->add_option("--runs", ta.runs, "Independent runs");
  train->add_option("--seed", ta.seed, "Base seed (CHEBY_SEED overrides)");
  train->add_option("--config", ta.config, "JSON file overriding defaults");
  train->add_option("--out", ta.out, "Output directory");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Grid evaluation of a policy");
  eval->add_option("--policy", ea.policy, "Policy JSON written by train");
  eval->add_flag("--analytic-worst", ea.analytic_worst, "Evaluate the worst-case analytic policy");
  eval->add_option("--env", ea.env, "mountaincar | pendulum")
      ->check(CLI::IsMember({"mountaincar", "pendulum"}));
  eval->add_option("--grid", ea.grid, "Grid points (per axis for pendulum)");
  eval->add_flag("--heatmap", ea.heatmap, "Write the action heatmap CSV");
  eval->add_option("--heatmap-points", ea.heatmap_points, "Heatmap points per axis");
  eval->add_option("--overlay-x0", ea.overlay_x0, "Trajectory overlaid on the heatmap");
  eval->add_option("--bins", ea.bins, "Return-density bins (pendulum)")->check(CLI::PositiveNumber);
  eval->add_option("--out", ea.out, "Output directory");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Rollout throughput per degree");
  bench->add_option("--degree-sweep", ba.sweep, "Degree range a..b")->required();
  bench->add_option("--steps", ba.steps, "Environment steps per degree");
  bench->add_option("--out", ba.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (replay) {
      if (app.got_subcommand(analytic) || app.got_subcommand(train) || app.got_subcommand(eval) ||
          app.got_subcommand(bench)) {
        throw UsageError("--replay takes no subcommand");
      }
      const Manifest m = manifest_from_json(read_json_file(*replay));
      std::vector<std::string> cmd = m.command;
      if (replay_out) {
        auto it = std::find(cmd.begin(), cmd.end(), "--out");
        if (it != cmd.end() && it + 1 != cmd.end()) *(it + 1) = *replay_out;
        else {
          cmd.push_back("--out");
          cmd.push_back(*replay_out);
        }
      }
      if (std::find(cmd.begin(), cmd.end(), "train") != cmd.end()) {
        // The recorded base seed already includes any CHEBY_SEED override.
        auto it = std::find(cmd.begin(), cmd.end(), "--seed");
        if (it != cmd.end() && it + 1 != cmd.end()) *(it + 1) = std::to_string(m.base_seed);
        else {
          cmd.push_back("--seed");
          cmd.push_back(std::to_string(m.base_seed));
        }
      }
      return run_impl(cmd, out, err, true);
    }
    if (replay_out) throw UsageError("--out belongs after a subcommand");
    if (g.jobs == 0) g.jobs = resolve_jobs(0);
    if (app.got_subcommand(analytic)) return cmd_analytic(aa, g, args, out);
    if (app.got_subcommand(train)) return cmd_train(ta, g, args, out, err);
    if (app.got_subcommand(eval)) return cmd_eval(ea, g, args, out);
    if (app.got_subcommand(bench)) return cmd_bench(ba, g, args, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_impl(args, out, err, false);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace chebyrl::cli
