// Grid evaluation of the per-start optimum against a Monte-Carlo estimate of
// the same expectation over uniformly drawn starts.
#include <cmath>
#include <cstdio>
#include <vector>

#include "chebyrl/analytic.hpp"
#include "chebyrl/eval.hpp"
#include "chebyrl/parallel.hpp"
#include "chebyrl/rng.hpp"

int main() {
  using namespace chebyrl;
  constexpr int kSamples = 10'000;
  constexpr double kTolerance = 0.05;
  const int jobs = resolve_jobs(0);
  const SearchOptions opts;
  const Phase2Solution phase2 = solve_phase2(opts);

  const EvalReport grid =
      eval_mc([&](double x0) { return pi_opt_x0(x0, opts, &phase2); }, 100, opts.env, jobs);

  Rng rng(20240917);
  std::vector<double> starts(kSamples);
  for (double& x : starts) x = rng.uniform(-0.6, -0.4);
  std::vector<double> returns(kSamples);
  parallel_for(starts.size(), jobs, [&](std::size_t i) {
    returns[i] = mc_rollout(pi_opt_x0(starts[i], opts, &phase2), starts[i], opts.env).ret;
  });
  const SummaryStats mc = summarize(returns);
  const double se = mc.std / std::sqrt(static_cast<double>(kSamples));
  const double diff = std::abs(grid.returns.mean - mc.mean);
  const bool pass = diff < kTolerance;
  std::printf("%s grid mean %.4f, Monte-Carlo mean %.4f (se %.4f), |diff| %.4f < %.2f\n",
              pass ? "PASS" : "FAIL", grid.returns.mean, mc.mean, se, diff, kTolerance);
  return pass ? 0 : 1;
}
