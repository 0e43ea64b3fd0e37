#include <benchmark/benchmark.h>

#include <vector>

#include "chebyrl/cheby.hpp"
#include "chebyrl/env.hpp"
#include "chebyrl/horner.hpp"
#include "chebyrl/pendulum.hpp"
#include "chebyrl/rng.hpp"

namespace {

using namespace chebyrl;

ChebyModel random_model(int n, int d) {
  Rng rng(static_cast<std::uint64_t>(n * 100 + d));
  std::vector<double> coeffs(basis_size(n, d));
  for (double& c : coeffs) c = rng.uniform(-1.0, 1.0);
  return ChebyModel(n, d, std::vector<Bounds>(n, Bounds{-1.0, 1.0}), coeffs);
}

void BM_RecurrenceEval(benchmark::State& state) {
  const ChebyModel m = random_model(2, static_cast<int>(state.range(0)));
  BasisVector basis;
  double x[2] = {0.3, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.eval(x, basis));
    x[0] = -x[0];
  }
}
BENCHMARK(BM_RecurrenceEval)->DenseRange(1, 10);

void BM_HornerEval(benchmark::State& state) {
  const HornerEvaluator h(random_model(2, static_cast<int>(state.range(0))));
  double x[2] = {0.3, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(h.eval(x));
    x[0] = -x[0];
  }
  state.counters["mults"] = static_cast<double>(horner_op_count(2, static_cast<int>(state.range(0))).mults);
}
BENCHMARK(BM_HornerEval)->DenseRange(1, 10);

void BM_MountainCarStep(benchmark::State& state) {
  McState s{-0.5, 0.0, 0};
  for (auto _ : state) {
    const StepResult r = mc_step(s, s.v >= 0.0 ? 1.0 : -1.0);
    s = r.terminated || r.truncated ? McState{-0.5, 0.0, 0} : r.next;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_MountainCarStep);

void BM_PendulumStep(benchmark::State& state) {
  PendulumState s{3.0, 0.0, 0};
  for (auto _ : state) {
    const PendulumStepResult r = pendulum_step(s, 1.0);
    s = r.truncated ? PendulumState{3.0, 0.0, 0} : r.next;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PendulumStep);

}  // namespace

BENCHMARK_MAIN();
