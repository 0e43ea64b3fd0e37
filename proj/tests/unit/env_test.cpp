#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "chebyrl/env.hpp"
#include "chebyrl/errors.hpp"
#include "chebyrl/rng.hpp"

namespace chebyrl {
namespace {

TEST(McStep, EquilibriumStaysPut) {
  const double x = -std::numbers::pi / 6.0;
  const StepResult r = mc_step({x, 0.0, 0}, 0.0);
  EXPECT_NEAR(r.next.x, x, 1e-18);
  EXPECT_NEAR(r.next.v, 0.0, 1e-18);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.terminated);
}

TEST(McStep, FullThrottleFromRest) {
  // 0.0015 - 0.0025*cos(1.5) with cos(1.5) = 0.0707372016677029...
  const double v = 0.0015 - 0.0025 * 0.0707372016677029100881;
  const StepResult r = mc_step({-0.5, 0.0, 0}, 1.0);
  EXPECT_NEAR(r.next.v, v, 1e-17);
  EXPECT_NEAR(r.next.x, -0.5 + v, 1e-16);
  EXPECT_NEAR(r.reward, -0.1, 1e-15);
  EXPECT_EQ(r.next.t, 1);
}

TEST(McStep, LeftWallIsInelastic) {
  const StepResult r = mc_step({-1.199, -0.05, 0}, 0.0);
  EXPECT_EQ(r.next.x, -1.2);
  EXPECT_EQ(r.next.v, 0.0);
  EXPECT_TRUE(r.wall_hit);
  EXPECT_GT(r.impact_speed, 0.0);
}

TEST(McStep, ActionIsClampedAndChargedClamped) {
  const StepResult a = mc_step({-0.5, 0.0, 0}, 7.0);
  const StepResult b = mc_step({-0.5, 0.0, 0}, 1.0);
  EXPECT_EQ(a.next.v, b.next.v);
  EXPECT_EQ(a.reward, b.reward);
}

TEST(McStep, RejectsNonFiniteInput) {
  EXPECT_THROW(mc_step({-0.5, 0.0, 0}, std::nan("")), DomainError);
  EXPECT_THROW(mc_step({INFINITY, 0.0, 0}, 0.0), DomainError);
}

TEST(McStep, GoalNeedsNonNegativeVelocity) {
  const StepResult up = mc_step({0.449, 0.002, 10}, 1.0);
  EXPECT_TRUE(up.terminated);
  EXPECT_NEAR(up.reward, 100.0 - 0.1, 1e-12);
  McParams p;
  p.v_goal = 0.5;  // unreachable speed threshold
  EXPECT_FALSE(mc_step({0.449, 0.002, 10}, 1.0, p).terminated);
}

TEST(McStep, TruncatesAtStepLimit) {
  const StepResult r = mc_step({-0.5, 0.0, 998}, 0.0);
  EXPECT_TRUE(r.truncated);
  EXPECT_FALSE(r.terminated);
}

TEST(McStep, ClampingHoldsOnRandomTransitions) {
  Rng rng(11);
  const McParams p;
  for (int i = 0; i < 100000; ++i) {
    const McState s{rng.uniform(p.x_min, p.x_max), rng.uniform(-p.v_max, p.v_max), 0};
    const StepResult r = mc_step(s, rng.uniform(-3.0, 3.0));
    ASSERT_GE(r.next.x, p.x_min);
    ASSERT_LE(r.next.x, p.x_max);
    ASSERT_LE(std::abs(r.next.v), p.v_max);
    if (r.wall_hit) {
      ASSERT_EQ(r.next.x, p.x_min);
      ASSERT_EQ(r.next.v, 0.0);
    }
  }
}

TEST(McParams, ValidateRejectsBrokenInvariants) {
  McParams p;
  EXPECT_NO_THROW(p.validate());
  p.x_goal = -1.3;
  EXPECT_THROW(p.validate(), ConfigError);
  p = McParams{};
  p.g = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = McParams{};
  p.v_max = INFINITY;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(McReset, OverridePassesThrough) {
  const McState s = mc_reset(std::uint64_t{5}, -0.55);
  EXPECT_EQ(s.x, -0.55);
  EXPECT_EQ(s.v, 0.0);
  EXPECT_EQ(s.t, 0);
}

TEST(McReset, OverrideOutsideBoundsIsRejected) {
  EXPECT_THROW(mc_reset(std::uint64_t{5}, 0.7), DomainError);
  EXPECT_THROW(mc_reset(std::uint64_t{5}, -1.3), DomainError);
}

TEST(McReset, SameSeedSameStart) {
  EXPECT_EQ(mc_reset(std::uint64_t{42}).x, mc_reset(std::uint64_t{42}).x);
  EXPECT_NE(mc_reset(std::uint64_t{42}).x, mc_reset(std::uint64_t{43}).x);
}

TEST(McReset, DrawsAreUniformOnStartRange) {
  Rng rng(2024);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = mc_reset(rng).x;
    ASSERT_GE(x, -0.6);
    ASSERT_LE(x, -0.4);
    sum += x;
  }
  EXPECT_NEAR(sum / 100000.0, -0.5, 0.002);
}

TEST(McRollout, ZeroPolicyNeverArrives) {
  for (double x0 : {-0.6, -0.5, -0.4}) {
    const Trajectory t = mc_rollout([](const McState&) { return 0.0; }, x0);
    EXPECT_FALSE(t.reached);
    EXPECT_EQ(t.ret, 0.0);
    EXPECT_EQ(t.loss, 0.0);
    EXPECT_EQ(t.steps(), 999u);
  }
}

TEST(McRollout, BangBangReturnCountsSteps) {
  const Trajectory t = mc_rollout([](const McState& s) { return s.v >= 0.0 ? 1.0 : -1.0; }, -0.5);
  ASSERT_TRUE(t.reached);
  EXPECT_NEAR(t.ret, 100.0 - 0.1 * t.t_star, 1e-10);
  EXPECT_GE(t.states.back().x, 0.45);
}

TEST(McRollout, RewardAccountingIdentity) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = rng.uniform(0.0, 40.0);
    const double bias = rng.uniform(-0.2, 0.2);
    const double x0 = rng.uniform(-0.6, -0.4);
    const Trajectory t =
        mc_rollout([&](const McState& s) { return c * s.v + bias; }, x0);
    double sum = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < t.steps(); ++i) {
      sum += t.rewards[i];
      loss += t.actions[i] * t.actions[i];
    }
    EXPECT_NEAR(t.ret + 0.1 * t.loss - 100.0 * t.reached, 0.0, 1e-12);
    EXPECT_NEAR(sum, t.ret, 1e-9);
    EXPECT_NEAR(loss, t.loss, 1e-9);
  }
}

TEST(McRollout, BitIdenticalReplays) {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    const double x0 = mc_reset(rng).x;
    return mc_rollout([&rng](const McState& s) { return 3.0 * s.v + 0.3 * rng.normal(); }, x0);
  };
  const Trajectory a = run(9);
  const Trajectory b = run(9);
  ASSERT_EQ(a.states.size(), b.states.size());
  EXPECT_EQ(0, std::memcmp(a.actions.data(), b.actions.data(), a.actions.size() * sizeof(double)));
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    ASSERT_EQ(a.states[i].x, b.states[i].x);
    ASSERT_EQ(a.states[i].v, b.states[i].v);
  }
}

TEST(McSimulate, AgreesWithFullRollout) {
  for (double c : {2.0, 4.8358, 30.0}) {
    const Trajectory t = mc_rollout([c](const McState& s) { return c * s.v; }, -0.55);
    const RolloutSummary s =
        mc_simulate([c](const McState& st) { return c * st.v; }, -0.55, 0.0, McParams{}, {});
    EXPECT_EQ(s.reached, t.reached);
    EXPECT_EQ(s.t, t.t_star);
    EXPECT_EQ(s.loss, t.loss);
    EXPECT_EQ(s.ret, t.ret);
  }
}

TEST(McRollout, TrajectoryCsvLayout) {
  const Trajectory t = mc_rollout([](const McState&) { return 1.0; }, -0.5);
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x,v,action,reward");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, t.states.size());
}

}  // namespace
}  // namespace chebyrl
