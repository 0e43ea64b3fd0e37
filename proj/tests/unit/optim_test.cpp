#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "chebyrl/errors.hpp"
#include "chebyrl/optim.hpp"

namespace chebyrl {
namespace {

OptimizerConfig make(OptimizerKind kind, double lr, double wd = 0.0) {
  OptimizerConfig c;
  c.kind = kind;
  c.lr = lr;
  c.weight_decay = wd;
  return c;
}

TEST(Optimizer, SgdStepsAgainstGradient) {
  Optimizer opt(make(OptimizerKind::kSgd, 0.1), 2);
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> g{0.5, -4.0};
  opt.step(p, g);
  EXPECT_DOUBLE_EQ(p[0], 0.95);
  EXPECT_DOUBLE_EQ(p[1], -1.6);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
  // Bias correction makes m_hat = g and v_hat = g^2 on the first step.
  Optimizer opt(make(OptimizerKind::kAdam, 0.01), 3);
  std::vector<double> p{0.0, 0.0, 0.0};
  const std::vector<double> g{3.0, -1e-3, 0.0};
  opt.step(p, g);
  EXPECT_NEAR(p[0], -0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Optimizer, AdamWDecaysWeightsDecoupled) {
  Optimizer opt(make(OptimizerKind::kAdamW, 0.01, 0.1), 1);
  std::vector<double> p{2.0};
  const std::vector<double> g{0.0};
  opt.step(p, g);
  EXPECT_NEAR(p[0], 2.0 * (1.0 - 0.01 * 0.1), 1e-15);
}

TEST(Optimizer, RmsPropFirstStep) {
  Optimizer opt(make(OptimizerKind::kRmsProp, 0.01), 1);
  std::vector<double> p{0.0};
  const std::vector<double> g{2.0};
  opt.step(p, g);
  // v = 0.01 * g^2, step = lr * g / (sqrt(v) + eps).
  EXPECT_NEAR(p[0], -0.01 * 2.0 / (std::sqrt(0.04) + 1e-8), 1e-14);
}

TEST(Optimizer, MinimizesQuadratic) {
  for (OptimizerKind kind : {OptimizerKind::kAdam, OptimizerKind::kAdamW, OptimizerKind::kSgd,
                             OptimizerKind::kRmsProp}) {
    Optimizer opt(make(kind, 0.05), 1);
    std::vector<double> p{5.0};
    for (int i = 0; i < 2000; ++i) {
      const std::vector<double> g{2.0 * (p[0] - 1.0)};
      opt.step(p, g);
    }
    EXPECT_NEAR(p[0], 1.0, 0.05) << to_string(kind);
  }
}

TEST(Optimizer, ParseNames) {
  EXPECT_EQ(parse_optimizer("adamw"), OptimizerKind::kAdamW);
  EXPECT_EQ(parse_optimizer("sgd"), OptimizerKind::kSgd);
  EXPECT_EQ(parse_optimizer("rmsprop"), OptimizerKind::kRmsProp);
  EXPECT_THROW(parse_optimizer("lbfgs"), ConfigError);
  for (OptimizerKind k : {OptimizerKind::kAdam, OptimizerKind::kAdamW, OptimizerKind::kSgd,
                          OptimizerKind::kRmsProp}) {
    EXPECT_EQ(parse_optimizer(to_string(k)), k);
  }
}

}  // namespace
}  // namespace chebyrl
