#pragma once

#include <span>
#include <string>
#include <vector>

namespace chebyrl {

enum class OptimizerKind { kAdamW, kAdam, kSgd, kRmsProp };

const char* to_string(OptimizerKind kind);
/// "adamw", "adam", "sgd", "rmsprop"; throws ConfigError otherwise.
OptimizerKind parse_optimizer(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double lr = 3e-4;
  double weight_decay = 0.01;  // decoupled, AdamW only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double rms_alpha = 0.99;
};

/// First-order minimizer with the usual published update rules (bias-corrected
/// Adam, decoupled weight decay for AdamW, RMSProp without momentum).
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, std::size_t size);

  /// params -= update(grad), where grad is the gradient of a loss.
  void step(std::span<double> params, std::span<const double> grad);

  [[nodiscard]] const OptimizerConfig& config() const { return config_; }
  [[nodiscard]] long steps() const { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace chebyrl
