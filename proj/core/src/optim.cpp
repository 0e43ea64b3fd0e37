#include "chebyrl/optim.hpp"

#include <cmath>

#include "chebyrl/errors.hpp"

namespace chebyrl {

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kAdamW:
      return "adamw";
    case OptimizerKind::kAdam:
      return "adam";
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kRmsProp:
      return "rmsprop";
  }
  return "unknown";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adamw") return OptimizerKind::kAdamW;
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  throw ConfigError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(const OptimizerConfig& config, std::size_t size)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config.lr > 0.0) || !std::isfinite(config.lr)) throw ConfigError("step size must be > 0");
  if (config.weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ConfigError("optimizer: parameter size mismatch");
  }
  ++t_;
  const OptimizerConfig& c = config_;
  switch (c.kind) {
    case OptimizerKind::kSgd:
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= c.lr * grad[i];
      return;
    case OptimizerKind::kRmsProp:
      for (std::size_t i = 0; i < params.size(); ++i) {
        v_[i] = c.rms_alpha * v_[i] + (1.0 - c.rms_alpha) * grad[i] * grad[i];
        params[i] -= c.lr * grad[i] / (std::sqrt(v_[i]) + c.eps);
      }
      return;
    case OptimizerKind::kAdam:
    case OptimizerKind::kAdamW: {
      const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
      const bool decoupled = c.kind == OptimizerKind::kAdamW;
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (decoupled) params[i] -= c.lr * c.weight_decay * params[i];
        m_[i] = c.beta1 * m_[i] + (1.0 - c.beta1) * grad[i];
        v_[i] = c.beta2 * v_[i] + (1.0 - c.beta2) * grad[i] * grad[i];
        params[i] -= c.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + c.eps);
      }
      return;
    }
  }
}

}  // namespace chebyrl
