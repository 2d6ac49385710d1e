#include "mfgan/autodiff/optimizer.hpp"

#include <cmath>

#include "mfgan/common/error.hpp"

namespace mfgan::ad {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "plain" || name == "sgd") return OptimizerKind::kPlain;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("optimizer", "unknown optimizer '" + std::string(name) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "plain";
}

Optimizer::Optimizer(OptimizerKind kind, Direction direction, AdamOptions adam)
    : kind_(kind), direction_(direction), adam_(adam) {}

void Optimizer::step(ParamVector& params, const ParamVector& grad, double rate) {
  if (grad.size() != params.size()) {
    throw ShapeError("gradient has " + std::to_string(grad.size()) + " entries, parameters have " +
                     std::to_string(params.size()));
  }
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error("learning rate must be finite and >= 0");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError("non-finite gradient entry " + std::to_string(i) + " at optimizer step " +
                           std::to_string(steps_));
    }
  }
  const double sign = direction_ == Direction::kDescent ? -1.0 : 1.0;
  ++steps_;
  if (kind_ == OptimizerKind::kPlain) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += sign * rate * grad[i];
    return;
  }
  if (first_moment_.size() != params.size()) {
    first_moment_.assign(params.size(), 0.0);
    second_moment_.assign(params.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment_[i] = adam_.beta1 * first_moment_[i] + (1.0 - adam_.beta1) * grad[i];
    second_moment_[i] = adam_.beta2 * second_moment_[i] + (1.0 - adam_.beta2) * grad[i] * grad[i];
    const double m_hat = first_moment_[i] / c1;
    const double v_hat = second_moment_[i] / c2;
    params[i] += sign * rate * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
  }
}

}  // namespace mfgan::ad
