#pragma once

#include "mfgan/autodiff/mlp.hpp"

namespace mfgan::ad {

enum class OptimizerKind { kPlain, kAdam };
enum class Direction { kDescent, kAscent };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order update rule with its own moment state. Plain mode is
/// params ∓ rate·grad; adam mode uses bias-corrected first and second
/// moment estimates (Kingma & Ba) and keeps them between calls.
class Optimizer {
 public:
  explicit Optimizer(OptimizerKind kind = OptimizerKind::kPlain,
                     Direction direction = Direction::kDescent, AdamOptions adam = {});

  /// Applies one update in place. Throws NumericalError if `grad` has a
  /// non-finite entry and ShapeError on length mismatch.
  void step(ParamVector& params, const ParamVector& grad, double rate);

  long steps_taken() const { return steps_; }
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  Direction direction_;
  AdamOptions adam_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  long steps_ = 0;
};

}  // namespace mfgan::ad
