#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mfgan/dynamics/training.hpp"

namespace mfgan::dyn {

enum class TestFunction { kTheta, kSumSquares, kConstant };

std::string_view test_function_name(TestFunction f);
/// Accepts theta, sum-squares, constant.
TestFunction parse_test_function(std::string_view name);
double evaluate_test_function(TestFunction f, const Vec& theta, const Vec& omega);

struct WeakErrorOptions {
  UpdateMode mode = UpdateMode::kAlt;
  TestFunction test_function = TestFunction::kTheta;
  std::vector<double> etas = {0.05, 0.02, 0.01};
  long replicas = 100000;
  double horizon = 1.0;
  int batch = 32;
  /// Euler-Maruyama steps per learning-rate step (dt = η / substeps).
  int substeps = 50;
  std::uint64_t seed = 0;
  Vec theta0;  // empty means zeros
  Vec omega0;
};

struct WeakErrorCheckpoint {
  double time;
  double discrete_mean;
  double sde_mean;
  double std_error;
};

struct WeakErrorRow {
  double eta;
  std::vector<WeakErrorCheckpoint> trace;
  double max_error;      // max_t |mean f(discrete) − mean f(SDE)|
  double std_error;      // Monte-Carlo standard error at the maximizing checkpoint
  double argmax_time;
  double discrete_final;  // mean f at the horizon
  double sde_final;
  bool inconclusive;     // max_error < 3 std_error
};

struct WeakErrorTable {
  UpdateMode mode;
  std::vector<WeakErrorRow> rows;
  /// Least-squares slope of log error against log η, with a delta-method
  /// standard error; NaN when some error is zero.
  double slope;
  double slope_std_error;
  bool inconclusive;  // any row inconclusive, or slope undefined
};

/// Runs `replicas` discrete trajectories (ALT or SML, batches of size B with
/// replacement) and `replicas` Euler-Maruyama paths of the matching SDE
/// for each η, comparing empirical means of f at t = η, 2η, …, ⌊T/η⌋η.
/// Replica r of stream s uses its own generator seeded from (seed, s, r),
/// so the table does not depend on evaluation order.
WeakErrorTable weak_error_table(const ToyGanProblem& problem, const WeakErrorOptions& options);

}  // namespace mfgan::dyn
