#pragma once

#include <cstdint>
#include <vector>

#include "mfgan/fdr/fdr.hpp"

namespace mfgan::fdr {

/// Learning-rate scheduler driven by the second fluctuation-dissipation
/// relation. After k triggers η = η₀(1 − δ)^k, and β = 2B/η.
struct SchedulerState {
  double eta0;
  double eta;
  double tolerance;  // ε
  double decay;      // δ
  int batch;
  double beta;
  long triggers = 0;
  long steps = 0;

  static SchedulerState make(double eta0, double tolerance, double decay, int batch);
};

struct SchedulerLogEntry {
  long step;
  double ratio;     // NaN when undefined
  bool undefined;   // zero denominator
  bool triggered;
  double eta;       // after the step
};

/// (Θᵀg_θ^ℬ − 𝒲ᵀg_ω^ℬ) / (β⁻¹ Tr(Σ̂_θ + Σ̂_ω)); NaN for a zero denominator.
double scheduler_ratio(const SchedulerState& state, const Vec& theta, const Vec& omega,
                       const dyn::Gradients& batch_gradients, const CovEstimate& cov);

/// Applies the rule: if |ratio − 1| < ε then η ← η₀(1 − δ)^{k+1} and β is
/// recomputed. A zero denominator leaves the state unchanged and logs an
/// undefined ratio.
SchedulerState scheduler_step(const SchedulerState& state, const Vec& theta, const Vec& omega,
                              const dyn::Gradients& batch_gradients, const CovEstimate& cov,
                              SchedulerLogEntry* log = nullptr);

/// Same rule applied to a precomputed ratio (NaN means undefined).
SchedulerState scheduler_step_ratio(const SchedulerState& state, double ratio,
                                    SchedulerLogEntry* log = nullptr);

/// SML training on a toy with the scheduler consulted after every step,
/// using the step's own batch for g^ℬ and Σ̂.
struct ScheduledRunOptions {
  double eta0 = 0.1;
  double tolerance = 0.05;
  double decay = 0.1;
  int batch = 32;
  long steps = 1000;
  std::uint64_t seed = 0;
  Vec theta0;
  Vec omega0;
};

struct ScheduledRun {
  std::vector<SchedulerLogEntry> log;
  dyn::TrainState final_state;
};

ScheduledRun scheduled_sml_run(const dyn::ToyGanProblem& problem, const ScheduledRunOptions& options);

/// Scripted ratio stream r_k = start + (end − start) k / steps, k = 0..steps.
std::vector<double> ramp_stream(double start, double end, long steps);

}  // namespace mfgan::fdr
