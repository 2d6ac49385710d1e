#include "mfgan/fdr/scheduler.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mfgan/common/error.hpp"

namespace mfgan::fdr {

SchedulerState SchedulerState::make(double eta0, double tolerance, double decay, int batch) {
  if (!(eta0 > 0.0)) throw ConfigError("eta0", "must be > 0");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance", "must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay", "must lie in (0, 1)");
  if (batch < 1) throw ConfigError("batch", "must be >= 1");
  return {eta0, eta0, tolerance, decay, batch, 2.0 * batch / eta0, 0, 0};
}

double scheduler_ratio(const SchedulerState& state, const Vec& theta, const Vec& omega,
                       const dyn::Gradients& batch_gradients, const CovEstimate& cov) {
  const double den = (cov.theta.trace() + cov.omega.trace()) / state.beta;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (theta.dot(batch_gradients.theta) - omega.dot(batch_gradients.omega)) / den;
}

SchedulerState scheduler_step_ratio(const SchedulerState& state, double ratio, SchedulerLogEntry* log) {
  SchedulerState next = state;
  const bool undefined = std::isnan(ratio);
  const bool trigger = !undefined && std::abs(ratio - 1.0) < state.tolerance;
  if (trigger) {
    ++next.triggers;
    next.eta = state.eta0 * std::pow(1.0 - state.decay, static_cast<double>(next.triggers));
    next.beta = 2.0 * state.batch / next.eta;
  }
  if (log) *log = {state.steps, ratio, undefined, trigger, next.eta};
  ++next.steps;
  return next;
}

SchedulerState scheduler_step(const SchedulerState& state, const Vec& theta, const Vec& omega,
                              const dyn::Gradients& batch_gradients, const CovEstimate& cov,
                              SchedulerLogEntry* log) {
  return scheduler_step_ratio(state, scheduler_ratio(state, theta, omega, batch_gradients, cov), log);
}

ScheduledRun scheduled_sml_run(const dyn::ToyGanProblem& problem, const ScheduledRunOptions& options) {
  if (options.steps < 0) throw ConfigError("steps", "must be >= 0");
  SchedulerState sched = SchedulerState::make(options.eta0, options.tolerance, options.decay, options.batch);
  if (options.batch < 2) throw ConfigError("batch", "the scheduler needs B >= 2");
  ScheduledRun run;
  run.final_state.theta = options.theta0.size() ? options.theta0 : Vec::Zero(problem.dim_theta());
  run.final_state.omega = options.omega0.size() ? options.omega0 : Vec::Zero(problem.dim_omega());
  std::mt19937_64 rng(options.seed);
  dyn::Batch batch;
  for (long k = 0; k < options.steps; ++k) {
    dyn::sample_batch(problem, options.batch, rng, batch);
    dyn::TrainState& s = run.final_state;
    const dyn::Gradients g = dyn::minibatch_gradients(problem, s.theta, s.omega, batch);
    const CovEstimate cov = cov_estimators(problem, s.theta, s.omega, batch);
    const double ratio = scheduler_ratio(sched, s.theta, s.omega, g, cov);
    s = dyn::sml_step(problem, s, sched.eta, batch);
    if (!s.theta.allFinite() || !s.omega.allFinite()) {
      throw NumericalError("scheduled run diverged at step " + std::to_string(k));
    }
    SchedulerLogEntry entry{};
    sched = scheduler_step_ratio(sched, ratio, &entry);
    run.log.push_back(entry);
  }
  return run;
}

std::vector<double> ramp_stream(double start, double end, long steps) {
  if (steps < 1) throw ConfigError("steps", "ramp needs at least one step");
  std::vector<double> r;
  for (long k = 0; k <= steps; ++k) r.push_back(start + (end - start) * static_cast<double>(k) / steps);
  return r;
}

}  // namespace mfgan::fdr
