#pragma once

#include <cstdint>
#include <vector>

#include "mfgan/dynamics/training.hpp"

namespace mfgan::fdr {

using dyn::Mat;
using dyn::StateMat;
using dyn::StateVec;
using dyn::ToyGanProblem;
using dyn::UpdateMode;
using dyn::Vec;

/// Minibatch covariance estimates (divisor B − 1).
struct CovEstimate {
  Mat theta;
  Mat omega;
  int batch_size;
};

/// Sample covariances of the per-pair gradients in `batch` about the batch
/// mean. Throws ConfigError for B < 2.
CovEstimate cov_estimators(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                           const dyn::Batch& batch);

struct StationaryOptions {
  UpdateMode mode = UpdateMode::kSml;
  double eta = 0.01;
  int batch = 32;
  /// Noise temperature; 0 means β = 2B/η.
  double beta = 0.0;
  double dt = 0.01;
  long steps = 200000;
  std::uint64_t seed = 0;
  Vec theta0;  // empty means zeros
  Vec omega0;
};

/// Stationary samples of the training SDE: every Euler-Maruyama state after
/// the first half of the run (the burn-in).
struct Trajectory {
  UpdateMode mode;
  double eta;
  double beta;
  std::vector<Vec> theta;
  std::vector<Vec> omega;
};

Trajectory simulate_stationary(const ToyGanProblem& problem, const StationaryOptions& options);

/// Time average with a batch-means standard error.
struct Estimate {
  double mean;
  double std_error;
};

/// Batch-means estimate of the mean of an autocorrelated series (50
/// batches); throws on fewer than 1000 samples.
Estimate batch_means(const std::vector<double>& series);

/// Moment-drift check: first- and second-half means differ by less than
/// 2 combined standard errors.
bool looks_stationary(const std::vector<double>& series);

inline constexpr std::size_t kMinStationarySamples = 1000;

struct Fdr1Result {
  Estimate lhs;       // E[‖∇_θΦ‖² − ‖∇_ωΦ‖²]
  Estimate rhs_beta;  // β⁻¹ E[Tr(Σ_θ ∇²_θΦ + Σ_ω ∇²_ωΦ)]
  Estimate rhs_eta;   // −(η/2) E[∇_θΦᵀ∇²_θΦ∇_θΦ + ∇_ωΦᵀ∇²_ωΦ∇_ωΦ]; 0 for SML
  Estimate gap;       // lhs − rhs_beta − rhs_eta
  bool stationary;
  std::size_t samples;
};

struct Fdr2Result {
  Estimate lhs;  // E[Θᵀ∇_θΦ − 𝒲ᵀ∇_ωΦ]
  Estimate rhs;  // β⁻¹ E[Tr(Σ_θ + Σ_ω)]
  Estimate gap;
  double ratio;  // lhs / rhs
  bool stationary;
  std::size_t samples;
};

/// Both sides of the first relation along a stationary trajectory. Throws
/// Error when fewer than 1000 samples are available.
Fdr1Result fdr1_gap(const Trajectory& trajectory, const ToyGanProblem& problem);
Fdr2Result fdr2_gap(const Trajectory& trajectory, const ToyGanProblem& problem);

/// Stationary covariance P of dX = A X dt + S dW, solving AP + PAᵀ + SSᵀ = 0
/// (A must be stable). Used as the linear-SDE moment oracle.
StateMat lyapunov_covariance(const StateMat& a, const StateMat& s);

}  // namespace mfgan::fdr
