#pragma once

#include <functional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "mfgan/dynamics/toy_gan.hpp"

namespace mfgan::dyn {

enum class UpdateMode { kAlt, kSml };

std::string_view update_mode_name(UpdateMode mode);
UpdateMode parse_update_mode(std::string_view name);

struct Gradients {
  Vec theta;
  Vec omega;
};

/// (i, j) index pairs; may repeat.
using Batch = std::vector<std::pair<int, int>>;

struct TrainState {
  Vec theta;
  Vec omega;
  long iteration = 0;
};

/// Full gradients of Φ: averages of the per-pair gradients over all N·M pairs.
Gradients full_gradients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega);

/// Batch averages of the per-pair gradients. Throws ShapeError on an
/// empty batch or an out-of-range pair.
Gradients minibatch_gradients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                              const Batch& batch);

/// B pairs drawn uniformly with replacement.
Batch sample_batch(const ToyGanProblem& problem, int size, std::mt19937_64& rng);
void sample_batch(const ToyGanProblem& problem, int size, std::mt19937_64& rng, Batch& out);

/// ω ← ω + η g_ω^ℬ(θ, ω), then θ ← θ − η g_θ^ℬ̄(θ, ω_new).
TrainState alt_step(const ToyGanProblem& problem, const TrainState& state, double eta, const Batch& batch,
                    const Batch& batch_bar);

/// Both players step from (θ, ω) with the same batch.
TrainState sml_step(const ToyGanProblem& problem, const TrainState& state, double eta, const Batch& batch);

struct Covariances {
  Mat theta;
  Mat omega;
};

/// Population covariances of the per-pair gradients (divisor N·M).
Covariances gradient_covariances(const ToyGanProblem& problem, const Vec& theta, const Vec& omega);

/// Jacobians of the full gradients (averages of the per-pair Jacobians).
PairJacobian full_jacobians(const ToyGanProblem& problem, const Vec& theta, const Vec& omega);

/// Symmetric PSD square root by eigendecomposition. Negative eigenvalues
/// are clipped at zero and reported through `clipped`.
Mat psd_sqrt(const Mat& a, bool* clipped = nullptr);

/// b₀ = (−g_θ, g_ω).
StateVec drift_b0(const Gradients& g);
/// b₁ = ½ [[∇_θg_θ, −∇_ωg_θ], [−∇_θg_ω, −∇_ωg_ω]] b₀.
StateVec b1_matrix_form(const Gradients& g, const PairJacobian& jac);
/// b₁ = −½ ∇b₀ b₀ − (∇_ωg_θ g_ω, 0).
StateVec b1_correction_form(const Gradients& g, const PairJacobian& jac);

struct SdeCoefficients {
  UpdateMode mode;
  StateVec drift;   // b₀ (SML) or b₀ + η b₁ (ALT)
  StateMat sigma;   // √(2/β) blockdiag(Σ_θ^{1/2}, Σ_ω^{1/2})
  double beta;      // 2B/η, or the override
  bool clipped;     // a covariance square root clipped a negative eigenvalue
};

/// Drift and diffusion of the training SDE at (θ, ω). A positive
/// `beta_override` replaces 2B/η in the diffusion (fixed noise temperature).
SdeCoefficients sde_coefficients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                                 double eta, int batch, UpdateMode mode, double beta_override = 0.0);

/// Drift and diffusion as functions of the stacked state (θ, ω).
using SdeField = std::function<void(const StateVec& state, StateVec& drift, StateMat& sigma)>;

SdeField toy_sde_field(const ToyGanProblem& problem, double eta, int batch, UpdateMode mode,
                       double beta_override = 0.0);

struct SdePath {
  std::vector<double> times;
  std::vector<StateVec> states;
};

/// Euler-Maruyama: x ← x + b(x) dt + σ(x) √dt ξ, ξ ~ N(0, I). Records the
/// state at t = 0 and every `record_every` steps. The last step is
/// shortened so the path ends at `horizon`. Throws NumericalError with the
/// step index when the state becomes non-finite.
SdePath euler_maruyama(const SdeField& field, const StateVec& init, double dt, double horizon,
                       std::mt19937_64& rng, long record_every = 1);

StateVec stack(const Vec& theta, const Vec& omega);

}  // namespace mfgan::dyn
