#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string_view>
#include <vector>

#include "mfgan/autodiff/mlp.hpp"
#include "mfgan/autodiff/optimizer.hpp"
#include "mfgan/common/error.hpp"
#include "mfgan/mfg/problem.hpp"

namespace mfgan::mfg {

enum class MfgMode { kErgodic, kTimeDependent };

MfgMode parse_mode(std::string_view name);
std::string_view mode_name(MfgMode mode);

/// Knobs of the adversarial solver. In ergodic mode the discriminator owns
/// the density network n_ω (m = eⁿ/Ẑ) and the generator owns u_θ plus the
/// ergodic constant H̄, stored as the single extra entry of its parameters.
struct SolverConfig {
  MfgMode mode = MfgMode::kErgodic;
  int dim = 1;
  long outer_iterations = 100000;
  int inner_theta = 1;
  int inner_omega = 1;
  int batch_d = 128;
  int batch_g = 128;
  double beta_d = 1.0;  // weight of the initial-condition penalty (time-dependent)
  double beta_g = 1.0;  // weight of the terminal-condition penalty (time-dependent)
  double lambda_u = 1.0;  // weight of (mean_batch u)² (ergodic)
  double rate_d = 1e-3;
  double rate_g = 1e-3;
  ad::OptimizerKind optimizer = ad::OptimizerKind::kAdam;
  std::vector<int> hidden = {50, 50, 50};
  ad::Activation activation = ad::Activation::kTanh;
  std::uint64_t seed = 0;
  /// 0 picks 256 uniform points for d = 1 and 10⁴ uniform random points otherwise.
  int eval_points = 0;
  /// Points of the fixed quadrature set for Ẑ; 0 picks the 1D eval grid
  /// or 4096 uniform random points for d > 1.
  int normalization_points = 0;
  long eval_every = 1;
  double horizon = 1.0;  // time-dependent only
  long checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

/// One row of the training trace. Quantities not defined in the current
/// mode (or skipped by eval_every) are NaN.
struct MetricsRow {
  long outer_iter;
  double l_fp;
  double l_hjb;
  double penalty_u;  // λ_u (mean u)² in ergodic mode
  double l_init;
  double l_term;
  double rel_l2_u;
  double rel_l2_m;
  double hbar;
};

struct TrainResult {
  ad::Mlp u_net;
  ad::Mlp n_net;
  ad::ParamVector u_params;
  ad::ParamVector n_params;
  double hbar;
  double log_z;
  std::vector<MetricsRow> trace;
};

/// Raised when a loss or gradient goes non-finite; the last finite
/// parameters were dumped to `checkpoint_paths` when a directory was set.
class NumericalAbort : public NumericalError {
 public:
  NumericalAbort(long iteration, std::vector<std::filesystem::path> paths, const std::string& what);
  long iteration() const { return iteration_; }
  const std::vector<std::filesystem::path>& checkpoint_paths() const { return paths_; }

 private:
  long iteration_;
  std::vector<std::filesystem::path> paths_;
};

using MetricsObserver = std::function<void(const MetricsRow&)>;

ad::NetworkSpec u_network_spec(const SolverConfig& config);
ad::NetworkSpec n_network_spec(const SolverConfig& config);

/// Ergodic adversarial training: per outer iteration refresh Ẑ, take
/// inner_omega steps on L_D = mean FP² over a fresh batch, then
/// inner_theta steps on L_G = mean HJB² + λ_u (mean u)² over another.
TrainResult train_mfgan(const ErgodicMfgProblem& problem, const SolverConfig& config,
                        const MetricsObserver& observer = {});

/// Finite-horizon adversarial training with the initial/terminal penalties.
TrainResult train_mfgan(const TdMfgProblem& problem, const SolverConfig& config,
                        const MetricsObserver& observer = {});

struct TdLosses {
  double fp;
  double init;
  double hjb;
  double term;
  double discriminator;  // fp + β_D init
  double generator;      // hjb + β_G term
};

/// Time-dependent losses on sample batches whose columns are (s, x).
/// The density is m = exp(n(s, x)). Throws on an empty batch.
TdLosses td_losses(const TdMfgProblem& problem, const ad::Mlp& u_net, const ad::ParamVector& u_params,
                   const ad::Mlp& n_net, const ad::ParamVector& n_params,
                   const Eigen::MatrixXd& samples_d, const Eigen::MatrixXd& samples_g,
                   const SolverConfig& config);

/// Uniform evaluation grid (d = 1) or seeded uniform random points, d × n.
Eigen::MatrixXd evaluation_points(int dim, int count, std::uint64_t seed);

struct FieldErrors {
  double u;
  double m;
};

/// Relative l₂ errors of u and m = exp(n − log_z) against the closed form
/// on the columns of `points`.
FieldErrors oracle_errors(const ClosedFormSolution& solution, const ad::Mlp& u_net,
                          const ad::ParamVector& u_params, const ad::Mlp& n_net,
                          const ad::ParamVector& n_params, double log_z,
                          const Eigen::MatrixXd& points);

/// log of the sample mean of exp(n) over the columns of `points`.
double log_normalizer(const ad::Mlp& n_net, const ad::ParamVector& n_params,
                      const Eigen::MatrixXd& points);

}  // namespace mfgan::mfg
