#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mfgan::dyn {

/// Largest per-player parameter dimension of the toy problems. Small
/// fixed-capacity Eigen types keep the simulation loops allocation-free.
inline constexpr int kMaxPlayerDim = 4;
inline constexpr int kMaxStateDim = 2 * kMaxPlayerDim;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPlayerDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPlayerDim, kMaxPlayerDim>;
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxStateDim, 1>;
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStateDim, kMaxStateDim>;

enum class ToyKind { kBilinear, kLinear, kQuadratic, kLogistic };

std::string_view toy_name(ToyKind kind);
/// Accepts bilinear, linear, quadratic, logistic; throws ConfigError.
ToyKind parse_toy(std::string_view name);

/// Per-pair gradients g_θ^{i,j} = ∇_θ J, g_ω^{i,j} = ∇_ω J.
struct PairGradient {
  Vec theta;
  Vec omega;
};

/// Per-pair Jacobians, entry [a][b] = ∂(g_a)/∂(param_b):
/// tt = ∇_θ g_θ, to = ∇_ω g_θ, ot = ∇_θ g_ω, oo = ∇_ω g_ω.
struct PairJacobian {
  Mat tt;
  Mat to;
  Mat ot;
  Mat oo;
};

/// Toy GAN with enumerable data: Φ(θ, ω) = (1/NM) Σ_{i,j} J_{ij}(θ, ω),
/// θ minimizing and ω maximizing. Available problems:
///
///  - bilinear:   J = θω (one latent, one data point).
///  - linear:     G_θ(z) = θz, D_ω(x) = ωx, J = D(x) − D(G(z)) = ωx_j − ωθz_i.
///  - quadratic:  J = ½aθ² + cθω − ½bω² + p_i θ + q_j ω with Σp = Σq = 0,
///                so the noise covariances are constant.
///  - logistic:   G_θ(z) = θ₁ + θ₂z, D_ω(x) = sigmoid(ω₁ + ω₂x),
///                J = log D(x_j) + log(1 − D(G(z_i))).
class ToyGanProblem {
 public:
  static ToyGanProblem bilinear();
  static ToyGanProblem linear(std::vector<double> z, std::vector<double> x);
  /// `p` has one offset per latent sample, `q` one per data sample; both
  /// are recentred to zero mean.
  static ToyGanProblem quadratic(double a, double b, double c, std::vector<double> p,
                                 std::vector<double> q);
  static ToyGanProblem logistic(std::vector<double> z, std::vector<double> x);

  ToyKind kind() const { return kind_; }
  int latent_count() const { return static_cast<int>(z_.size()); }
  int data_count() const { return static_cast<int>(x_.size()); }
  int pair_count() const { return latent_count() * data_count(); }
  int dim_theta() const { return dim_theta_; }
  int dim_omega() const { return dim_omega_; }
  const std::vector<double>& latent() const { return z_; }
  const std::vector<double>& data() const { return x_; }

  double pair_loss(int i, int j, const Vec& theta, const Vec& omega) const;
  PairGradient pair_gradient(int i, int j, const Vec& theta, const Vec& omega) const;
  PairJacobian pair_jacobian(int i, int j, const Vec& theta, const Vec& omega) const;

  /// Φ(θ, ω), the average of J over all pairs.
  double objective(const Vec& theta, const Vec& omega) const;

 private:
  ToyGanProblem(ToyKind kind, std::vector<double> z, std::vector<double> x, int dim_theta,
                int dim_omega);
  void check_pair(int i, int j) const;
  void check_state(const Vec& theta, const Vec& omega) const;

  ToyKind kind_;
  std::vector<double> z_;  // latent samples, or quadratic offsets p
  std::vector<double> x_;  // data samples, or quadratic offsets q
  int dim_theta_;
  int dim_omega_;
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
};

/// Builds a toy by name with its default dataset (see README).
ToyGanProblem make_toy(ToyKind kind);

}  // namespace mfgan::dyn
