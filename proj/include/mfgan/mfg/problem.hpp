#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "mfgan/autodiff/mlp.hpp"

namespace mfgan::mfg {

/// Spatial cost f̃ on the torus.
using SpatialCost = std::function<double(std::span<const double>)>;

/// f̃(x) = 2π²[−Σ sin 2πxᵢ + Σ cos² 2πxᵢ] − 2Σ sin 2πxᵢ, the cost whose
/// ergodic game is solved by u = Σ sin 2πxᵢ.
double test_class_cost(std::span<const double> x);

/// Ergodic MFG on the unit torus T^d with
///   L(x, α) = ½|α|² + f̃(x),   f(x, m) = ln m,   H₀(x, p) = ½|p|² − f̃(x).
///
/// Residual convention (the orientation under which the closed-form
/// solution is an exact zero; dX = α dt + dW gives ε = ½):
///   HJB:  ε Δu + H₀(x, ∇u) − ln m − H̄ = 0
///   FP:   div(m ∇ₚH₀(x, ∇u)) − ε Δm = 0,   ∇ₚH₀(x, p) = p
///   ∫u = 0,  m > 0,  ∫m = 1.
struct ErgodicMfgProblem {
  int dim = 1;
  double epsilon = 0.5;
  SpatialCost spatial_cost = test_class_cost;

  static ErgodicMfgProblem test_class(int dim);

  /// Running control cost L(x, α).
  double lagrangian(std::span<const double> x, std::span<const double> alpha) const;
  void validate() const;
};

/// H₀(x, p) = ½|p|² − f̃(x).
double hamiltonian(const ErgodicMfgProblem& problem, std::span<const double> x,
                   std::span<const double> p);

/// Finite-horizon version on [0, T] × T^d driven by dX = α dt + σ dW with
/// drift b = α* = ∇ₚH₀(x, ∇ₓu). The time coordinate is input 0 of both
/// networks; spatial coordinates follow.
struct TdMfgProblem {
  int dim = 1;
  double horizon = 1.0;
  double sigma = 1.0;
  SpatialCost spatial_cost = test_class_cost;
  std::function<double(std::span<const double>)> initial_density;
  std::function<double(std::span<const double>)> terminal_value = [](std::span<const double>) {
    return 0.0;
  };

  /// Test-class costs with m⁰ = the ergodic density e^{2u}/Z and u^T = 0.
  static TdMfgProblem test_class(int dim, double horizon);
  void validate() const;
};

/// Scalar field jet over input coordinates: value, ∂ₖ and ∂ₖ².
template <class T>
struct FieldJet {
  T value;
  std::vector<T> grad;
  std::vector<T> diag2;
};

/// Extracts output 0 of a network jet.
FieldJet<double> field_jet(const ad::InputJet& jet);
FieldJet<ad::Var> field_jet(const ad::JetVar& jet);

/// Jet of m = exp(n) / z given the jet of n; ∇m = m∇n, ∂²m = m(∂²n + (∂n)²).
template <class T>
FieldJet<T> exp_normalized(const FieldJet<T>& n, double z) {
  using std::exp;
  FieldJet<T> m{exp(n.value) / z, {}, {}};
  for (std::size_t k = 0; k < n.grad.size(); ++k) {
    m.grad.push_back(m.value * n.grad[k]);
    m.diag2.push_back(m.value * (n.diag2[k] + n.grad[k] * n.grad[k]));
  }
  return m;
}

/// HJB residual ε Δu + ½|∇u|² − f̃(x) − ln m − H̄, with jets over the
/// spatial coordinates [first, first + d).
template <class T, class H>
T ergodic_hjb_residual(const ErgodicMfgProblem& problem, std::span<const double> x,
                       const FieldJet<T>& u, const T& log_m, const H& hbar, std::size_t first = 0) {
  T lap = u.diag2[first];
  T half_grad_sq = 0.5 * (u.grad[first] * u.grad[first]);
  for (std::size_t k = first + 1; k < first + static_cast<std::size_t>(problem.dim); ++k) {
    lap = lap + u.diag2[k];
    half_grad_sq = half_grad_sq + 0.5 * (u.grad[k] * u.grad[k]);
  }
  return problem.epsilon * lap + half_grad_sq - problem.spatial_cost(x) - log_m - hbar;
}

/// FP residual div(m∇u) − εΔm = ∇m·∇u + mΔu − εΔm.
template <class T>
T ergodic_fp_residual(const ErgodicMfgProblem& problem, const FieldJet<T>& u, const FieldJet<T>& m,
                      std::size_t first = 0) {
  T transport = m.grad[first] * u.grad[first] + m.value * u.diag2[first];
  T lap_m = m.diag2[first];
  for (std::size_t k = first + 1; k < first + static_cast<std::size_t>(problem.dim); ++k) {
    transport = transport + m.grad[k] * u.grad[k] + m.value * u.diag2[k];
    lap_m = lap_m + m.diag2[k];
  }
  return transport - problem.epsilon * lap_m;
}

/// Time-dependent HJB residual ∂ₛu + (σ²/2)Δₓu + H₀(x, ∇ₓu) − ln m
/// (jets over (s, x), coordinate 0 = s).
template <class T>
T td_hjb_residual(const TdMfgProblem& problem, std::span<const double> x, const FieldJet<T>& u,
                  const T& log_m) {
  const double half_var = 0.5 * problem.sigma * problem.sigma;
  T lap = u.diag2[1];
  T half_grad_sq = 0.5 * (u.grad[1] * u.grad[1]);
  for (std::size_t k = 2; k <= static_cast<std::size_t>(problem.dim); ++k) {
    lap = lap + u.diag2[k];
    half_grad_sq = half_grad_sq + 0.5 * (u.grad[k] * u.grad[k]);
  }
  return u.grad[0] + half_var * lap + half_grad_sq - problem.spatial_cost(x) - log_m;
}

/// Time-dependent FP residual ∂ₛm + div(m b) − (σ²/2)Δₓm with b = ∇ₓu.
template <class T>
T td_fp_residual(const TdMfgProblem& problem, const FieldJet<T>& u, const FieldJet<T>& m) {
  const double half_var = 0.5 * problem.sigma * problem.sigma;
  T transport = m.grad[1] * u.grad[1] + m.value * u.diag2[1];
  T lap_m = m.diag2[1];
  for (std::size_t k = 2; k <= static_cast<std::size_t>(problem.dim); ++k) {
    transport = transport + m.grad[k] * u.grad[k] + m.value * u.diag2[k];
    lap_m = lap_m + m.diag2[k];
  }
  return m.grad[0] + transport - half_var * lap_m;
}

/// Closed-form ergodic solution of the test class:
///   u*(x) = Σ sin 2πxᵢ,  m*(x) = e^{2u*(x)}/Z,  α*(x) = ∇u*(x),  H̄* = ln Z.
/// Z factorizes as Z₁^d with Z₁ = ∫₀¹ e^{2 sin 2πt} dt, computed by the
/// periodic trapezoid rule.
class ClosedFormSolution {
 public:
  explicit ClosedFormSolution(int dim, int quadrature_points = 10000);

  struct Values {
    double u;
    double m;
    std::vector<double> alpha;
    double hbar;
  };

  int dim() const { return dim_; }
  double normalizer() const { return z_; }
  double hbar() const { return hbar_; }

  Values eval(std::span<const double> x) const;
  FieldJet<double> u_jet(std::span<const double> x) const;
  FieldJet<double> m_jet(std::span<const double> x) const;

 private:
  int dim_;
  double z_;
  double hbar_;
};

/// oracle_eval: closed-form (u*, m*, α*, H̄*) at x.
inline ClosedFormSolution::Values oracle_eval(const ClosedFormSolution& solution,
                                              std::span<const double> x) {
  return solution.eval(x);
}

struct ResidualPair {
  double hjb;
  double fp;
};

/// Residuals of the network pair at x, with the density parameterized as
/// m = exp(n(x) − log_z). Extra entries of `u_params` are ignored; `hbar`
/// is used as given.
ResidualPair ergodic_residuals(const ErgodicMfgProblem& problem, const ad::Mlp& u_net,
                               const ad::ParamVector& u_params, const ad::Mlp& n_net,
                               const ad::ParamVector& n_params, double log_z, double hbar,
                               std::span<const double> x);

/// Residuals from explicit jets of u and m (m must be positive).
ResidualPair ergodic_residuals(const ErgodicMfgProblem& problem, std::span<const double> x,
                               const FieldJet<double>& u, const FieldJet<double>& m, double hbar);

/// ‖approx − oracle‖₂ / ‖oracle‖₂; throws on a zero-norm oracle or a
/// length mismatch.
double relative_l2_error(std::span<const double> approx, std::span<const double> oracle);

}  // namespace mfgan::mfg
