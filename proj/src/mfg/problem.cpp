#include "mfgan/mfg/problem.hpp"

#include <numbers>

#include "mfgan/common/error.hpp"

namespace mfgan::mfg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double sum_sin(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += std::sin(kTwoPi * xi);
  return s;
}

// ∫_{[0,1)^d} g by the periodic trapezoid rule with `n` points per axis.
double torus_quadrature(int dim, int n, const std::function<double(std::span<const double>)>& g) {
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
  double total = 0.0;
  long count = 0;
  while (true) {
    for (int k = 0; k < dim; ++k) x[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] / static_cast<double>(n);
    total += g(x);
    ++count;
    int k = 0;
    while (k < dim && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == dim) break;
  }
  return total / static_cast<double>(count);
}

}  // namespace

double test_class_cost(std::span<const double> x) {
  double s = 0.0;
  double c2 = 0.0;
  for (double xi : x) {
    s += std::sin(kTwoPi * xi);
    const double c = std::cos(kTwoPi * xi);
    c2 += c * c;
  }
  return 2.0 * kPi * kPi * (-s + c2) - 2.0 * s;
}

ErgodicMfgProblem ErgodicMfgProblem::test_class(int dim) {
  ErgodicMfgProblem p;
  p.dim = dim;
  p.validate();
  return p;
}

double ErgodicMfgProblem::lagrangian(std::span<const double> x, std::span<const double> alpha) const {
  double half_sq = 0.0;
  for (double a : alpha) half_sq += 0.5 * a * a;
  return half_sq + spatial_cost(x);
}

void ErgodicMfgProblem::validate() const {
  if (dim < 1) throw ConfigError("dim", "dimension must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "diffusion coefficient must be > 0");
  if (!spatial_cost) throw ConfigError("spatial_cost", "missing spatial cost");
}

double hamiltonian(const ErgodicMfgProblem& problem, std::span<const double> x,
                   std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(problem.dim) || x.size() != p.size()) {
    throw ShapeError("hamiltonian expects x and p of dimension " + std::to_string(problem.dim));
  }
  double half_sq = 0.0;
  for (double pi : p) half_sq += 0.5 * pi * pi;
  return half_sq - problem.spatial_cost(x);
}

TdMfgProblem TdMfgProblem::test_class(int dim, double horizon) {
  TdMfgProblem p;
  p.dim = dim;
  p.horizon = horizon;
  const double z = ClosedFormSolution(dim).normalizer();
  p.initial_density = [z](std::span<const double> x) { return std::exp(2.0 * sum_sin(x)) / z; };
  p.validate();
  return p;
}

void TdMfgProblem::validate() const {
  if (dim < 1) throw ConfigError("dim", "dimension must be >= 1");
  if (!(horizon > 0.0)) throw ConfigError("horizon", "horizon must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "volatility must be > 0");
  if (!initial_density) throw ConfigError("initial_density", "missing initial density");
  const int n = dim <= 2 ? 256 : 32;
  const double mass = torus_quadrature(dim, n, initial_density);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw ConfigError("initial_density", "initial density integrates to " + std::to_string(mass));
  }
}

FieldJet<double> field_jet(const ad::InputJet& jet) {
  FieldJet<double> f{jet.value(0), {}, {}};
  for (Eigen::Index k = 0; k < jet.grad.cols(); ++k) {
    f.grad.push_back(jet.grad(0, k));
    f.diag2.push_back(jet.diag2(0, k));
  }
  return f;
}

FieldJet<ad::Var> field_jet(const ad::JetVar& jet) {
  return FieldJet<ad::Var>{jet.value[0], jet.grad[0], jet.diag2[0]};
}

ClosedFormSolution::ClosedFormSolution(int dim, int quadrature_points) : dim_(dim) {
  if (dim < 1) throw ConfigError("dim", "dimension must be >= 1");
  if (quadrature_points < 2) throw ConfigError("quadrature_points", "need at least 2 points");
  double z1 = 0.0;
  for (int i = 0; i < quadrature_points; ++i) {
    z1 += std::exp(2.0 * std::sin(kTwoPi * i / static_cast<double>(quadrature_points)));
  }
  z1 /= static_cast<double>(quadrature_points);
  z_ = std::pow(z1, dim);
  hbar_ = static_cast<double>(dim) * std::log(z1);
}

ClosedFormSolution::Values ClosedFormSolution::eval(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_)) throw ShapeError("oracle point has wrong dimension");
  Values v{sum_sin(x), 0.0, {}, hbar_};
  v.m = std::exp(2.0 * v.u) / z_;
  for (double xi : x) v.alpha.push_back(kTwoPi * std::cos(kTwoPi * xi));
  return v;
}

FieldJet<double> ClosedFormSolution::u_jet(std::span<const double> x) const {
  FieldJet<double> u{sum_sin(x), {}, {}};
  for (double xi : x) {
    u.grad.push_back(kTwoPi * std::cos(kTwoPi * xi));
    u.diag2.push_back(-kTwoPi * kTwoPi * std::sin(kTwoPi * xi));
  }
  return u;
}

FieldJet<double> ClosedFormSolution::m_jet(std::span<const double> x) const {
  const FieldJet<double> u = u_jet(x);
  // m = e^{2u}/Z: ∂m = 2m∂u, ∂²m = m(2∂²u + 4(∂u)²).
  FieldJet<double> m{std::exp(2.0 * u.value) / z_, {}, {}};
  for (std::size_t k = 0; k < u.grad.size(); ++k) {
    m.grad.push_back(2.0 * m.value * u.grad[k]);
    m.diag2.push_back(m.value * (2.0 * u.diag2[k] + 4.0 * u.grad[k] * u.grad[k]));
  }
  return m;
}

ResidualPair ergodic_residuals(const ErgodicMfgProblem& problem, std::span<const double> x,
                               const FieldJet<double>& u, const FieldJet<double>& m, double hbar) {
  if (!(m.value > 0.0)) {
    throw NumericalError("density is not positive at the residual point (m = " +
                         std::to_string(m.value) + ")");
  }
  return {ergodic_hjb_residual(problem, x, u, std::log(m.value), hbar),
          ergodic_fp_residual(problem, u, m)};
}

ResidualPair ergodic_residuals(const ErgodicMfgProblem& problem, const ad::Mlp& u_net,
                               const ad::ParamVector& u_params, const ad::Mlp& n_net,
                               const ad::ParamVector& n_params, double log_z, double hbar,
                               std::span<const double> x) {
  const FieldJet<double> u = field_jet(ad::mlp_jet(u_net, u_params, x));
  const FieldJet<double> n = field_jet(ad::mlp_jet(n_net, n_params, x));
  const FieldJet<double> m = exp_normalized(n, std::exp(log_z));
  if (!(m.value > 0.0)) throw NumericalError("density underflowed to zero at the residual point");
  return {ergodic_hjb_residual(problem, x, u, n.value - log_z, hbar),
          ergodic_fp_residual(problem, u, m)};
}

double relative_l2_error(std::span<const double> approx, std::span<const double> oracle) {
  if (approx.size() != oracle.size()) throw ShapeError("relative_l2_error: length mismatch");
  if (oracle.empty()) throw Error("relative_l2_error: empty grid");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    num += (approx[i] - oracle[i]) * (approx[i] - oracle[i]);
    den += oracle[i] * oracle[i];
  }
  if (den == 0.0) throw NumericalError("relative_l2_error: oracle has zero norm");
  return std::sqrt(num / den);
}

}  // namespace mfgan::mfg
