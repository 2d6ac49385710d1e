#include "mfgan/dynamics/toy_gan.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mfgan/common/error.hpp"

namespace mfgan::dyn {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log sigmoid(t), stable for large |t|.
double log_sigmoid(double t) { return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }

std::vector<double> centred(std::vector<double> v) {
  if (v.empty()) return v;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& e : v) e -= mean;
  return v;
}

Vec scalar(double v) {
  Vec out(1);
  out(0) = v;
  return out;
}

Mat scalar_mat(double v) {
  Mat out(1, 1);
  out(0, 0) = v;
  return out;
}

}  // namespace

std::string_view toy_name(ToyKind kind) {
  switch (kind) {
    case ToyKind::kBilinear: return "bilinear";
    case ToyKind::kLinear: return "linear";
    case ToyKind::kQuadratic: return "quadratic";
    case ToyKind::kLogistic: return "logistic";
  }
  return "?";
}

ToyKind parse_toy(std::string_view name) {
  if (name == "bilinear") return ToyKind::kBilinear;
  if (name == "linear") return ToyKind::kLinear;
  if (name == "quadratic") return ToyKind::kQuadratic;
  if (name == "logistic") return ToyKind::kLogistic;
  throw ConfigError("toy", "unknown toy problem '" + std::string(name) + "'");
}

ToyGanProblem::ToyGanProblem(ToyKind kind, std::vector<double> z, std::vector<double> x, int dim_theta,
                             int dim_omega)
    : kind_(kind), z_(std::move(z)), x_(std::move(x)), dim_theta_(dim_theta), dim_omega_(dim_omega) {
  if (z_.empty() || x_.empty()) throw ConfigError("samples", "toy problems need N, M >= 1");
}

ToyGanProblem ToyGanProblem::bilinear() { return ToyGanProblem(ToyKind::kBilinear, {0.0}, {0.0}, 1, 1); }

ToyGanProblem ToyGanProblem::linear(std::vector<double> z, std::vector<double> x) {
  return ToyGanProblem(ToyKind::kLinear, std::move(z), std::move(x), 1, 1);
}

ToyGanProblem ToyGanProblem::quadratic(double a, double b, double c, std::vector<double> p,
                                       std::vector<double> q) {
  ToyGanProblem t(ToyKind::kQuadratic, centred(std::move(p)), centred(std::move(q)), 1, 1);
  t.a_ = a;
  t.b_ = b;
  t.c_ = c;
  return t;
}

ToyGanProblem ToyGanProblem::logistic(std::vector<double> z, std::vector<double> x) {
  return ToyGanProblem(ToyKind::kLogistic, std::move(z), std::move(x), 2, 2);
}

void ToyGanProblem::check_pair(int i, int j) const {
  if (i < 0 || i >= latent_count() || j < 0 || j >= data_count()) {
    throw ShapeError("pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for N = " +
                     std::to_string(latent_count()) + ", M = " + std::to_string(data_count()));
  }
}

void ToyGanProblem::check_state(const Vec& theta, const Vec& omega) const {
  if (theta.size() != dim_theta_ || omega.size() != dim_omega_) {
    throw ShapeError("toy state must have dim_theta = " + std::to_string(dim_theta_) +
                     " and dim_omega = " + std::to_string(dim_omega_));
  }
}

double ToyGanProblem::pair_loss(int i, int j, const Vec& theta, const Vec& omega) const {
  check_pair(i, j);
  check_state(theta, omega);
  const double z = z_[static_cast<std::size_t>(i)];
  const double x = x_[static_cast<std::size_t>(j)];
  const double t = theta(0);
  const double w = omega(0);
  switch (kind_) {
    case ToyKind::kBilinear: return t * w;
    case ToyKind::kLinear: return w * x - w * t * z;
    case ToyKind::kQuadratic: return 0.5 * a_ * t * t + c_ * t * w - 0.5 * b_ * w * w + z * t + x * w;
    case ToyKind::kLogistic: {
      const double y = theta(0) + theta(1) * z;
      return log_sigmoid(omega(0) + omega(1) * x) + log_sigmoid(-(omega(0) + omega(1) * y));
    }
  }
  return 0.0;
}

PairGradient ToyGanProblem::pair_gradient(int i, int j, const Vec& theta, const Vec& omega) const {
  check_pair(i, j);
  check_state(theta, omega);
  const double z = z_[static_cast<std::size_t>(i)];
  const double x = x_[static_cast<std::size_t>(j)];
  switch (kind_) {
    case ToyKind::kBilinear: return {scalar(omega(0)), scalar(theta(0))};
    case ToyKind::kLinear: return {scalar(-omega(0) * z), scalar(x - theta(0) * z)};
    case ToyKind::kQuadratic:
      return {scalar(a_ * theta(0) + c_ * omega(0) + z), scalar(c_ * theta(0) - b_ * omega(0) + x)};
    case ToyKind::kLogistic: {
      const double y = theta(0) + theta(1) * z;
      const double sa = sigmoid(omega(0) + omega(1) * x);
      const double sc = sigmoid(omega(0) + omega(1) * y);
      PairGradient g{Vec(2), Vec(2)};
      g.theta << -sc * omega(1), -sc * omega(1) * z;
      g.omega << (1.0 - sa) - sc, (1.0 - sa) * x - sc * y;
      return g;
    }
  }
  return {};
}

PairJacobian ToyGanProblem::pair_jacobian(int i, int j, const Vec& theta, const Vec& omega) const {
  check_pair(i, j);
  check_state(theta, omega);
  const double z = z_[static_cast<std::size_t>(i)];
  const double x = x_[static_cast<std::size_t>(j)];
  switch (kind_) {
    case ToyKind::kBilinear: return {scalar_mat(0.0), scalar_mat(1.0), scalar_mat(1.0), scalar_mat(0.0)};
    case ToyKind::kLinear: return {scalar_mat(0.0), scalar_mat(-z), scalar_mat(-z), scalar_mat(0.0)};
    case ToyKind::kQuadratic: return {scalar_mat(a_), scalar_mat(c_), scalar_mat(c_), scalar_mat(-b_)};
    case ToyKind::kLogistic: {
      const double w2 = omega(1);
      const double y = theta(0) + theta(1) * z;
      const double sa = sigmoid(omega(0) + omega(1) * x);
      const double sc = sigmoid(omega(0) + omega(1) * y);
      const double da = sa * (1.0 - sa);
      const double dc = sc * (1.0 - sc);
      PairJacobian jac{Mat(2, 2), Mat(2, 2), Mat(2, 2), Mat(2, 2)};
      jac.tt << -dc * w2 * w2, -dc * w2 * w2 * z,
                -dc * w2 * w2 * z, -dc * w2 * w2 * z * z;
      const double k = -dc * y * w2 - sc;
      jac.to << -dc * w2, k,
                -dc * w2 * z, k * z;
      jac.ot << -dc * w2, -dc * w2 * z,
                k, k * z;
      jac.oo << -da - dc, -da * x - dc * y,
                -da * x - dc * y, -da * x * x - dc * y * y;
      return jac;
    }
  }
  return {};
}

double ToyGanProblem::objective(const Vec& theta, const Vec& omega) const {
  double sum = 0.0;
  for (int i = 0; i < latent_count(); ++i)
    for (int j = 0; j < data_count(); ++j) sum += pair_loss(i, j, theta, omega);
  return sum / static_cast<double>(pair_count());
}

ToyGanProblem make_toy(ToyKind kind) {
  switch (kind) {
    case ToyKind::kBilinear: return ToyGanProblem::bilinear();
    case ToyKind::kLinear: return ToyGanProblem::linear({0.5, 1.5}, {1.0, 3.0});
    case ToyKind::kQuadratic: return ToyGanProblem::quadratic(1.0, 1.0, 0.0, {-1.0, 1.0}, {-0.5, 0.5});
    case ToyKind::kLogistic: return ToyGanProblem::logistic({-1.0, 0.0, 1.0}, {0.5, 1.0, 1.5});
  }
  return ToyGanProblem::bilinear();
}

}  // namespace mfgan::dyn
