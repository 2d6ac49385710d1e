#include "mfgan/fdr/fdr.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mfgan/common/error.hpp"

namespace mfgan::fdr {

namespace {

constexpr int kBatches = 50;

Estimate difference(const std::vector<double>& a, const std::vector<double>& b,
                    const std::vector<double>& c) {
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k] - c[k];
  return batch_means(d);
}

void check_samples(const Trajectory& trajectory) {
  if (trajectory.theta.size() < kMinStationarySamples) {
    throw Error("trajectory has " + std::to_string(trajectory.theta.size()) +
                " post-burn-in samples; need at least " + std::to_string(kMinStationarySamples));
  }
  if (!(trajectory.beta > 0.0)) throw Error("trajectory has no noise temperature");
}

}  // namespace

CovEstimate cov_estimators(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                           const dyn::Batch& batch) {
  const int b = static_cast<int>(batch.size());
  if (b < 2) throw ConfigError("batch", "covariance estimators need B >= 2");
  const dyn::Gradients mean = dyn::minibatch_gradients(problem, theta, omega, batch);
  CovEstimate est{Mat::Zero(problem.dim_theta(), problem.dim_theta()),
                  Mat::Zero(problem.dim_omega(), problem.dim_omega()), b};
  for (const auto& [i, j] : batch) {
    const dyn::PairGradient g = problem.pair_gradient(i, j, theta, omega);
    const Vec dt = g.theta - mean.theta;
    const Vec dw = g.omega - mean.omega;
    est.theta += dt * dt.transpose();
    est.omega += dw * dw.transpose();
  }
  est.theta /= static_cast<double>(b - 1);
  est.omega /= static_cast<double>(b - 1);
  return est;
}

Trajectory simulate_stationary(const ToyGanProblem& problem, const StationaryOptions& options) {
  if (!(options.eta > 0.0)) throw ConfigError("eta", "must be > 0");
  if (!(options.dt > 0.0)) throw ConfigError("dt", "must be > 0");
  if (options.steps < 2) throw ConfigError("steps", "must be >= 2");
  if (options.beta < 0.0) throw ConfigError("beta", "must be >= 0");
  const int dt_dim = problem.dim_theta();
  const int dw_dim = problem.dim_omega();
  Vec theta = options.theta0.size() ? options.theta0 : Vec::Zero(dt_dim);
  Vec omega = options.omega0.size() ? options.omega0 : Vec::Zero(dw_dim);
  if (theta.size() != dt_dim || omega.size() != dw_dim) {
    throw ConfigError("init", "initial state has the wrong dimension");
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const double sqrt_dt = std::sqrt(options.dt);
  const long burn_in = options.steps / 2;
  Trajectory traj{options.mode, options.eta, 0.0, {}, {}};
  traj.theta.reserve(static_cast<std::size_t>(options.steps - burn_in));
  traj.omega.reserve(static_cast<std::size_t>(options.steps - burn_in));
  StateVec xi(dt_dim + dw_dim);
  for (long k = 0; k < options.steps; ++k) {
    const dyn::SdeCoefficients c =
        dyn::sde_coefficients(problem, theta, omega, options.eta, options.batch, options.mode, options.beta);
    traj.beta = c.beta;
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
    const StateVec inc = c.drift * options.dt + sqrt_dt * (c.sigma * xi);
    theta += inc.head(dt_dim);
    omega += inc.tail(dw_dim);
    if (!theta.allFinite() || !omega.allFinite()) {
      throw NumericalError("stationary run diverged at step " + std::to_string(k));
    }
    if (k >= burn_in) {
      traj.theta.push_back(theta);
      traj.omega.push_back(omega);
    }
  }
  return traj;
}

Estimate batch_means(const std::vector<double>& series) {
  if (series.size() < kMinStationarySamples) {
    throw Error("need at least " + std::to_string(kMinStationarySamples) + " samples, got " +
                std::to_string(series.size()));
  }
  const std::size_t per = series.size() / kBatches;
  double total = 0.0;
  for (double v : series) total += v;
  const double mean = total / static_cast<double>(series.size());
  std::vector<double> means(kBatches, 0.0);
  for (int b = 0; b < kBatches; ++b) {
    for (std::size_t k = 0; k < per; ++k) means[static_cast<std::size_t>(b)] += series[b * per + k];
    means[static_cast<std::size_t>(b)] /= static_cast<double>(per);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= kBatches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return {mean, std::sqrt(ss / (kBatches - 1) / kBatches)};
}

bool looks_stationary(const std::vector<double>& series) {
  const std::size_t half = series.size() / 2;
  const std::vector<double> first(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> second(series.begin() + static_cast<std::ptrdiff_t>(half), series.end());
  const Estimate a = batch_means(first);
  const Estimate b = batch_means(second);
  return std::abs(a.mean - b.mean) <= 2.0 * std::hypot(a.std_error, b.std_error);
}

Fdr1Result fdr1_gap(const Trajectory& trajectory, const ToyGanProblem& problem) {
  check_samples(trajectory);
  const std::size_t n = trajectory.theta.size();
  std::vector<double> lhs(n);
  std::vector<double> beta_term(n);
  std::vector<double> eta_term(n, 0.0);
  const double inv_beta = 1.0 / trajectory.beta;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& theta = trajectory.theta[k];
    const Vec& omega = trajectory.omega[k];
    const dyn::Gradients g = dyn::full_gradients(problem, theta, omega);
    const dyn::PairJacobian h = dyn::full_jacobians(problem, theta, omega);
    const dyn::Covariances cov = dyn::gradient_covariances(problem, theta, omega);
    lhs[k] = g.theta.squaredNorm() - g.omega.squaredNorm();
    beta_term[k] = inv_beta * ((cov.theta * h.tt).trace() + (cov.omega * h.oo).trace());
    if (trajectory.mode == UpdateMode::kAlt) {
      eta_term[k] = -0.5 * trajectory.eta *
                    (g.theta.dot(h.tt * g.theta) + g.omega.dot(h.oo * g.omega));
    }
  }
  Fdr1Result r;
  r.lhs = batch_means(lhs);
  r.rhs_beta = batch_means(beta_term);
  r.rhs_eta = batch_means(eta_term);
  r.gap = difference(lhs, beta_term, eta_term);
  r.stationary = looks_stationary(lhs);
  r.samples = n;
  return r;
}

Fdr2Result fdr2_gap(const Trajectory& trajectory, const ToyGanProblem& problem) {
  check_samples(trajectory);
  const std::size_t n = trajectory.theta.size();
  std::vector<double> lhs(n);
  std::vector<double> rhs(n);
  const std::vector<double> zero(n, 0.0);
  const double inv_beta = 1.0 / trajectory.beta;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& theta = trajectory.theta[k];
    const Vec& omega = trajectory.omega[k];
    const dyn::Gradients g = dyn::full_gradients(problem, theta, omega);
    const dyn::Covariances cov = dyn::gradient_covariances(problem, theta, omega);
    lhs[k] = theta.dot(g.theta) - omega.dot(g.omega);
    rhs[k] = inv_beta * (cov.theta.trace() + cov.omega.trace());
  }
  Fdr2Result r;
  r.lhs = batch_means(lhs);
  r.rhs = batch_means(rhs);
  r.gap = difference(lhs, rhs, zero);
  r.ratio = r.lhs.mean / r.rhs.mean;
  r.stationary = looks_stationary(lhs);
  r.samples = n;
  return r;
}

StateMat lyapunov_covariance(const StateMat& a, const StateMat& s) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || s.rows() != n) throw ShapeError("lyapunov_covariance: shape mismatch");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ad = a;
  Eigen::MatrixXd k(n * n, n * n);
  // vec(AP + PAᵀ) = (I ⊗ A + A ⊗ I) vec(P) in column-major order.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = id(i, j) * ad + ad(i, j) * id;
    }
  }
  const Eigen::MatrixXd q = s * s.transpose();
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  const Eigen::VectorXd p = k.fullPivLu().solve(rhs);
  StateMat out = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
  return 0.5 * (out + out.transpose());
}

}  // namespace mfgan::fdr
