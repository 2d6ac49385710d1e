#include "mfgan/dynamics/training.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mfgan/common/error.hpp"

namespace mfgan::dyn {

std::string_view update_mode_name(UpdateMode mode) { return mode == UpdateMode::kAlt ? "alt" : "sml"; }

UpdateMode parse_update_mode(std::string_view name) {
  if (name == "alt") return UpdateMode::kAlt;
  if (name == "sml") return UpdateMode::kSml;
  throw ConfigError("mode", "unknown update mode '" + std::string(name) + "' (alt or sml)");
}

StateVec stack(const Vec& theta, const Vec& omega) {
  StateVec s(theta.size() + omega.size());
  s << theta, omega;
  return s;
}

Gradients full_gradients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega) {
  Gradients g{Vec::Zero(problem.dim_theta()), Vec::Zero(problem.dim_omega())};
  for (int i = 0; i < problem.latent_count(); ++i) {
    for (int j = 0; j < problem.data_count(); ++j) {
      const PairGradient p = problem.pair_gradient(i, j, theta, omega);
      g.theta += p.theta;
      g.omega += p.omega;
    }
  }
  const double n = problem.pair_count();
  g.theta /= n;
  g.omega /= n;
  return g;
}

Gradients minibatch_gradients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                              const Batch& batch) {
  if (batch.empty()) throw ShapeError("minibatch is empty");
  Gradients g{Vec::Zero(problem.dim_theta()), Vec::Zero(problem.dim_omega())};
  for (const auto& [i, j] : batch) {
    const PairGradient p = problem.pair_gradient(i, j, theta, omega);
    g.theta += p.theta;
    g.omega += p.omega;
  }
  const double n = static_cast<double>(batch.size());
  g.theta /= n;
  g.omega /= n;
  return g;
}

void sample_batch(const ToyGanProblem& problem, int size, std::mt19937_64& rng, Batch& out) {
  if (size < 1) throw ConfigError("batch", "batch size must be >= 1");
  std::uniform_int_distribution<int> pick(0, problem.pair_count() - 1);
  out.resize(static_cast<std::size_t>(size));
  for (auto& pair : out) {
    const int k = pick(rng);
    pair = {k / problem.data_count(), k % problem.data_count()};
  }
}

Batch sample_batch(const ToyGanProblem& problem, int size, std::mt19937_64& rng) {
  Batch b;
  sample_batch(problem, size, rng, b);
  return b;
}

TrainState alt_step(const ToyGanProblem& problem, const TrainState& state, double eta, const Batch& batch,
                    const Batch& batch_bar) {
  TrainState next = state;
  next.omega = state.omega + eta * minibatch_gradients(problem, state.theta, state.omega, batch).omega;
  next.theta = state.theta - eta * minibatch_gradients(problem, state.theta, next.omega, batch_bar).theta;
  ++next.iteration;
  return next;
}

TrainState sml_step(const ToyGanProblem& problem, const TrainState& state, double eta, const Batch& batch) {
  const Gradients g = minibatch_gradients(problem, state.theta, state.omega, batch);
  TrainState next = state;
  next.omega = state.omega + eta * g.omega;
  next.theta = state.theta - eta * g.theta;
  ++next.iteration;
  return next;
}

Covariances gradient_covariances(const ToyGanProblem& problem, const Vec& theta, const Vec& omega) {
  const Gradients mean = full_gradients(problem, theta, omega);
  Covariances c{Mat::Zero(problem.dim_theta(), problem.dim_theta()),
                Mat::Zero(problem.dim_omega(), problem.dim_omega())};
  for (int i = 0; i < problem.latent_count(); ++i) {
    for (int j = 0; j < problem.data_count(); ++j) {
      const PairGradient p = problem.pair_gradient(i, j, theta, omega);
      const Vec dt = p.theta - mean.theta;
      const Vec dw = p.omega - mean.omega;
      c.theta += dt * dt.transpose();
      c.omega += dw * dw.transpose();
    }
  }
  const double n = problem.pair_count();
  c.theta /= n;
  c.omega /= n;
  return c;
}

PairJacobian full_jacobians(const ToyGanProblem& problem, const Vec& theta, const Vec& omega) {
  const int dt = problem.dim_theta();
  const int dw = problem.dim_omega();
  PairJacobian jac{Mat::Zero(dt, dt), Mat::Zero(dt, dw), Mat::Zero(dw, dt), Mat::Zero(dw, dw)};
  for (int i = 0; i < problem.latent_count(); ++i) {
    for (int j = 0; j < problem.data_count(); ++j) {
      const PairJacobian p = problem.pair_jacobian(i, j, theta, omega);
      jac.tt += p.tt;
      jac.to += p.to;
      jac.ot += p.ot;
      jac.oo += p.oo;
    }
  }
  const double n = problem.pair_count();
  jac.tt /= n;
  jac.to /= n;
  jac.ot /= n;
  jac.oo /= n;
  return jac;
}

Mat psd_sqrt(const Mat& a, bool* clipped) {
  if (a.rows() != a.cols()) throw ShapeError("psd_sqrt needs a square matrix");
  if (clipped) *clipped = false;
  if (a.rows() == 1) {
    Mat r(1, 1);
    if (a(0, 0) < 0.0 && clipped) *clipped = true;
    r(0, 0) = a(0, 0) > 0.0 ? std::sqrt(a(0, 0)) : 0.0;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  Vec lambda = eig.eigenvalues();
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < 0.0) {
      if (clipped) *clipped = true;
      lambda(k) = 0.0;
    }
    lambda(k) = std::sqrt(lambda(k));
  }
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

StateVec drift_b0(const Gradients& g) { return stack(-g.theta, g.omega); }

StateVec b1_matrix_form(const Gradients& g, const PairJacobian& jac) {
  const Vec top = jac.tt * (-g.theta) - jac.to * g.omega;
  const Vec bottom = -jac.ot * (-g.theta) - jac.oo * g.omega;
  return 0.5 * stack(top, bottom);
}

StateVec b1_correction_form(const Gradients& g, const PairJacobian& jac) {
  // ∇b₀ = [[−∇_θg_θ, −∇_ωg_θ], [∇_θg_ω, ∇_ωg_ω]].
  const Vec b0t = -g.theta;
  const Vec b0w = g.omega;
  const Vec grad_b0_top = -jac.tt * b0t - jac.to * b0w;
  const Vec grad_b0_bottom = jac.ot * b0t + jac.oo * b0w;
  const Vec interaction = jac.to * g.omega;
  return stack(-0.5 * grad_b0_top - interaction, -0.5 * grad_b0_bottom);
}

namespace {

// Mean and population covariance from one sweep over the pairs.
void gradient_moments(const ToyGanProblem& problem, const Vec& theta, const Vec& omega, Gradients& mean,
                      Covariances& cov) {
  thread_local std::vector<PairGradient> pairs;
  pairs.clear();
  const int dt = problem.dim_theta();
  const int dw = problem.dim_omega();
  mean.theta = Vec::Zero(dt);
  mean.omega = Vec::Zero(dw);
  for (int i = 0; i < problem.latent_count(); ++i) {
    for (int j = 0; j < problem.data_count(); ++j) {
      pairs.push_back(problem.pair_gradient(i, j, theta, omega));
      mean.theta += pairs.back().theta;
      mean.omega += pairs.back().omega;
    }
  }
  const double n = problem.pair_count();
  mean.theta /= n;
  mean.omega /= n;
  cov.theta = Mat::Zero(dt, dt);
  cov.omega = Mat::Zero(dw, dw);
  if (dt == 1 && dw == 1) {
    double vt = 0.0;
    double vw = 0.0;
    for (const auto& p : pairs) {
      const double a = p.theta(0) - mean.theta(0);
      const double b = p.omega(0) - mean.omega(0);
      vt += a * a;
      vw += b * b;
    }
    cov.theta(0, 0) = vt / n;
    cov.omega(0, 0) = vw / n;
    return;
  }
  for (const auto& p : pairs) {
    const Vec a = p.theta - mean.theta;
    const Vec b = p.omega - mean.omega;
    cov.theta.noalias() += a * a.transpose();
    cov.omega.noalias() += b * b.transpose();
  }
  cov.theta /= n;
  cov.omega /= n;
}

}  // namespace

SdeCoefficients sde_coefficients(const ToyGanProblem& problem, const Vec& theta, const Vec& omega,
                                 double eta, int batch, UpdateMode mode, double beta_override) {
  if (!(eta > 0.0)) throw ConfigError("eta", "learning rate must be > 0");
  if (batch < 1) throw ConfigError("batch", "batch size must be >= 1");
  Gradients g;
  Covariances cov;
  gradient_moments(problem, theta, omega, g, cov);
  SdeCoefficients c{mode, drift_b0(g), StateMat(), 0.0, false};
  if (mode == UpdateMode::kAlt) c.drift += eta * b1_matrix_form(g, full_jacobians(problem, theta, omega));
  c.beta = beta_override > 0.0 ? beta_override : 2.0 * batch / eta;
  bool clip_t = false;
  bool clip_w = false;
  const Mat st = psd_sqrt(cov.theta, &clip_t);
  const Mat sw = psd_sqrt(cov.omega, &clip_w);
  c.clipped = clip_t || clip_w;
  const int dt = problem.dim_theta();
  const int dw = problem.dim_omega();
  const double scale = std::sqrt(2.0 / c.beta);
  c.sigma = StateMat::Zero(dt + dw, dt + dw);
  c.sigma.topLeftCorner(dt, dt) = scale * st;
  c.sigma.bottomRightCorner(dw, dw) = scale * sw;
  return c;
}

SdeField toy_sde_field(const ToyGanProblem& problem, double eta, int batch, UpdateMode mode,
                       double beta_override) {
  return [problem, eta, batch, mode, beta_override](const StateVec& s, StateVec& drift, StateMat& sigma) {
    const int dt = problem.dim_theta();
    const SdeCoefficients c = sde_coefficients(problem, s.head(dt), s.tail(problem.dim_omega()), eta, batch,
                                               mode, beta_override);
    drift = c.drift;
    sigma = c.sigma;
  };
}

SdePath euler_maruyama(const SdeField& field, const StateVec& init, double dt, double horizon,
                       std::mt19937_64& rng, long record_every) {
  if (!(dt > 0.0)) throw ConfigError("dt", "time step must be > 0");
  if (!(horizon >= dt)) throw ConfigError("dt", "time step must not exceed the horizon");
  if (record_every < 1) throw ConfigError("record_every", "must be >= 1");
  const long steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  std::normal_distribution<double> normal;
  SdePath path;
  StateVec x = init;
  StateVec drift;
  StateMat sigma;
  StateVec xi(x.size());
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double h = k + 1 == steps ? horizon - t : dt;
    field(x, drift, sigma);
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
    x += drift * h + std::sqrt(h) * (sigma * xi);
    if (!x.allFinite()) throw NumericalError("SDE state became non-finite at step " + std::to_string(k));
    if ((k + 1) % record_every == 0 || k + 1 == steps) {
      path.times.push_back(k + 1 == steps ? horizon : (k + 1) * dt);
      path.states.push_back(x);
    }
  }
  return path;
}

}  // namespace mfgan::dyn
