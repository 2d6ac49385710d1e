#include <cmath>

#include "mfgan/common/error.hpp"
#include "mfgan/fdr/fdr.hpp"
#include "test_util.hpp"

namespace mfgan::fdr {
namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) out(k++) = e;
  return out;
}

TEST(CovEstimators, SmallCases) {
  const auto p = dyn::ToyGanProblem::linear({1.0, 3.0}, {2.0, 5.0});
  const Vec t = vec({0.2});
  const Vec w = vec({0.9});
  const CovEstimate same = cov_estimators(p, t, w, {{1, 0}, {1, 0}, {1, 0}});
  EXPECT_NEAR(same.theta(0, 0), 0.0, 1e-28);  // batch mean carries rounding
  EXPECT_NEAR(same.omega(0, 0), 0.0, 1e-28);
  EXPECT_EQ(same.batch_size, 3);
  const double a = p.pair_gradient(0, 0, t, w).theta(0);
  const double b = p.pair_gradient(1, 1, t, w).theta(0);
  EXPECT_NEAR(cov_estimators(p, t, w, {{0, 0}, {1, 1}}).theta(0, 0), (a - b) * (a - b) / 2, 1e-15);
  EXPECT_THROW(cov_estimators(p, t, w, {{0, 0}}), ConfigError);
}

TEST(CovEstimators, ExhaustiveAverageIsUnbiased) {
  const std::vector<dyn::ToyGanProblem> problems = {
      dyn::ToyGanProblem::linear({1.0, -1.0, 0.5}, {2.0}), dyn::ToyGanProblem::linear({1.0, -1.0, 0.5}, {2.0, 0.0}),
      dyn::ToyGanProblem::logistic({-1.0, 1.0}, {0.5, 1.0, 1.5})};
  for (const auto& p : problems) {
    const Vec t = Vec::Constant(p.dim_theta(), 0.4);
    const Vec w = Vec::Constant(p.dim_omega(), -0.7);
    dyn::Batch pairs;
    for (int i = 0; i < p.latent_count(); ++i)
      for (int j = 0; j < p.data_count(); ++j) pairs.emplace_back(i, j);
    Mat st = Mat::Zero(p.dim_theta(), p.dim_theta());
    Mat sw = Mat::Zero(p.dim_omega(), p.dim_omega());
    for (const auto& x : pairs) {
      for (const auto& y : pairs) {
        const CovEstimate c = cov_estimators(p, t, w, {x, y});
        st += c.theta;
        sw += c.omega;
        EXPECT_LE((c.theta - c.theta.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
    const double n = static_cast<double>(pairs.size() * pairs.size());
    const dyn::Covariances pop = dyn::gradient_covariances(p, t, w);
    EXPECT_LE((st / n - pop.theta).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((sw / n - pop.omega).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Lyapunov, OrnsteinUhlenbeck) {
  StateMat a(1, 1);
  a << -2.0;
  StateMat s(1, 1);
  s << 0.6;
  EXPECT_NEAR(lyapunov_covariance(a, s)(0, 0), 0.36 / 4.0, 1e-15);
}

TEST(Lyapunov, SolvesTheEquation) {
  StateMat a(3, 3);
  a << -1.0, 0.5, 0.0, -0.5, -1.0, 0.2, 0.1, 0.0, -0.7;
  StateMat s(3, 3);
  s << 0.3, 0.0, 0.0, 0.1, 0.2, 0.0, 0.0, 0.05, 0.4;
  const StateMat p = lyapunov_covariance(a, s);
  EXPECT_LE((a * p + p * a.transpose() + s * s.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(lyapunov_covariance(StateMat(2, 2), StateMat(3, 3)), ShapeError);
}

TEST(BatchMeans, ConstantAndIid) {
  EXPECT_THROW(batch_means(std::vector<double>(999, 1.0)), Error);
  const Estimate c = batch_means(std::vector<double>(5000, 2.5));
  EXPECT_EQ(c.mean, 2.5);
  EXPECT_EQ(c.std_error, 0.0);
  EXPECT_TRUE(looks_stationary(std::vector<double>(5000, 2.5)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> x(100000);
  for (auto& v : x) v = n(rng);
  const Estimate e = batch_means(x);
  EXPECT_NEAR(e.std_error, 1.0 / std::sqrt(1e5), 0.3 / std::sqrt(1e5));
  EXPECT_LE(std::abs(e.mean), 4 * e.std_error);
  std::vector<double> drift(100000);
  for (std::size_t k = 0; k < drift.size(); ++k) drift[k] = n(rng) + 1e-4 * static_cast<double>(k);
  EXPECT_FALSE(looks_stationary(drift));
}

TEST(Fdr, DeterministicFixedPoint) {
  const auto p = dyn::ToyGanProblem::quadratic(1.0, 1.0, 0.0, {0.0}, {0.0});
  StationaryOptions o;
  o.steps = 4000;
  const Trajectory traj = simulate_stationary(p, o);
  EXPECT_EQ(traj.theta.size(), 2000u);
  const Fdr1Result r1 = fdr1_gap(traj, p);
  const Fdr2Result r2 = fdr2_gap(traj, p);
  EXPECT_EQ(r1.lhs.mean, 0.0);
  EXPECT_EQ(r1.rhs_beta.mean, 0.0);
  EXPECT_EQ(r2.lhs.mean, 0.0);
  EXPECT_EQ(r2.rhs.mean, 0.0);
  EXPECT_TRUE(r2.stationary);
}

TEST(Fdr, RejectsShortTrajectories) {
  const auto p = dyn::make_toy(dyn::ToyKind::kQuadratic);
  StationaryOptions o;
  o.steps = 1000;
  const Trajectory traj = simulate_stationary(p, o);
  EXPECT_THROW(fdr1_gap(traj, p), Error);
  EXPECT_THROW(fdr2_gap(traj, p), Error);
  o.eta = 0.0;
  EXPECT_THROW(simulate_stationary(p, o), ConfigError);
}

// SML on Φ = ½θ² − ½ω² is a pair of independent OU processes; the
// stationary covariance is the Lyapunov solution.
TEST(Fdr, QuadraticToyMatchesOrnsteinUhlenbeckMoments) {
  const auto p = dyn::make_toy(dyn::ToyKind::kQuadratic);
  StationaryOptions o;
  o.eta = 0.01;
  o.dt = 0.01;
  o.steps = 400000;
  o.seed = 11;
  const Trajectory traj = simulate_stationary(p, o);
  const double beta = 2.0 * 32 / 0.01;
  EXPECT_EQ(traj.beta, beta);
  const dyn::Covariances cov = dyn::gradient_covariances(p, vec({0.0}), vec({0.0}));
  EXPECT_NEAR(cov.theta(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(cov.omega(0, 0), 0.25, 1e-15);
  StateMat a = StateMat::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -1.0;
  StateMat s = StateMat::Zero(2, 2);
  s(0, 0) = std::sqrt(2.0 / beta);
  s(1, 1) = std::sqrt(2.0 / beta) * 0.5;
  const StateMat pst = lyapunov_covariance(a, s);
  const double lhs1 = pst(0, 0) - pst(1, 1);  // E[θ²] − E[ω²]
  const double lhs2 = pst(0, 0) + pst(1, 1);

  const Fdr1Result r1 = fdr1_gap(traj, p);
  const Fdr2Result r2 = fdr2_gap(traj, p);
  EXPECT_NEAR(r1.rhs_beta.mean, 0.75 / beta, 1e-15);
  EXPECT_NEAR(r1.rhs_beta.mean, lhs1, 1e-15);
  EXPECT_NEAR(r2.rhs.mean, lhs2, 1e-15);
  EXPECT_EQ(r1.rhs_eta.mean, 0.0);
  EXPECT_LE(std::abs(r1.lhs.mean - lhs1), 4 * r1.lhs.std_error + 0.02 * lhs1);
  EXPECT_LE(std::abs(r2.lhs.mean - lhs2), 4 * r2.lhs.std_error + 0.02 * lhs2);
  EXPECT_LE(std::abs(r1.gap.mean), 4 * r1.gap.std_error + 0.02 * lhs1);
  EXPECT_NEAR(r2.ratio, 1.0, 0.2);
  EXPECT_EQ(r1.samples, 200000u);
}

TEST(Fdr, AltEtaTermIsLinearInEta) {
  const auto p = dyn::make_toy(dyn::ToyKind::kQuadratic);
  std::vector<double> terms;
  for (double eta : {0.04, 0.02}) {
    StationaryOptions o;
    o.mode = UpdateMode::kAlt;
    o.eta = eta;
    o.beta = 20.0;
    o.steps = 200000;
    o.seed = 5;
    terms.push_back(fdr1_gap(simulate_stationary(p, o), p).rhs_eta.mean);
  }
  EXPECT_LT(terms[0], 0.0);
  EXPECT_NEAR(terms[0] / terms[1], 2.0, 0.6);
}

}  // namespace
}  // namespace mfgan::fdr
