#include "mfgan/dynamics/weak_error.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mfgan/common/error.hpp"

namespace mfgan::dyn {

namespace {

std::mt19937_64 replica_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(replica),
                    static_cast<std::uint32_t>(replica >> 32)};
  return std::mt19937_64(seq);
}

struct Moments {
  std::vector<double> sum;
  std::vector<double> sum_sq;

  explicit Moments(long n) : sum(static_cast<std::size_t>(n), 0.0), sum_sq(static_cast<std::size_t>(n), 0.0) {}
  void add(long k, double v) {
    sum[static_cast<std::size_t>(k)] += v;
    sum_sq[static_cast<std::size_t>(k)] += v * v;
  }
  double mean(long k, long r) const { return sum[static_cast<std::size_t>(k)] / static_cast<double>(r); }
  double variance_of_mean(long k, long r) const {
    const double m = mean(k, r);
    const double var = sum_sq[static_cast<std::size_t>(k)] / static_cast<double>(r) - m * m;
    return std::max(var, 0.0) * static_cast<double>(r) / static_cast<double>(r - 1) / static_cast<double>(r);
  }
};

void check_state_finite(const Vec& theta, const Vec& omega, long step, const char* what) {
  if (!theta.allFinite() || !omega.allFinite()) {
    throw NumericalError(std::string(what) + " state became non-finite at step " + std::to_string(step));
  }
}

}  // namespace

std::string_view test_function_name(TestFunction f) {
  switch (f) {
    case TestFunction::kTheta: return "theta";
    case TestFunction::kSumSquares: return "sum-squares";
    case TestFunction::kConstant: return "constant";
  }
  return "?";
}

TestFunction parse_test_function(std::string_view name) {
  if (name == "theta") return TestFunction::kTheta;
  if (name == "sum-squares") return TestFunction::kSumSquares;
  if (name == "constant") return TestFunction::kConstant;
  throw ConfigError("test_function", "unknown test function '" + std::string(name) + "'");
}

double evaluate_test_function(TestFunction f, const Vec& theta, const Vec& omega) {
  switch (f) {
    case TestFunction::kTheta: return theta(0);
    case TestFunction::kSumSquares: return theta.squaredNorm() + omega.squaredNorm();
    case TestFunction::kConstant: return 1.0;
  }
  return 0.0;
}

WeakErrorTable weak_error_table(const ToyGanProblem& problem, const WeakErrorOptions& options) {
  if (options.etas.empty()) throw ConfigError("etas", "need at least one learning rate");
  if (options.replicas < 2) throw ConfigError("replicas", "need at least 2 replicas");
  if (!(options.horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  if (options.substeps < 1) throw ConfigError("substeps", "must be >= 1");
  if (options.batch < 1) throw ConfigError("batch", "must be >= 1");
  const Vec theta0 = options.theta0.size() ? options.theta0 : Vec::Zero(problem.dim_theta());
  const Vec omega0 = options.omega0.size() ? options.omega0 : Vec::Zero(problem.dim_omega());
  if (theta0.size() != problem.dim_theta() || omega0.size() != problem.dim_omega()) {
    throw ConfigError("init", "initial state has the wrong dimension");
  }

  const int dt_dim = problem.dim_theta();
  const int dw_dim = problem.dim_omega();
  const long r_count = options.replicas;
  WeakErrorTable table{options.mode, {}, 0.0, 0.0, false};

  for (std::size_t e = 0; e < options.etas.size(); ++e) {
    const double eta = options.etas[e];
    if (!(eta > 0.0) || eta > options.horizon) throw ConfigError("etas", "need 0 < eta <= horizon");
    const long n_steps = static_cast<long>(std::floor(options.horizon / eta + 1e-9));
    const double h = eta / options.substeps;
    const double sqrt_h = std::sqrt(h);
    Moments discrete(n_steps);
    Moments sde(n_steps);
    const std::uint64_t stream = 4 * e + (options.mode == UpdateMode::kAlt ? 0 : 2);

    Batch batch;
    Batch batch_bar;
    for (long r = 0; r < r_count; ++r) {
      std::mt19937_64 rng = replica_rng(options.seed, stream, static_cast<std::uint64_t>(r));
      TrainState s{theta0, omega0, 0};
      for (long k = 0; k < n_steps; ++k) {
        sample_batch(problem, options.batch, rng, batch);
        if (options.mode == UpdateMode::kAlt) {
          sample_batch(problem, options.batch, rng, batch_bar);
          s = alt_step(problem, s, eta, batch, batch_bar);
        } else {
          s = sml_step(problem, s, eta, batch);
        }
        check_state_finite(s.theta, s.omega, k, "discrete");
        discrete.add(k, evaluate_test_function(options.test_function, s.theta, s.omega));
      }
    }

    std::normal_distribution<double> normal;
    StateVec xi(dt_dim + dw_dim);
    for (long r = 0; r < r_count; ++r) {
      std::mt19937_64 rng = replica_rng(options.seed, stream + 1, static_cast<std::uint64_t>(r));
      Vec theta = theta0;
      Vec omega = omega0;
      for (long k = 0; k < n_steps; ++k) {
        for (int sub = 0; sub < options.substeps; ++sub) {
          const SdeCoefficients c = sde_coefficients(problem, theta, omega, eta, options.batch, options.mode);
          for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
          const StateVec inc = c.drift * h + sqrt_h * (c.sigma * xi);
          theta += inc.head(dt_dim);
          omega += inc.tail(dw_dim);
        }
        check_state_finite(theta, omega, k, "SDE");
        sde.add(k, evaluate_test_function(options.test_function, theta, omega));
      }
    }

    WeakErrorRow row{eta, {}, 0.0, 0.0, 0.0, 0.0, 0.0, false};
    for (long k = 0; k < n_steps; ++k) {
      const WeakErrorCheckpoint c{(k + 1) * eta, discrete.mean(k, r_count), sde.mean(k, r_count),
                                  std::sqrt(discrete.variance_of_mean(k, r_count) +
                                            sde.variance_of_mean(k, r_count))};
      row.trace.push_back(c);
      const double diff = std::abs(c.discrete_mean - c.sde_mean);
      if (k == 0 || diff > row.max_error) {
        row.max_error = diff;
        row.std_error = c.std_error;
        row.argmax_time = c.time;
      }
    }
    row.discrete_final = discrete.mean(n_steps - 1, r_count);
    row.sde_final = sde.mean(n_steps - 1, r_count);
    row.inconclusive = row.max_error < 3.0 * row.std_error;
    table.inconclusive = table.inconclusive || row.inconclusive;
    table.rows.push_back(row);
  }

  // Log-log least squares; Var(log err) ≈ (se / err)².
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool defined = table.rows.size() >= 2;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& row : table.rows) {
    if (!(row.max_error > 0.0)) defined = false;
    mx += std::log(row.eta);
    my += std::log(row.max_error);
  }
  if (!defined) {
    table.slope = nan;
    table.slope_std_error = nan;
    table.inconclusive = true;
    return table;
  }
  const double n = static_cast<double>(table.rows.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& row : table.rows) {
    const double dx = std::log(row.eta) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(row.max_error) - my);
  }
  if (sxx == 0.0) {
    table.slope = nan;
    table.slope_std_error = nan;
    table.inconclusive = true;
    return table;
  }
  table.slope = sxy / sxx;
  double var = 0.0;
  for (const auto& row : table.rows) {
    const double w = (std::log(row.eta) - mx) / sxx;
    const double rel = row.std_error / row.max_error;
    var += w * w * rel * rel;
  }
  table.slope_std_error = std::sqrt(var);
  return table;
}

}  // namespace mfgan::dyn
