#include "mfgan/mfg/trainer.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mfgan/autodiff/checkpoint.hpp"

namespace mfgan::mfg {

namespace {

using ad::Tape;
using ad::Var;
using ad::VarRange;
using Eigen::MatrixXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kUSeedSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNSeedSalt = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kEvalSeedSalt = 0x94d049bb133111ebULL;
constexpr std::uint64_t kNormSeedSalt = 0x2545f4914f6cdd1dULL;

std::span<const double> column_span(const MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

FieldJet<Var> constant_jet(Tape& tape, const ad::InputJet& jet) {
  FieldJet<Var> f{tape.constant(jet.value(0)), {}, {}};
  for (Eigen::Index k = 0; k < jet.grad.cols(); ++k) {
    f.grad.push_back(tape.constant(jet.grad(0, k)));
    f.diag2.push_back(tape.constant(jet.diag2(0, k)));
  }
  return f;
}

MatrixXd uniform_samples(std::mt19937_64& rng, int rows, int cols, double time_horizon = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd x(rows, cols);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = unit(rng);
    if (time_horizon > 0.0) x(0, j) *= time_horizon;
  }
  return x;
}

ad::ParamVector to_params(const std::vector<double>& g) { return ad::ParamVector(g); }

void check_finite_loss(double value, const char* name, long iteration) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(name) + " is not finite at outer iteration " +
                         std::to_string(iteration));
  }
}

std::vector<std::filesystem::path> dump_checkpoints(const SolverConfig& config, const ad::Mlp& u_net,
                                                    const ad::ParamVector& u_params,
                                                    const ad::Mlp& n_net,
                                                    const ad::ParamVector& n_params,
                                                    const std::string& tag) {
  if (config.checkpoint_dir.empty()) return {};
  std::filesystem::create_directories(config.checkpoint_dir);
  const auto u_path = config.checkpoint_dir / ("u_" + tag + ".ckpt");
  const auto n_path = config.checkpoint_dir / ("n_" + tag + ".ckpt");
  ad::write_checkpoint(u_path, {u_net.spec(), u_params});
  ad::write_checkpoint(n_path, {n_net.spec(), n_params});
  return {u_path, n_path};
}

// Shared outer loop: `step` runs one outer iteration and fills the loss
// columns of the row; `evaluate` fills the error columns.
template <class Step, class Evaluate>
void run_outer_loop(const SolverConfig& config, TrainResult& result, const MetricsObserver& observer,
                    Step&& step, Evaluate&& evaluate) {
  for (long k = 0; k < config.outer_iterations; ++k) {
    const ad::ParamVector u_last = result.u_params;
    const ad::ParamVector n_last = result.n_params;
    MetricsRow row{k, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    try {
      step(k, row);
      if (!result.u_params.all_finite() || !result.n_params.all_finite()) {
        throw NumericalError("parameters became non-finite at outer iteration " + std::to_string(k));
      }
      const bool last = k + 1 == config.outer_iterations;
      if ((k + 1) % config.eval_every == 0 || last) evaluate(row);
    } catch (const NumericalError& e) {
      auto paths = dump_checkpoints(config, result.u_net, u_last, result.n_net, n_last,
                                    "abort_" + std::to_string(k));
      throw NumericalAbort(k, std::move(paths), e.what());
    }
    result.trace.push_back(row);
    if (observer) observer(row);
    if (config.checkpoint_every > 0 && (k + 1) % config.checkpoint_every == 0) {
      dump_checkpoints(config, result.u_net, result.u_params, result.n_net, result.n_params,
                       std::to_string(k + 1));
    }
  }
}

int default_eval_points(const SolverConfig& config) {
  if (config.eval_points > 0) return config.eval_points;
  return config.dim == 1 ? 256 : 10000;
}

// ---- time-dependent loss pieces ----

Var mean_of(Tape& tape, const std::vector<Var>& terms) {
  Var sum = tape.constant(0.0);
  for (const Var& t : terms) sum += t;
  return sum / static_cast<double>(terms.size());
}

MatrixXd at_time(const MatrixXd& samples, double s) {
  MatrixXd out = samples;
  out.row(0).setConstant(s);
  return out;
}

struct TdSide {
  Var fp_or_hjb;
  Var boundary;
};

// Discriminator side: n parameters are the tape leaves.
TdSide td_discriminator(Tape& tape, const TdMfgProblem& problem, const ad::Mlp& u_net,
                        const ad::ParamVector& u_params, const ad::Mlp& n_net, VarRange n_vars,
                        const MatrixXd& samples) {
  const auto u_jets = ad::mlp_jet_batch(u_net, u_params, samples);
  const auto n_jets = ad::mlp_jet(tape, n_net, n_vars, samples);
  std::vector<Var> fp;
  fp.reserve(u_jets.size());
  for (std::size_t i = 0; i < u_jets.size(); ++i) {
    const FieldJet<Var> u = constant_jet(tape, u_jets[i]);
    const FieldJet<Var> m = exp_normalized(field_jet(n_jets[i]), 1.0);
    fp.push_back(square(td_fp_residual(problem, u, m)));
  }
  const MatrixXd initial = at_time(samples, 0.0);
  const auto n0 = ad::mlp_forward(tape, n_net, n_vars, initial);
  std::vector<Var> init;
  init.reserve(n0.size());
  for (std::size_t i = 0; i < n0.size(); ++i) {
    const auto x = column_span(initial, static_cast<Eigen::Index>(i)).subspan(1);
    init.push_back(square(exp(n0[i][0]) - problem.initial_density(x)));
  }
  return {mean_of(tape, fp), mean_of(tape, init)};
}

// Generator side: u parameters are the tape leaves.
TdSide td_generator(Tape& tape, const TdMfgProblem& problem, const ad::Mlp& u_net, VarRange u_vars,
                    const ad::Mlp& n_net, const ad::ParamVector& n_params, const MatrixXd& samples) {
  const MatrixXd n_values = ad::mlp_forward_batch(n_net, n_params, samples);
  const auto u_jets = ad::mlp_jet(tape, u_net, u_vars, samples);
  std::vector<Var> hjb;
  hjb.reserve(u_jets.size());
  for (std::size_t i = 0; i < u_jets.size(); ++i) {
    const auto x = column_span(samples, static_cast<Eigen::Index>(i)).subspan(1);
    const Var log_m = tape.constant(n_values(0, static_cast<Eigen::Index>(i)));
    hjb.push_back(square(td_hjb_residual(problem, x, field_jet(u_jets[i]), log_m)));
  }
  const MatrixXd terminal = at_time(samples, problem.horizon);
  const auto u_t = ad::mlp_forward(tape, u_net, u_vars, terminal);
  std::vector<Var> term;
  term.reserve(u_t.size());
  for (std::size_t i = 0; i < u_t.size(); ++i) {
    const auto x = column_span(terminal, static_cast<Eigen::Index>(i)).subspan(1);
    term.push_back(square(u_t[i][0] - problem.terminal_value(x)));
  }
  return {mean_of(tape, hjb), mean_of(tape, term)};
}

void check_td_samples(const TdMfgProblem& problem, const MatrixXd& samples, const char* name) {
  if (samples.cols() == 0) throw ShapeError(std::string(name) + " batch is empty");
  if (samples.rows() != problem.dim + 1) {
    throw ShapeError(std::string(name) + " samples must have " + std::to_string(problem.dim + 1) +
                     " rows (s, x)");
  }
}

}  // namespace

MfgMode parse_mode(std::string_view name) {
  if (name == "ergodic") return MfgMode::kErgodic;
  if (name == "time-dependent" || name == "td") return MfgMode::kTimeDependent;
  throw ConfigError("mode", "unknown mode '" + std::string(name) + "'");
}

std::string_view mode_name(MfgMode mode) {
  return mode == MfgMode::kErgodic ? "ergodic" : "time-dependent";
}

void SolverConfig::validate() const {
  if (dim < 1) throw ConfigError("dim", "must be >= 1");
  if (outer_iterations < 0) throw ConfigError("outer", "must be >= 0");
  if (inner_theta < 1) throw ConfigError("inner_theta", "must be >= 1");
  if (inner_omega < 1) throw ConfigError("inner_omega", "must be >= 1");
  if (batch_d < 1) throw ConfigError("batch_d", "must be >= 1");
  if (batch_g < 1) throw ConfigError("batch_g", "must be >= 1");
  if (!(beta_d > 0.0)) throw ConfigError("beta_d", "must be > 0");
  if (!(beta_g > 0.0)) throw ConfigError("beta_g", "must be > 0");
  if (!(lambda_u >= 0.0)) throw ConfigError("lambda_u", "must be >= 0");
  if (!(rate_d > 0.0)) throw ConfigError("rate_d", "must be > 0");
  if (!(rate_g > 0.0)) throw ConfigError("rate_g", "must be > 0");
  if (hidden.empty()) throw ConfigError("hidden", "need at least one hidden layer");
  for (int w : hidden)
    if (w < 1) throw ConfigError("hidden", "widths must be >= 1");
  if (!ad::is_smooth(activation)) throw ConfigError("activation", "jets need a smooth activation");
  if (eval_points < 0) throw ConfigError("eval_points", "must be >= 0");
  if (normalization_points < 0) throw ConfigError("normalization_points", "must be >= 0");
  if (eval_every < 1) throw ConfigError("eval_every", "must be >= 1");
  if (!(horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
}

NumericalAbort::NumericalAbort(long iteration, std::vector<std::filesystem::path> paths,
                               const std::string& what)
    : NumericalError(what), iteration_(iteration), paths_(std::move(paths)) {}

ad::NetworkSpec u_network_spec(const SolverConfig& config) {
  ad::NetworkSpec spec;
  const bool td = config.mode == MfgMode::kTimeDependent;
  spec.widths.push_back(config.dim + (td ? 1 : 0));
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  spec.widths.push_back(1);
  spec.activation = config.activation;
  spec.periodic.assign(static_cast<std::size_t>(spec.widths.front()), true);
  if (td) spec.periodic[0] = false;
  spec.extras = td ? 0 : 1;
  return spec;
}

ad::NetworkSpec n_network_spec(const SolverConfig& config) {
  ad::NetworkSpec spec = u_network_spec(config);
  spec.extras = 0;
  return spec;
}

MatrixXd evaluation_points(int dim, int count, std::uint64_t seed) {
  if (dim < 1 || count < 1) throw ShapeError("evaluation grid needs dim >= 1 and count >= 1");
  if (dim == 1) {
    MatrixXd x(1, count);
    for (int i = 0; i < count; ++i) x(0, i) = i / static_cast<double>(count);
    return x;
  }
  std::mt19937_64 rng(seed);
  return uniform_samples(rng, dim, count);
}

double log_normalizer(const ad::Mlp& n_net, const ad::ParamVector& n_params, const MatrixXd& points) {
  const Eigen::RowVectorXd n = ad::mlp_forward_batch(n_net, n_params, points).row(0);
  const double top = n.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("density network returned a non-finite value");
  return top + std::log((n.array() - top).exp().mean());
}

FieldErrors oracle_errors(const ClosedFormSolution& solution, const ad::Mlp& u_net,
                          const ad::ParamVector& u_params, const ad::Mlp& n_net,
                          const ad::ParamVector& n_params, double log_z, const MatrixXd& points) {
  const Eigen::RowVectorXd u = ad::mlp_forward_batch(u_net, u_params, points).row(0);
  const Eigen::RowVectorXd n = ad::mlp_forward_batch(n_net, n_params, points).row(0);
  std::vector<double> u_hat(static_cast<std::size_t>(points.cols()));
  std::vector<double> m_hat(u_hat.size());
  std::vector<double> u_star(u_hat.size());
  std::vector<double> m_star(u_hat.size());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const auto v = solution.eval(column_span(points, j));
    u_hat[idx] = u(j);
    m_hat[idx] = std::exp(n(j) - log_z);
    u_star[idx] = v.u;
    m_star[idx] = v.m;
  }
  return {relative_l2_error(u_hat, u_star), relative_l2_error(m_hat, m_star)};
}

TrainResult train_mfgan(const ErgodicMfgProblem& problem, const SolverConfig& config,
                        const MetricsObserver& observer) {
  problem.validate();
  config.validate();
  if (config.mode != MfgMode::kErgodic) throw ConfigError("mode", "ergodic problem needs ergodic mode");
  if (config.dim != problem.dim) throw ConfigError("dim", "config and problem dimensions differ");

  TrainResult result{ad::Mlp(u_network_spec(config)), ad::Mlp(n_network_spec(config)), {}, {}, 0.0, 0.0, {}};
  result.u_params = result.u_net.initialize(config.seed ^ kUSeedSalt);
  result.n_params = result.n_net.initialize(config.seed ^ kNSeedSalt);
  const std::size_t hbar_index = result.u_net.weight_count();

  const MatrixXd eval = evaluation_points(config.dim, default_eval_points(config), config.seed ^ kEvalSeedSalt);
  MatrixXd norm_points;
  if (config.normalization_points > 0) {
    norm_points = evaluation_points(config.dim, config.normalization_points, config.seed ^ kNormSeedSalt);
  } else if (config.dim == 1) {
    norm_points = eval;
  } else {
    norm_points = evaluation_points(config.dim, 4096, config.seed ^ kNormSeedSalt);
  }
  const ClosedFormSolution solution(config.dim);

  std::mt19937_64 rng(config.seed);
  ad::Optimizer opt_d(config.optimizer, ad::Direction::kDescent);
  ad::Optimizer opt_g(config.optimizer, ad::Direction::kDescent);
  result.log_z = log_normalizer(result.n_net, result.n_params, norm_points);
  result.hbar = result.u_params[hbar_index];

  auto step = [&](long k, MetricsRow& row) {
    const double log_z = log_normalizer(result.n_net, result.n_params, norm_points);
    const double z = std::exp(log_z);

    for (int s = 0; s < config.inner_omega; ++s) {
      const MatrixXd x = uniform_samples(rng, config.dim, config.batch_d);
      const auto u_jets = ad::mlp_jet_batch(result.u_net, result.u_params, x);
      const auto loss = [&](Tape& tape, VarRange w) {
        const auto n_jets = ad::mlp_jet(tape, result.n_net, w, x);
        std::vector<Var> terms;
        terms.reserve(n_jets.size());
        for (std::size_t i = 0; i < n_jets.size(); ++i) {
          const FieldJet<Var> u = constant_jet(tape, u_jets[i]);
          const FieldJet<Var> m = exp_normalized(field_jet(n_jets[i]), z);
          terms.push_back(square(ergodic_fp_residual(problem, u, m)));
        }
        return mean_of(tape, terms);
      };
      const auto vg = ad::value_and_gradient(loss, result.n_params.span());
      check_finite_loss(vg.value, "FP loss", k);
      row.l_fp = vg.value;
      opt_d.step(result.n_params, to_params(vg.gradient), config.rate_d);
    }

    for (int s = 0; s < config.inner_theta; ++s) {
      const MatrixXd x = uniform_samples(rng, config.dim, config.batch_g);
      const Eigen::RowVectorXd n = ad::mlp_forward_batch(result.n_net, result.n_params, x).row(0);
      double hjb_value = 0.0;
      double penalty_value = 0.0;
      const auto loss = [&](Tape& tape, VarRange theta) {
        const Var hbar = theta[hbar_index];
        const auto u_jets = ad::mlp_jet(tape, result.u_net, theta, x);
        std::vector<Var> terms;
        std::vector<Var> values;
        terms.reserve(u_jets.size());
        values.reserve(u_jets.size());
        for (std::size_t i = 0; i < u_jets.size(); ++i) {
          const FieldJet<Var> u = field_jet(u_jets[i]);
          const Var log_m = tape.constant(n(static_cast<Eigen::Index>(i)) - log_z);
          terms.push_back(square(ergodic_hjb_residual(problem, column_span(x, static_cast<Eigen::Index>(i)),
                                                      u, log_m, hbar)));
          values.push_back(u.value);
        }
        const Var hjb = mean_of(tape, terms);
        const Var penalty = config.lambda_u * square(mean_of(tape, values));
        hjb_value = hjb.value();
        penalty_value = penalty.value();
        return hjb + penalty;
      };
      const auto vg = ad::value_and_gradient(loss, result.u_params.span());
      check_finite_loss(vg.value, "HJB loss", k);
      row.l_hjb = hjb_value;
      row.penalty_u = penalty_value;
      opt_g.step(result.u_params, to_params(vg.gradient), config.rate_g);
    }
    result.hbar = result.u_params[hbar_index];
    row.hbar = result.hbar;
  };

  auto evaluate = [&](MetricsRow& row) {
    result.log_z = log_normalizer(result.n_net, result.n_params, norm_points);
    const FieldErrors err = oracle_errors(solution, result.u_net, result.u_params, result.n_net,
                                          result.n_params, result.log_z, eval);
    row.rel_l2_u = err.u;
    row.rel_l2_m = err.m;
  };

  run_outer_loop(config, result, observer, step, evaluate);
  result.log_z = log_normalizer(result.n_net, result.n_params, norm_points);
  return result;
}

TdLosses td_losses(const TdMfgProblem& problem, const ad::Mlp& u_net, const ad::ParamVector& u_params,
                   const ad::Mlp& n_net, const ad::ParamVector& n_params, const MatrixXd& samples_d,
                   const MatrixXd& samples_g, const SolverConfig& config) {
  check_td_samples(problem, samples_d, "discriminator");
  check_td_samples(problem, samples_g, "generator");
  Tape tape;
  const VarRange n_vars = tape.variables(n_params.span());
  const VarRange u_vars = tape.variables(u_params.span());
  const TdSide d = td_discriminator(tape, problem, u_net, u_params, n_net, n_vars, samples_d);
  const TdSide g = td_generator(tape, problem, u_net, u_vars, n_net, n_params, samples_g);
  TdLosses out{d.fp_or_hjb.value(), d.boundary.value(), g.fp_or_hjb.value(), g.boundary.value(), 0.0, 0.0};
  out.discriminator = out.fp + config.beta_d * out.init;
  out.generator = out.hjb + config.beta_g * out.term;
  return out;
}

TrainResult train_mfgan(const TdMfgProblem& problem, const SolverConfig& config,
                        const MetricsObserver& observer) {
  problem.validate();
  config.validate();
  if (config.mode != MfgMode::kTimeDependent) {
    throw ConfigError("mode", "time-dependent problem needs time-dependent mode");
  }
  if (config.dim != problem.dim) throw ConfigError("dim", "config and problem dimensions differ");

  TrainResult result{ad::Mlp(u_network_spec(config)), ad::Mlp(n_network_spec(config)), {}, {}, kNaN, 0.0, {}};
  result.u_params = result.u_net.initialize(config.seed ^ kUSeedSalt);
  result.n_params = result.n_net.initialize(config.seed ^ kNSeedSalt);

  std::mt19937_64 rng(config.seed);
  ad::Optimizer opt_d(config.optimizer, ad::Direction::kDescent);
  ad::Optimizer opt_g(config.optimizer, ad::Direction::kDescent);

  auto step = [&](long k, MetricsRow& row) {
    for (int s = 0; s < config.inner_omega; ++s) {
      const MatrixXd x = uniform_samples(rng, config.dim + 1, config.batch_d, problem.horizon);
      double fp = 0.0;
      double init = 0.0;
      const auto loss = [&](Tape& tape, VarRange w) {
        const TdSide side = td_discriminator(tape, problem, result.u_net, result.u_params, result.n_net, w, x);
        fp = side.fp_or_hjb.value();
        init = side.boundary.value();
        return side.fp_or_hjb + config.beta_d * side.boundary;
      };
      const auto vg = ad::value_and_gradient(loss, result.n_params.span());
      check_finite_loss(vg.value, "discriminator loss", k);
      row.l_fp = fp;
      row.l_init = init;
      opt_d.step(result.n_params, to_params(vg.gradient), config.rate_d);
    }
    for (int s = 0; s < config.inner_theta; ++s) {
      const MatrixXd x = uniform_samples(rng, config.dim + 1, config.batch_g, problem.horizon);
      double hjb = 0.0;
      double term = 0.0;
      const auto loss = [&](Tape& tape, VarRange theta) {
        const TdSide side = td_generator(tape, problem, result.u_net, theta, result.n_net, result.n_params, x);
        hjb = side.fp_or_hjb.value();
        term = side.boundary.value();
        return side.fp_or_hjb + config.beta_g * side.boundary;
      };
      const auto vg = ad::value_and_gradient(loss, result.u_params.span());
      check_finite_loss(vg.value, "generator loss", k);
      row.l_hjb = hjb;
      row.l_term = term;
      opt_g.step(result.u_params, to_params(vg.gradient), config.rate_g);
    }
  };

  run_outer_loop(config, result, observer, step, [](MetricsRow&) {});
  return result;
}

}  // namespace mfgan::mfg
