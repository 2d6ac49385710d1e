#include "mfgan/cli/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mfgan/autodiff/checkpoint.hpp"
#include "mfgan/common/csv.hpp"
#include "mfgan/common/error.hpp"
#include "mfgan/dynamics/weak_error.hpp"
#include "mfgan/fdr/scheduler.hpp"
#include "mfgan/gan/gan_core.hpp"
#include "mfgan/mfg/trainer.hpp"

namespace mfgan::cli {

namespace fs = std::filesystem;

namespace {

dyn::Vec to_vec(const std::vector<double>& v) {
  if (v.size() > static_cast<std::size_t>(dyn::kMaxPlayerDim)) {
    throw ConfigError("init", "initial states have at most " + std::to_string(dyn::kMaxPlayerDim) + " entries");
  }
  dyn::Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

double flag(bool b) { return b ? 1.0 : 0.0; }

struct MfgTrainArgs {
  std::string mode = "ergodic";
  int dim = 1;
  long outer = 100000;
  int inner_theta = 1;
  int inner_omega = 1;
  int batch_d = 128;
  int batch_g = 128;
  double beta_d = 1.0;
  double beta_g = 1.0;
  double lambda_u = 1.0;
  double rate_d = 1e-3;
  double rate_g = 1e-3;
  std::string optimizer = "adam";
  std::vector<int> hidden = {50, 50, 50};
  std::string activation = "tanh";
  int eval_points = 0;
  int normalization_points = 0;
  long eval_every = 1;
  double horizon = 1.0;
  double sigma = 1.0;
  long checkpoint_every = 0;
};

struct SdeCompareArgs {
  std::string toy = "linear";
  std::vector<std::string> modes = {"alt", "sml"};
  std::vector<double> etas = {0.05, 0.02, 0.01};
  long replicas = 100000;
  double horizon = 1.0;
  std::string test_function = "theta";
  int batch = 32;
  int substeps = 50;
  std::vector<double> theta0;
  std::vector<double> omega0;
};

struct FdrProbeArgs {
  std::string toy = "quadratic";
  std::string mode = "sml";
  std::vector<double> etas = {0.01};
  int batch = 32;
  double beta = 0.0;
  double dt = 0.01;
  long steps = 200000;
  std::vector<double> theta0;
  std::vector<double> omega0;
};

struct ScheduleDemoArgs {
  std::string stream = "ramp";
  double eps = 0.05;
  double delta = 0.1;
  double eta0 = 0.1;
  long steps = 100;
  double ramp_start = 3.0;
  double ramp_end = 1.0;
  std::string toy = "quadratic";
  int batch = 32;
};

struct GanDemoArgs {
  std::vector<double> pr = {0.7, 0.3};
  std::vector<double> pg = {0.2, 0.8};
  std::vector<double> points;
};

int run_mfg_train(const MfgTrainArgs& a, std::uint64_t seed, const fs::path& dir, std::ostream& out) {
  mfg::SolverConfig c;
  c.mode = mfg::parse_mode(a.mode);
  c.dim = a.dim;
  c.outer_iterations = a.outer;
  c.inner_theta = a.inner_theta;
  c.inner_omega = a.inner_omega;
  c.batch_d = a.batch_d;
  c.batch_g = a.batch_g;
  c.beta_d = a.beta_d;
  c.beta_g = a.beta_g;
  c.lambda_u = a.lambda_u;
  c.rate_d = a.rate_d;
  c.rate_g = a.rate_g;
  c.optimizer = ad::parse_optimizer(a.optimizer);
  c.hidden = a.hidden;
  c.activation = ad::parse_activation(a.activation);
  c.seed = seed;
  c.eval_points = a.eval_points;
  c.normalization_points = a.normalization_points;
  c.eval_every = a.eval_every;
  c.horizon = a.horizon;
  c.checkpoint_every = a.checkpoint_every;
  c.checkpoint_dir = dir / "checkpoints";
  c.validate();

  MetricsWriter metrics(dir / "mfg_train.csv", {"outer_iter", "L_FP", "L_HJB", "penalty_u", "L_init", "L_term",
                                                "rel_l2_u", "rel_l2_m", "hbar"});
  const auto observe = [&](const mfg::MetricsRow& r) {
    metrics.append(static_cast<double>(r.outer_iter),
                   {r.l_fp, r.l_hjb, r.penalty_u, r.l_init, r.l_term, r.rel_l2_u, r.rel_l2_m, r.hbar});
  };
  mfg::TrainResult result = [&] {
    if (c.mode == mfg::MfgMode::kErgodic) {
      return mfg::train_mfgan(mfg::ErgodicMfgProblem::test_class(c.dim), c, observe);
    }
    mfg::TdMfgProblem problem = mfg::TdMfgProblem::test_class(c.dim, c.horizon);
    problem.sigma = a.sigma;
    problem.validate();
    return mfg::train_mfgan(problem, c, observe);
  }();
  ad::write_checkpoint(dir / "u_final.ckpt", {result.u_net.spec(), result.u_params});
  ad::write_checkpoint(dir / "n_final.ckpt", {result.n_net.spec(), result.n_params});

  out << "mfg-train: " << result.trace.size() << " outer iterations\n";
  if (!result.trace.empty() && c.mode == mfg::MfgMode::kErgodic) {
    const mfg::MetricsRow& last = result.trace.back();
    out << std::setprecision(6) << "  rel_l2_u = " << last.rel_l2_u << "\n  rel_l2_m = " << last.rel_l2_m
        << "\n  hbar = " << result.hbar << " (closed form " << mfg::ClosedFormSolution(c.dim).hbar() << ")\n";
  }
  return kSuccess;
}

int run_sde_compare(const SdeCompareArgs& a, std::uint64_t seed, const fs::path& dir, std::ostream& out) {
  const dyn::ToyGanProblem problem = dyn::make_toy(dyn::parse_toy(a.toy));
  MetricsWriter table(dir / "weak_error.csv",
                      {"mode", "row", "eta", "max_weak_error", "std_error", "slope", "slope_std_error",
                       "inconclusive", "argmax_time", "discrete_final", "sde_final"},
                      1);
  MetricsWriter raw(dir / "weak_error_raw.csv",
                    {"mode", "row", "eta", "time", "discrete_mean", "sde_mean", "abs_diff", "std_error"}, 1);
  long row_index = 0;
  long raw_index = 0;
  for (const std::string& mode_name : a.modes) {
    dyn::WeakErrorOptions o;
    o.mode = dyn::parse_update_mode(mode_name);
    o.test_function = dyn::parse_test_function(a.test_function);
    o.etas = a.etas;
    o.replicas = a.replicas;
    o.horizon = a.horizon;
    o.batch = a.batch;
    o.substeps = a.substeps;
    o.seed = seed;
    o.theta0 = to_vec(a.theta0);
    o.omega0 = to_vec(a.omega0);
    const dyn::WeakErrorTable t = dyn::weak_error_table(problem, o);
    out << "sde-compare " << mode_name << ": slope " << t.slope << " +/- " << t.slope_std_error
        << (t.inconclusive ? " (inconclusive)" : "") << "\n";
    for (const auto& row : t.rows) {
      out << "  eta " << row.eta << "  max weak error " << row.max_error << "  se " << row.std_error
          << (row.inconclusive ? "  inconclusive" : "") << "\n";
      table.append({mode_name}, static_cast<double>(row_index++),
                   {row.eta, row.max_error, row.std_error, t.slope, t.slope_std_error, flag(row.inconclusive),
                    row.argmax_time, row.discrete_final, row.sde_final});
      for (const auto& c : row.trace) {
        raw.append({mode_name}, static_cast<double>(raw_index++),
                   {row.eta, c.time, c.discrete_mean, c.sde_mean, std::abs(c.discrete_mean - c.sde_mean),
                    c.std_error});
      }
    }
  }
  return kSuccess;
}

int run_fdr_probe(const FdrProbeArgs& a, std::uint64_t seed, const fs::path& dir, std::ostream& out) {
  const dyn::ToyGanProblem problem = dyn::make_toy(dyn::parse_toy(a.toy));
  MetricsWriter table(dir / "fdr.csv",
                      {"relation", "row", "eta", "beta", "lhs", "lhs_se", "rhs_beta", "rhs_beta_se", "rhs_eta",
                       "rhs_eta_se", "gap", "gap_se", "ratio", "stationary", "samples"},
                      1);
  long row_index = 0;
  for (std::size_t e = 0; e < a.etas.size(); ++e) {
    fdr::StationaryOptions o;
    o.mode = dyn::parse_update_mode(a.mode);
    o.eta = a.etas[e];
    o.batch = a.batch;
    o.beta = a.beta;
    o.dt = a.dt;
    o.steps = a.steps;
    o.seed = seed + e;
    o.theta0 = to_vec(a.theta0);
    o.omega0 = to_vec(a.omega0);
    const fdr::Trajectory traj = fdr::simulate_stationary(problem, o);
    const fdr::Fdr1Result r1 = fdr::fdr1_gap(traj, problem);
    const fdr::Fdr2Result r2 = fdr::fdr2_gap(traj, problem);
    const double n = static_cast<double>(r1.samples);
    table.append({"fdr1"}, static_cast<double>(row_index++),
                 {o.eta, traj.beta, r1.lhs.mean, r1.lhs.std_error, r1.rhs_beta.mean, r1.rhs_beta.std_error,
                  r1.rhs_eta.mean, r1.rhs_eta.std_error, r1.gap.mean, r1.gap.std_error,
                  r1.lhs.mean / (r1.rhs_beta.mean + r1.rhs_eta.mean), flag(r1.stationary), n});
    table.append({"fdr2"}, static_cast<double>(row_index++),
                 {o.eta, traj.beta, r2.lhs.mean, r2.lhs.std_error, r2.rhs.mean, r2.rhs.std_error, 0.0, 0.0,
                  r2.gap.mean, r2.gap.std_error, r2.ratio, flag(r2.stationary), n});
    out << "fdr-probe eta " << o.eta << " beta " << traj.beta << (r2.stationary ? "" : " (drifting)") << "\n"
        << "  fdr1: lhs " << r1.lhs.mean << "  rhs " << r1.rhs_beta.mean << " + " << r1.rhs_eta.mean
        << "  gap " << r1.gap.mean << " +/- " << r1.gap.std_error << "\n"
        << "  fdr2: lhs " << r2.lhs.mean << "  rhs " << r2.rhs.mean << "  ratio " << r2.ratio << "\n";
  }
  return kSuccess;
}

int run_schedule_demo(const ScheduleDemoArgs& a, std::uint64_t seed, const fs::path& dir, std::ostream& out) {
  MetricsWriter table(dir / "schedule.csv", {"step", "ratio", "undefined", "triggered", "eta", "triggers"});
  std::vector<fdr::SchedulerLogEntry> log;
  if (a.stream == "ramp") {
    fdr::SchedulerState s = fdr::SchedulerState::make(a.eta0, a.eps, a.delta, a.batch);
    for (double r : fdr::ramp_stream(a.ramp_start, a.ramp_end, a.steps)) {
      fdr::SchedulerLogEntry e{};
      s = fdr::scheduler_step_ratio(s, r, &e);
      log.push_back(e);
    }
  } else if (a.stream == "sml") {
    fdr::ScheduledRunOptions o;
    o.eta0 = a.eta0;
    o.tolerance = a.eps;
    o.decay = a.delta;
    o.batch = a.batch;
    o.steps = a.steps;
    o.seed = seed;
    log = fdr::scheduled_sml_run(dyn::make_toy(dyn::parse_toy(a.toy)), o).log;
  } else {
    throw ConfigError("stream", "unknown stream '" + a.stream + "' (ramp or sml)");
  }
  long triggers = 0;
  for (const auto& e : log) {
    triggers += e.triggered ? 1 : 0;
    table.append(static_cast<double>(e.step),
                 {e.ratio, flag(e.undefined), flag(e.triggered), e.eta, static_cast<double>(triggers)});
    if (e.undefined) out << "step " << e.step << ": undefined ratio (zero noise estimate)\n";
  }
  out << "schedule-demo: " << log.size() << " steps, " << triggers << " triggers, final eta "
      << (log.empty() ? a.eta0 : log.back().eta) << "\n";
  return kSuccess;
}

int run_gan_demo(const GanDemoArgs& a, const fs::path& dir, std::ostream& out) {
  std::vector<double> points = a.points;
  if (points.empty()) {
    for (std::size_t i = 0; i < a.pr.size(); ++i) points.push_back(static_cast<double>(i));
  }
  if (points.size() != a.pr.size() || points.size() != a.pg.size()) {
    throw ConfigError("pr", "pr, pg and points must have the same length");
  }
  const gan::GridDensity pr(points, a.pr);
  const gan::GridDensity pg(points, a.pg);
  const gan::DiscriminatorTable d = gan::optimal_discriminator(pr, pg);
  const double value = gan::gan_value(d, pr, pg);
  const double js = gan::js_divergence(pr, pg);
  const double identity = -std::log(4.0) + 2.0 * js;

  MetricsWriter table(dir / "gan_demo.csv", {"point", "pr", "pg", "d_star"});
  out << std::setprecision(10) << "point  pr  pg  D*\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double s = d.score(points[i]);
    table.append(points[i], {a.pr[i], a.pg[i], s});
    out << points[i] << "  " << a.pr[i] << "  " << a.pg[i] << "  " << s << "\n";
  }
  MetricsWriter summary(dir / "gan_identity.csv", {"row", "value", "js", "minus_log4_plus_2js", "abs_diff"});
  summary.append(0.0, {value, js, identity, std::abs(value - identity)});
  out << "value at D*       " << value << "\n"
      << "JS                " << js << "\n"
      << "-log 4 + 2 JS     " << identity << "\n"
      << "|difference|      " << std::abs(value - identity) << "\n";
  return kSuccess;
}

}  // namespace

int run_experiment(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field game and GAN training dynamics laboratory", "mfgan"};
  app.set_config("--config", "", "INI file with [subcommand] sections of key = value lines");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", kVersion);
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--output-dir", output_dir, "Directory for metrics, manifest and checkpoints")
      ->envname("MFGAN_OUTPUT_DIR")
      ->capture_default_str();
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.require_subcommand(1, 1);
  app.fallthrough();

  MfgTrainArgs train;
  CLI::App* t = app.add_subcommand("mfg-train", "Adversarial MFG solver on the closed-form test class");
  t->add_option("--mode", train.mode, "ergodic or time-dependent")
      ->check(CLI::IsMember({"ergodic", "time-dependent"}))
      ->capture_default_str();
  t->add_option("--dim", train.dim, "Torus dimension")->capture_default_str();
  t->add_option("--outer", train.outer, "Outer iterations K")->capture_default_str();
  t->add_option("--inner-theta", train.inner_theta, "Generator steps per outer iteration")->capture_default_str();
  t->add_option("--inner-omega", train.inner_omega, "Discriminator steps per outer iteration")
      ->capture_default_str();
  t->add_option("--batch-d", train.batch_d)->capture_default_str();
  t->add_option("--batch-g", train.batch_g)->capture_default_str();
  t->add_option("--beta-d", train.beta_d, "Initial-condition weight (time-dependent)")->capture_default_str();
  t->add_option("--beta-g", train.beta_g, "Terminal-condition weight (time-dependent)")->capture_default_str();
  t->add_option("--lambda-u", train.lambda_u, "Weight of the zero-mean penalty on u (ergodic)")
      ->capture_default_str();
  t->add_option("--rate-d", train.rate_d)->capture_default_str();
  t->add_option("--rate-g", train.rate_g)->capture_default_str();
  t->add_option("--optimizer", train.optimizer, "adam or plain")->capture_default_str();
  t->add_option("--hidden", train.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
  t->add_option("--activation", train.activation, "tanh, sigmoid, sine or linear")->capture_default_str();
  t->add_option("--eval-points", train.eval_points, "0: 256-point grid (d = 1) or 10^4 random points")
      ->capture_default_str();
  t->add_option("--normalization-points", train.normalization_points,
                "0: the 1D evaluation grid or 4096 random points")
      ->capture_default_str();
  t->add_option("--eval-every", train.eval_every)->capture_default_str();
  t->add_option("--horizon", train.horizon, "Time horizon (time-dependent)")->capture_default_str();
  t->add_option("--sigma", train.sigma, "Volatility (time-dependent)")->capture_default_str();
  t->add_option("--checkpoint-every", train.checkpoint_every, "0 disables periodic checkpoints")
      ->capture_default_str();

  SdeCompareArgs sde;
  CLI::App* s = app.add_subcommand("sde-compare", "Weak error between discrete training and its SDE");
  s->add_option("--toy", sde.toy, "bilinear, linear, quadratic or logistic")->capture_default_str();
  s->add_option("--modes", sde.modes, "alt and/or sml")->delimiter(',')->capture_default_str();
  s->add_option("--etas", sde.etas)->delimiter(',')->capture_default_str();
  s->add_option("--replicas", sde.replicas)->capture_default_str();
  s->add_option("--horizon", sde.horizon)->capture_default_str();
  s->add_option("--test-function", sde.test_function, "theta, sum-squares or constant")->capture_default_str();
  s->add_option("--batch", sde.batch)->capture_default_str();
  s->add_option("--substeps", sde.substeps, "Euler-Maruyama steps per learning-rate step")
      ->capture_default_str();
  s->add_option("--theta0", sde.theta0)->delimiter(',');
  s->add_option("--omega0", sde.omega0)->delimiter(',');

  FdrProbeArgs probe;
  CLI::App* f = app.add_subcommand("fdr-probe", "Fluctuation-dissipation relations along a stationary run");
  f->add_option("--toy", probe.toy)->capture_default_str();
  f->add_option("--mode", probe.mode, "alt or sml")->capture_default_str();
  f->add_option("--etas", probe.etas)->delimiter(',')->capture_default_str();
  f->add_option("--batch", probe.batch)->capture_default_str();
  f->add_option("--beta", probe.beta, "Noise temperature; 0 means 2B/eta")->capture_default_str();
  f->add_option("--dt", probe.dt)->capture_default_str();
  f->add_option("--steps", probe.steps, "SDE steps; the first half is burn-in")->capture_default_str();
  f->add_option("--theta0", probe.theta0)->delimiter(',');
  f->add_option("--omega0", probe.omega0)->delimiter(',');

  ScheduleDemoArgs sched;
  CLI::App* c = app.add_subcommand("schedule-demo", "Learning-rate scheduler trace");
  c->add_option("--stream", sched.stream, "ramp (scripted ratios) or sml (toy training)")->capture_default_str();
  c->add_option("--eps", sched.eps)->capture_default_str();
  c->add_option("--delta", sched.delta)->capture_default_str();
  c->add_option("--eta0", sched.eta0)->capture_default_str();
  c->add_option("--steps", sched.steps)->capture_default_str();
  c->add_option("--ramp-start", sched.ramp_start)->capture_default_str();
  c->add_option("--ramp-end", sched.ramp_end)->capture_default_str();
  c->add_option("--toy", sched.toy)->capture_default_str();
  c->add_option("--batch", sched.batch)->capture_default_str();

  GanDemoArgs gan_args;
  CLI::App* g = app.add_subcommand("gan-demo", "Optimal discriminator and the JS identity on a grid");
  g->add_option("--pr", gan_args.pr, "Real masses")->delimiter(',')->capture_default_str();
  g->add_option("--pg", gan_args.pg, "Generated masses")->delimiter(',')->capture_default_str();
  g->add_option("--points", gan_args.points, "Support points (default 0, 1, ...)")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    const fs::path dir = output_dir;
    fs::create_directories(dir);
    {
      std::ofstream manifest(dir / "manifest.ini");
      manifest << "# mfgan " << kVersion << "\n";
      // unset list options print as key="" which would read back as one empty item
      std::istringstream config(app.config_to_str(true, false));
      for (std::string line; std::getline(config, line);) {
        if (!line.ends_with("=\"\"")) manifest << line << "\n";
      }
      if (!manifest) throw ConfigError("output-dir", "cannot write manifest in " + dir.string());
    }
    if (t->parsed()) return run_mfg_train(train, seed, dir, out);
    if (s->parsed()) return run_sde_compare(sde, seed, dir, out);
    if (f->parsed()) return run_fdr_probe(probe, seed, dir, out);
    if (c->parsed()) return run_schedule_demo(sched, seed, dir, out);
    return run_gan_demo(gan_args, dir, out);
  } catch (const mfg::NumericalAbort& e) {
    err << "numerical abort at outer iteration " << e.iteration() << ": " << e.what() << "\n";
    for (const auto& p : e.checkpoint_paths()) err << "  last finite parameters: " << p.string() << "\n";
    return kNumericalAbort;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace mfgan::cli
