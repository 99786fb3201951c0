// markvi command-line tool.
//
// Subcommands:
//   generate     write a saddle instance file and print its constants
//   solve        one extragradient run on an instance file, trajectory CSV out
//   sweep        full (p, sigma) grid experiment from a config file
//   mixing-time  two-state mixing time query (matrix powering + closed form)
//   verify       self-checking property suite
//
// Exit codes: 0 success, 1 I/O, 2 bad parameters, 3 divergence / numerical
// failure / all cells failed, 4 verification failure.

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "markvi/errors.hpp"
#include "markvi/harness.hpp"
#include "markvi/markov_chain.hpp"
#include "markvi/metrics.hpp"
#include "markvi/oracle.hpp"
#include "markvi/problem.hpp"
#include "markvi/solver.hpp"
#include "markvi/textio.hpp"

namespace {

using namespace markvi;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitParams = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitVerifyFailed = 4;

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "constant") return NoiseKind::Constant;
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "truncated_gaussian") return NoiseKind::TruncatedGaussian;
  throw ParameterError("unknown noise kind: '" + s + "'");
}

DeviationMode parse_deviation(const std::string& s) {
  if (s == "absolute") return DeviationMode::Absolute;
  if (s == "relative") return DeviationMode::Relative;
  throw ParameterError("unknown deviation mode: '" + s + "'");
}

OracleMode parse_mode(const std::string& s) {
  if (s == "markov") return OracleMode::Markov;
  if (s == "iid") return OracleMode::Iid;
  throw ParameterError("unknown oracle mode: '" + s + "'");
}

std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  int d = 10;
  double lambda = 1.0;
  double nu = 1.0;
  std::uint64_t seed = 1;
  std::string out = "instance.txt";
};

int cmd_generate(const GenerateArgs& args) {
  const SaddleInstance inst = build_saddle_instance(args.d, args.lambda, args.nu, args.seed);
  const AffineVIOperator op = assemble_operator(inst);
  const Solution sol = exact_solution(op);
  save_instance(inst, args.out);
  std::cout << "L = " << format_double(op.L) << "\n"
            << "mu = " << format_double(op.mu) << "\n"
            << "|z*| = " << format_double(sol.z_star.norm()) << "\n"
            << "file = " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  double p = 0.5;
  double sigma = 0.0;
  std::string noise_kind = "gaussian";
  double mean_a = 0.1;
  double mean_b = -0.1;
  double noise_bound = 0.0;
  std::int64_t T = 10000;
  std::uint64_t seed = 1;
  double gamma = 0.0;  // 0: use the rule
  std::string gamma_rule = "half_inv_L";
  std::string mode = "markov";
  double epsilon_mix = 0.05;
  std::string deviation = "absolute";
  std::int64_t plateau_window = -1;
  std::string out = "trajectory.csv";
};

int cmd_solve(const SolveArgs& args) {
  const SaddleInstance inst = load_instance(args.instance);
  const AffineVIOperator op = assemble_operator(inst);
  const NoiseKind kind = parse_noise_kind(args.noise_kind);
  const MarkovNoiseChain chain =
      two_state_chain(args.p, noise_for_sigma(kind, args.mean_a, args.sigma, args.noise_bound),
                      noise_for_sigma(kind, args.mean_b, args.sigma, args.noise_bound));
  const MixingProfile mix = mixing_time(chain, args.epsilon_mix, parse_deviation(args.deviation));
  const OracleMode mode = parse_mode(args.mode);

  double gamma = args.gamma;
  if (gamma <= 0.0) {
    if (args.gamma_rule == "half_inv_L") {
      gamma = 1.0 / (2.0 * op.L);
    } else if (args.gamma_rule == "corollary1") {
      const Solution sol = exact_solution(op);
      const double r_tau = std::max(sol.z_star.squaredNorm(), 1e-12);
      const StochasticOracle probe(op, chain, mode, args.seed ^ 0xa76bdf3e29c401d5ULL);
      gamma = tune_step_size(op.L, op.mu, mix.tau_mix, args.T, r_tau,
                             sigma_star(probe, sol.z_star).value);
    } else {
      throw ParameterError("unknown gamma rule: '" + args.gamma_rule + "'");
    }
  }

  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.T = args.T;
  cfg.z0 = Eigen::VectorXd::Zero(op.dim);
  cfg.seed = args.seed;
  const RunTrace trace = run(op, chain, cfg, mode);

  TrajectoryTable table;
  for (std::size_t t = 0; t < trace.states.size(); ++t)
    table.rows.push_back(TrajectoryRow{0, static_cast<std::int64_t>(t), trace.sq_distances[t],
                                       trace.states[t]});
  atomic_write_file(args.out, trajectory_csv(table));

  const std::int64_t window =
      args.plateau_window >= 0 ? args.plateau_window : std::max<std::int64_t>(1, args.T / 4);
  const PlateauEstimate plat = plateau(trace, window);
  std::cout << "tau_mix = " << mix.tau_mix << "\n"
            << "gamma = " << format_double(gamma) << "\n"
            << "initial_sq_distance = " << format_double(trace.sq_distances.front()) << "\n"
            << "final_sq_distance = " << format_double(trace.sq_distances.back()) << "\n"
            << "plateau = " << format_double(plat.value) << " (window " << plat.window << ")\n"
            << "trajectory = " << args.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out_dir = "sweep_out";
  std::vector<std::string> overrides;
};

int cmd_sweep(const SweepArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config);
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ParameterError("override must look like key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate_config(cfg);

  const ExperimentReport report = run_sweep(cfg);

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  atomic_write_file(dir / "report.csv", report_csv(report));

  std::string meta = "# sweep metadata\n";
  meta += "config_hash = " + std::to_string(report.config_hash) + "\n";
  std::size_t all_failed = 0;
  const std::size_t n_sigma = cfg.sigma_grid.size();
  for (std::size_t idx = 0; idx < report.cells.size(); ++idx) {
    const CellResult& cell = report.cells[idx];
    const std::size_t i = idx / n_sigma;
    const std::size_t j = idx % n_sigma;
    const std::string traj_name =
        "traj_p" + std::to_string(i) + "_s" + std::to_string(j) + ".csv";
    meta += traj_name + ": p = " + format_double(cell.p) +
            ", sigma = " + format_double(cell.sigma) + ", tau_mix = " +
            std::to_string(cell.tau_mix) + ", gamma = " + format_double(cell.gamma_used) +
            (cell.failed ? ", failed" : "") + "\n";
    if (cfg.store_trajectories)
      atomic_write_file(dir / traj_name, trajectory_csv(cell_trajectories(cell)));
    if (cell.k_runs == 0) ++all_failed;
  }
  meta += "\n# config echo\n" + report.config_echo;
  atomic_write_file(dir / "sweep_meta.txt", meta);

  for (const CellResult& cell : report.cells) {
    std::cout << "p = " << format_double(cell.p) << "  sigma = " << format_double(cell.sigma)
              << "  tau_mix = " << cell.tau_mix
              << "  mean_variance = " << format_double(cell.mean_variance)
              << "  normalized = " << format_double(cell.normalized_variance)
              << (cell.failed ? "  [FAILED RUNS]" : "") << "\n";
  }
  std::cout << "report = " << (dir / "report.csv").string() << "\n";

  return all_failed == report.cells.size() ? kExitDivergence : kExitOk;
}

// ---------------------------------------------------------------------------
// mixing-time
// ---------------------------------------------------------------------------

struct MixArgs {
  double p = 0.0;
  double epsilon = 0.05;
  std::string deviation = "absolute";
};

int cmd_mixing_time(const MixArgs& args) {
  const DeviationMode mode = parse_deviation(args.deviation);
  const NoiseDistribution silent = NoiseDistribution::constant(0.0);
  const MarkovNoiseChain chain = two_state_chain(args.p, silent, silent);
  const MixingProfile powering = mixing_time(chain, args.epsilon, mode);
  const MixingProfile closed = two_state_mixing_time_closed_form(args.p, args.epsilon, mode);
  std::cout << "tau_mix = " << powering.tau_mix << "\n"
            << "deviation_at_tau = " << format_double(powering.max_deviation_at_tau) << "\n"
            << "closed_form = " << closed.tau_mix << "\n";
  if (powering.tau_mix != closed.tau_mix) {
    std::cerr << "warning: powering and closed form disagree\n";
    return kExitDivergence;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  bool quick = false;
  bool inject_sign_flip = false;
  std::uint64_t seed = 911;
};

struct PropertyOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

class PropertySuite {
public:
  void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    PropertyOutcome out;
    out.name = name;
    try {
      auto [ok, detail] = fn();
      out.pass = ok;
      out.detail = detail;
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    results_.push_back(std::move(out));
  }

  int report() const {
    bool all_pass = true;
    for (const PropertyOutcome& r : results_) {
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
      if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
      std::cout << "\n";
      all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "verify: all properties hold\n" : "verify: FAILURES detected\n");
    return all_pass ? kExitOk : kExitVerifyFailed;
  }

private:
  std::vector<PropertyOutcome> results_;
};

Eigen::MatrixXd sign_flipped_matrix(const SaddleInstance& inst) {
  // The "wrong" assembly with -nu in the lower-right block. Its symmetric
  // part is diag(lambda I, -nu I), so strong monotonicity must fail.
  const int d = inst.d;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d) = inst.lambda * Eigen::MatrixXd::Identity(d, d);
  m.topRightCorner(d, d) = inst.P;
  m.bottomLeftCorner(d, d) = -inst.P.transpose();
  m.bottomRightCorner(d, d) = -inst.nu * Eigen::MatrixXd::Identity(d, d);
  return m;
}

int cmd_verify(const VerifyArgs& args) {
  PropertySuite suite;
  const int pairs = args.quick ? 200 : 1000;
  const std::int64_t lemma_T = args.quick ? 200 : 500;

  const SaddleInstance inst = build_saddle_instance(10, 1.0, 0.5, args.seed);
  const AffineVIOperator op = assemble_operator(inst);
  const Solution sol = exact_solution(op);

  RngStream rng(seed_derivation(args.seed, {1}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 3.0 * gauss(rng);
    return v;
  };

  suite.check("operator-lipschitz-sampling", [&]() -> std::pair<bool, std::string> {
    for (int k = 0; k < pairs; ++k) {
      const Eigen::VectorXd z1 = random_vec(op.dim);
      const Eigen::VectorXd z2 = random_vec(op.dim);
      const double lhs = (evaluate(op, z1) - evaluate(op, z2)).norm();
      const double rhs = op.L * (z1 - z2).norm() + 1e-9;
      if (lhs > rhs)
        return {false, "violated at pair " + std::to_string(k)};
    }
    return {true, std::to_string(pairs) + " random pairs"};
  });

  suite.check("operator-monotonicity-sampling", [&]() -> std::pair<bool, std::string> {
    Eigen::MatrixXd m = args.inject_sign_flip ? sign_flipped_matrix(inst) : op.M;
    const double mu_est = smallest_symmetric_eigenvalue(m);
    if (!(mu_est > 0.0))
      return {false, "smallest symmetric eigenvalue = " + format_double(mu_est)};
    AffineVIOperator probe{op.dim, m, op.q, op.L, mu_est};
    for (int k = 0; k < pairs; ++k) {
      const Eigen::VectorXd z1 = random_vec(op.dim);
      const Eigen::VectorXd z2 = random_vec(op.dim);
      const double lhs = (evaluate(probe, z1) - evaluate(probe, z2)).dot(z1 - z2);
      const double rhs = mu_est * (z1 - z2).squaredNorm() - 1e-9;
      if (lhs < rhs)
        return {false, "violated at pair " + std::to_string(k)};
    }
    return {true, std::to_string(pairs) + " random pairs, mu = " + format_double(mu_est)};
  });

  suite.check("exact-solution-residual", [&]() -> std::pair<bool, std::string> {
    const std::vector<int> dims = args.quick ? std::vector<int>{1, 10} : std::vector<int>{1, 5, 10, 30};
    for (int d : dims) {
      const AffineVIOperator o =
          assemble_operator(build_saddle_instance(d, 0.7, 1.3, args.seed + d));
      const Solution s = exact_solution(o);
      const double tol = 1e-9 * (1.0 + o.q.norm());
      if ((o.M * s.z_star + o.q).norm() > tol)
        return {false, "residual contract failed at d = " + std::to_string(d)};
    }
    return {true, std::to_string(dims.size()) + " instances"};
  });

  suite.check("mixing-time-closed-form", [&]() -> std::pair<bool, std::string> {
    const NoiseDistribution silent = NoiseDistribution::constant(0.0);
    int checked = 0;
    for (int pi = 55; pi <= 95; pi += args.quick ? 10 : 5) {
      const double p = pi / 100.0;
      for (double eps : {0.1, 0.05, 0.01}) {
        const MarkovNoiseChain chain = two_state_chain(p, silent, silent);
        const std::int64_t powering = mixing_time(chain, eps).tau_mix;
        const std::int64_t closed = two_state_mixing_time_closed_form(p, eps).tau_mix;
        ++checked;
        if (powering != closed)
          return {false, "p = " + format_double(p) + ", eps = " + format_double(eps) + ": " +
                             std::to_string(powering) + " != " + std::to_string(closed)};
      }
    }
    return {true, std::to_string(checked) + " (p, eps) points"};
  });

  suite.check("stationary-distribution-residual", [&]() -> std::pair<bool, std::string> {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int n = 2; n <= (args.quick ? 3 : 5); ++n) {
      Eigen::MatrixXd t(n, n);
      for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += (t(i, j) = unit(rng));
        t.row(i) /= row;
      }
      const MarkovNoiseChain chain = make_markov_chain(
          t, std::vector<NoiseDistribution>(n, NoiseDistribution::constant(0.0)));
      const Eigen::VectorXd pi = stationary_distribution(chain);
      if ((pi.transpose() * t - pi.transpose()).cwiseAbs().sum() > 1e-12)
        return {false, "residual above 1e-12 at n = " + std::to_string(n)};
    }
    return {true, "dense random kernels"};
  });

  // Fresh seeded runs for the two descent inequalities.
  std::vector<RunTrace> lemma_traces;
  std::vector<std::int64_t> lemma_taus;
  const AffineVIOperator lemma_op =
      assemble_operator(build_saddle_instance(6, 1.0, 1.0, args.seed + 17));
  for (double p : {0.5, 0.95}) {
    for (double s : {0.0, 0.1}) {
      const MarkovNoiseChain chain = two_state_chain(
          p, noise_for_sigma(NoiseKind::Gaussian, 0.1, s, 0.0),
          noise_for_sigma(NoiseKind::Gaussian, -0.1, s, 0.0));
      SolverConfig sc;
      sc.gamma = 1.0 / (2.0 * lemma_op.L);
      sc.T = lemma_T;
      sc.z0 = Eigen::VectorXd::Zero(lemma_op.dim);
      sc.seed = seed_derivation(args.seed, {double_bits(p), double_bits(s)});
      sc.record_lemma_data = true;
      lemma_traces.push_back(run(lemma_op, chain, sc, OracleMode::Markov));
      lemma_taus.push_back(mixing_time(chain, 0.05).tau_mix);
    }
  }

  suite.check("lemma1-descent-inequality", [&]() -> std::pair<bool, std::string> {
    std::int64_t checked = 0;
    for (const RunTrace& trace : lemma_traces) {
      const LemmaReport r = check_lemma1(trace, lemma_op.L, lemma_op.mu);
      checked += r.checked;
      if (!r.clean()) return {false, to_text(r)};
    }
    return {true, std::to_string(checked) + " steps over " +
                      std::to_string(lemma_traces.size()) + " runs"};
  });

  suite.check("lemma2-step-back-inequality", [&]() -> std::pair<bool, std::string> {
    std::int64_t checked = 0;
    for (std::size_t i = 0; i < lemma_traces.size(); ++i) {
      const RunTrace& trace = lemma_traces[i];
      const LemmaReport r = check_lemma2(trace, lemma_op.L, trace.gamma, lemma_taus[i]);
      checked += r.checked;
      if (!r.clean()) return {false, to_text(r)};
    }
    return {true, std::to_string(checked) + " steps over " +
                      std::to_string(lemma_traces.size()) + " runs"};
  });

  suite.check("solver-determinism", [&]() -> std::pair<bool, std::string> {
    const MarkovNoiseChain chain =
        two_state_chain(0.8, NoiseDistribution::gaussian(0.1, 0.05),
                        NoiseDistribution::gaussian(-0.1, 0.05));
    SolverConfig sc;
    sc.gamma = 1.0 / (2.0 * op.L);
    sc.T = args.quick ? 200 : 1000;
    sc.z0 = Eigen::VectorXd::Zero(op.dim);
    sc.seed = args.seed + 3;
    const RunTrace a = run(op, chain, sc, OracleMode::Markov);
    const RunTrace b = run(op, chain, sc, OracleMode::Markov);
    if (a.sq_distances != b.sq_distances || a.states != b.states)
      return {false, "same seed produced different traces"};
    return {true, "identical traces for repeated seed"};
  });

  suite.check("noiseless-linear-rate", [&]() -> std::pair<bool, std::string> {
    const NoiseDistribution silent = NoiseDistribution::constant(0.0);
    const MarkovNoiseChain chain = two_state_chain(0.8, silent, silent);
    SolverConfig sc;
    sc.gamma = 1.0 / (2.0 * op.L);
    const double rate = 1.0 - op.mu * sc.gamma / 2.0;
    const auto predicted =
        static_cast<std::int64_t>(std::ceil(std::log(1e-12) / std::log(rate)));
    sc.T = predicted + predicted / 2 + 1;
    sc.z0 = Eigen::VectorXd::Zero(op.dim);
    sc.seed = args.seed;
    const RunTrace trace = run(op, chain, sc, OracleMode::Markov);
    const double target = 1e-12 * trace.sq_distances.front();
    for (std::int64_t t = 0; t <= sc.T; ++t) {
      if (trace.sq_distances[static_cast<std::size_t>(t)] <= target) {
        if (t <= predicted + predicted / 2)
          return {true, "hit 1e-12 decay at step " + std::to_string(t) + " (envelope " +
                            std::to_string(predicted) + ")"};
        return {false, "decay later than 1.5x the envelope"};
      }
    }
    return {false, "never reached 1e-12 of the initial distance"};
  });

  return suite.report();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extragradient solver for strongly monotone variational inequalities "
               "with Markov-chain noise"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "Generate a saddle instance file");
  c_gen->add_option("--d", gen.d, "Per-block dimension");
  c_gen->add_option("--lambda", gen.lambda, "x-block regularization");
  c_gen->add_option("--nu", gen.nu, "y-block regularization");
  c_gen->add_option("--seed", gen.seed, "Generation seed");
  c_gen->add_option("--out", gen.out, "Output instance file");

  SolveArgs solve;
  CLI::App* c_solve = app.add_subcommand("solve", "Run one configured solve");
  c_solve->add_option("--instance", solve.instance, "Instance file")->required();
  c_solve->add_option("--p", solve.p, "Two-state chain stay probability");
  c_solve->add_option("--sigma", solve.sigma, "Noise standard deviation (0 = noiseless)");
  c_solve->add_option("--noise-kind", solve.noise_kind, "constant|gaussian|truncated_gaussian");
  c_solve->add_option("--mean-a", solve.mean_a, "State A noise mean");
  c_solve->add_option("--mean-b", solve.mean_b, "State B noise mean");
  c_solve->add_option("--noise-bound", solve.noise_bound, "Truncation half-width");
  c_solve->add_option("--T", solve.T, "Iteration count");
  c_solve->add_option("--seed", solve.seed, "Run seed");
  c_solve->add_option("--gamma", solve.gamma, "Explicit step size (overrides --gamma-rule)");
  c_solve->add_option("--gamma-rule", solve.gamma_rule, "half_inv_L|corollary1");
  c_solve->add_option("--mode", solve.mode, "markov|iid");
  c_solve->add_option("--epsilon-mix", solve.epsilon_mix, "Mixing-time epsilon");
  c_solve->add_option("--deviation", solve.deviation, "absolute|relative");
  c_solve->add_option("--plateau-window", solve.plateau_window, "Tail window (default T/4)");
  c_solve->add_option("--out", solve.out, "Trajectory CSV path");

  SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand("sweep", "Run a (p, sigma) grid experiment");
  c_sweep->add_option("--config", sweep.config, "Experiment config file")->required();
  c_sweep->add_option("--out", sweep.out_dir, "Output directory");
  c_sweep->add_option("--set", sweep.overrides, "key=value override (repeatable)");

  MixArgs mix;
  CLI::App* c_mix = app.add_subcommand("mixing-time", "Two-state mixing time query");
  c_mix->add_option("--p", mix.p, "Stay probability")->required();
  c_mix->add_option("--epsilon", mix.epsilon, "Deviation threshold");
  c_mix->add_option("--deviation", mix.deviation, "absolute|relative");

  VerifyArgs verify;
  CLI::App* c_verify = app.add_subcommand("verify", "Run the invariant property suite");
  c_verify->add_flag("--quick", verify.quick, "Subsampled suite, runs in seconds");
  c_verify->add_flag("--inject-sign-flip", verify.inject_sign_flip,
                     "Flip the lower-right operator block sign (monotonicity must fail)");
  c_verify->add_option("--seed", verify.seed, "Suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParams;
  }

  try {
    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_solve->parsed()) return cmd_solve(solve);
    if (c_sweep->parsed()) return cmd_sweep(sweep);
    if (c_mix->parsed()) return cmd_mixing_time(mix);
    if (c_verify->parsed()) return cmd_verify(verify);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitParams;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const StaleSampleError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitParams;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitParams;
}
