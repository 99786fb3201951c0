#include "markvi/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "markvi/errors.hpp"
#include "markvi/textio.hpp"

namespace markvi {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
// Reserved repeat-index slots; real repeat indices are < K and never reach
// this range.
constexpr std::uint64_t kSigmaStarTag = 0xfffffffffffffff1ULL;
constexpr std::uint64_t kInstanceTag = 0xfffffffffffffff2ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t canonical_bits(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into +0
  return std::bit_cast<std::uint64_t>(v);
}

std::uint64_t fnv1a_64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  const double sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  return sd / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

std::uint64_t seed_derivation(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (kGolden * (static_cast<std::uint64_t>(parts.size()) + 1)));
  for (std::uint64_t v : parts) h = splitmix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
  return h;
}

std::uint64_t seed_derivation(std::uint64_t master, const std::vector<std::uint64_t>& parts) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (kGolden * (static_cast<std::uint64_t>(parts.size()) + 1)));
  for (std::uint64_t v : parts) h = splitmix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
  return h;
}

std::vector<double> p_grid_for_mixing_times(const std::vector<std::int64_t>& taus, double epsilon,
                                            DeviationMode mode) {
  std::vector<double> grid;
  grid.reserve(taus.size());
  for (std::int64_t tau : taus) grid.push_back(p_for_mixing_time(tau, epsilon, mode));
  return grid;
}

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw IoError("cannot parse boolean value: '" + v + "'");
}

void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "d") cfg.d = static_cast<int>(parse_int(value));
  else if (key == "lambda") cfg.lambda = parse_double(value);
  else if (key == "nu") cfg.nu = parse_double(value);
  else if (key == "sigma_grid") cfg.sigma_grid = parse_double_list(value);
  else if (key == "p_grid") cfg.p_grid = parse_double_list(value);
  else if (key == "K") cfg.K = parse_int(value);
  else if (key == "T") cfg.T = parse_int(value);
  else if (key == "gamma_rule") {
    if (value == "half_inv_L") cfg.gamma_rule = GammaRule::HalfInvL;
    else if (value == "corollary1") cfg.gamma_rule = GammaRule::Corollary1;
    else {
      cfg.gamma_rule = GammaRule::Explicit;
      cfg.gamma_explicit = parse_double(value);
    }
  } else if (key == "epsilon_mix") cfg.epsilon_mix = parse_double(value);
  else if (key == "master_seed") cfg.master_seed = parse_uint(value);
  else if (key == "burn_in") cfg.burn_in = parse_int(value);
  else if (key == "noise_means") {
    const std::vector<double> means = parse_double_list(value);
    if (means.size() != 2) throw IoError("noise_means expects two values: mean_a, mean_b");
    cfg.noise_mean_a = means[0];
    cfg.noise_mean_b = means[1];
  } else if (key == "noise_mean_a") cfg.noise_mean_a = parse_double(value);
  else if (key == "noise_mean_b") cfg.noise_mean_b = parse_double(value);
  else if (key == "noise_sigma") {
    // Single-sigma convenience form of sigma_grid.
    cfg.sigma_grid = {parse_double(value)};
  } else if (key == "noise_kind") {
    if (value == "constant") cfg.noise_kind = NoiseKind::Constant;
    else if (value == "gaussian") cfg.noise_kind = NoiseKind::Gaussian;
    else if (value == "truncated_gaussian") cfg.noise_kind = NoiseKind::TruncatedGaussian;
    else throw IoError("unknown noise_kind: '" + value + "'");
  } else if (key == "noise_bound") cfg.noise_bound = parse_double(value);
  else if (key == "p") {
    cfg.p_grid = {parse_double(value)};
  } else if (key == "mode") {
    if (value == "markov") cfg.mode = OracleMode::Markov;
    else if (value == "iid") cfg.mode = OracleMode::Iid;
    else throw IoError("unknown mode: '" + value + "'");
  } else if (key == "shared_instance") cfg.shared_instance = parse_bool(value);
  else if (key == "store_trajectories") cfg.store_trajectories = parse_bool(value);
  else if (key == "plateau_window") cfg.plateau_window = parse_int(value);
  else if (key == "mix_deviation") {
    if (value == "absolute") cfg.mix_deviation = DeviationMode::Absolute;
    else if (value == "relative") cfg.mix_deviation = DeviationMode::Relative;
    else throw IoError("unknown mix_deviation: '" + value + "'");
  } else {
    throw ParameterError("unknown config key: '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  const KeyValueFile kv = parse_key_value_text(text);
  for (const auto& [key, value] : kv.entries) set_config_key(cfg, key, value);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  const KeyValueFile kv = read_key_value_file(path);
  for (const auto& [key, value] : kv.entries) set_config_key(cfg, key, value);
  validate_config(cfg);
  return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  set_config_key(cfg, key, value);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.d < 1) throw ParameterError("config: d must be >= 1");
  if (!(cfg.lambda > 0.0) || !(cfg.nu > 0.0))
    throw ParameterError("config: lambda and nu must be > 0");
  if (cfg.sigma_grid.empty()) throw ParameterError("config: sigma_grid must be non-empty");
  if (cfg.p_grid.empty()) throw ParameterError("config: p_grid must be non-empty");
  for (double s : cfg.sigma_grid)
    if (s < 0.0) throw ParameterError("config: sigma values must be >= 0");
  for (double p : cfg.p_grid)
    if (!(p > 0.0 && p < 1.0))
      throw ParameterError("config: p = " + format_double(p) + " is not ergodic; need p in (0, 1)");
  if (cfg.K < 1) throw ParameterError("config: K must be >= 1");
  if (cfg.T < 1) throw ParameterError("config: T must be >= 1");
  if (!(cfg.epsilon_mix > 0.0 && cfg.epsilon_mix < 1.0))
    throw ParameterError("config: epsilon_mix must be in (0, 1)");
  if (cfg.burn_in >= cfg.T) throw ParameterError("config: burn_in must be < T");
  if (cfg.plateau_window == 0 || cfg.plateau_window > cfg.T / 2)
    throw ParameterError("config: plateau_window must be in [1, T/2] (or omitted)");
  if (cfg.gamma_rule == GammaRule::Explicit && !(cfg.gamma_explicit > 0.0))
    throw ParameterError("config: explicit gamma must be > 0");
  if (cfg.noise_kind == NoiseKind::TruncatedGaussian && !(cfg.noise_bound > 0.0))
    throw ParameterError("config: truncated_gaussian needs noise_bound > 0");
}

std::string config_echo_text(const ExperimentConfig& cfg) {
  std::string out;
  out += "d = " + std::to_string(cfg.d) + "\n";
  out += "lambda = " + format_double(cfg.lambda) + "\n";
  out += "nu = " + format_double(cfg.nu) + "\n";
  out += "sigma_grid = " + format_doubles(cfg.sigma_grid) + "\n";
  out += "p_grid = " + format_doubles(cfg.p_grid) + "\n";
  out += "K = " + std::to_string(cfg.K) + "\n";
  out += "T = " + std::to_string(cfg.T) + "\n";
  switch (cfg.gamma_rule) {
    case GammaRule::HalfInvL: out += "gamma_rule = half_inv_L\n"; break;
    case GammaRule::Corollary1: out += "gamma_rule = corollary1\n"; break;
    case GammaRule::Explicit: out += "gamma_rule = " + format_double(cfg.gamma_explicit) + "\n"; break;
  }
  out += "epsilon_mix = " + format_double(cfg.epsilon_mix) + "\n";
  out += "master_seed = " + std::to_string(cfg.master_seed) + "\n";
  out += "burn_in = " + std::to_string(cfg.burn_in) + "\n";
  out += "noise_mean_a = " + format_double(cfg.noise_mean_a) + "\n";
  out += "noise_mean_b = " + format_double(cfg.noise_mean_b) + "\n";
  switch (cfg.noise_kind) {
    case NoiseKind::Constant: out += "noise_kind = constant\n"; break;
    case NoiseKind::Gaussian: out += "noise_kind = gaussian\n"; break;
    case NoiseKind::TruncatedGaussian: out += "noise_kind = truncated_gaussian\n"; break;
  }
  out += "noise_bound = " + format_double(cfg.noise_bound) + "\n";
  out += std::string("mode = ") + (cfg.mode == OracleMode::Markov ? "markov" : "iid") + "\n";
  out += std::string("shared_instance = ") + (cfg.shared_instance ? "true" : "false") + "\n";
  out += std::string("store_trajectories = ") + (cfg.store_trajectories ? "true" : "false") + "\n";
  out += "plateau_window = " + std::to_string(cfg.plateau_window) + "\n";
  out += std::string("mix_deviation = ") +
         (cfg.mix_deviation == DeviationMode::Absolute ? "absolute" : "relative") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

NoiseDistribution noise_for_sigma(NoiseKind kind, double mean, double sigma, double bound) {
  // sigma = 0 selects the fully noiseless dynamics: state means are ignored
  // so the run converges to z* instead of plateauing on the +/- mean shifts.
  // Explicit constant shifts remain available via noise_kind = constant.
  if (sigma == 0.0 && kind != NoiseKind::Constant) return NoiseDistribution::constant(0.0);
  switch (kind) {
    case NoiseKind::Constant: return NoiseDistribution::constant(mean);
    case NoiseKind::Gaussian: return NoiseDistribution::gaussian(mean, sigma);
    case NoiseKind::TruncatedGaussian:
      return NoiseDistribution::truncated_gaussian(mean, sigma, bound);
  }
  throw ParameterError("unreachable noise kind");
}

namespace {

NoiseDistribution cell_noise(const ExperimentConfig& cfg, double mean, double sigma) {
  return noise_for_sigma(cfg.noise_kind, mean, sigma, cfg.noise_bound);
}

struct CellContext {
  const ExperimentConfig* cfg = nullptr;
  const AffineVIOperator* shared_op = nullptr;
  double p = 0.0;
  double sigma = 0.0;
};

CellResult run_cell(const CellContext& ctx, bool force_trajectories) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const std::uint64_t p_bits = canonical_bits(ctx.p);
  const std::uint64_t s_bits = canonical_bits(ctx.sigma);

  AffineVIOperator local_op;
  const AffineVIOperator* op = ctx.shared_op;
  if (!cfg.shared_instance) {
    const std::uint64_t inst_seed = seed_derivation(cfg.master_seed, {p_bits, s_bits, kInstanceTag});
    local_op = assemble_operator(build_saddle_instance(cfg.d, cfg.lambda, cfg.nu, inst_seed));
    op = &local_op;
  }

  const MarkovNoiseChain chain =
      two_state_chain(ctx.p, cell_noise(cfg, cfg.noise_mean_a, ctx.sigma),
                      cell_noise(cfg, cfg.noise_mean_b, ctx.sigma));
  const MixingProfile mix = mixing_time(chain, cfg.epsilon_mix, cfg.mix_deviation);

  CellResult cell;
  cell.p = ctx.p;
  cell.sigma = ctx.sigma;
  cell.tau_mix = mix.tau_mix;

  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(op->dim);
  double gamma = 0.0;
  switch (cfg.gamma_rule) {
    case GammaRule::HalfInvL: gamma = 1.0 / (2.0 * op->L); break;
    case GammaRule::Explicit: gamma = cfg.gamma_explicit; break;
    case GammaRule::Corollary1: {
      const Solution sol = exact_solution(*op);
      const double r_tau = std::max((z0 - sol.z_star).squaredNorm(), 1e-12);
      const StochasticOracle probe(*op, chain, cfg.mode,
                                   seed_derivation(cfg.master_seed, {p_bits, s_bits, kSigmaStarTag}));
      const SigmaStarEstimate sstar = sigma_star(probe, sol.z_star);
      gamma = tune_step_size(op->L, op->mu, mix.tau_mix, cfg.T, r_tau, sstar.value);
      break;
    }
  }
  cell.gamma_used = gamma;

  const bool keep_series = cfg.store_trajectories || force_trajectories;
  std::vector<double> variances;
  std::vector<double> plateaus;
  variances.reserve(static_cast<std::size_t>(cfg.K));
  plateaus.reserve(static_cast<std::size_t>(cfg.K));
  for (std::int64_t k = 0; k < cfg.K; ++k) {
    SolverConfig sc;
    sc.gamma = gamma;
    sc.T = cfg.T;
    sc.z0 = z0;
    sc.seed = seed_derivation(cfg.master_seed, {p_bits, s_bits, static_cast<std::uint64_t>(k)});
    // Very short runs (T = 1) admit no legal plateau window; skip the stat.
    const std::int64_t window = std::min(cfg.effective_plateau_window(), cfg.T / 2);
    try {
      RunTrace trace = run(*op, chain, sc, cfg.mode);
      variances.push_back(run_variance(trace, cfg.effective_burn_in()));
      if (window >= 1) plateaus.push_back(plateau(trace, window).value);
      if (keep_series) {
        cell.run_sq_distances.push_back(std::move(trace.sq_distances));
        cell.run_states.push_back(std::move(trace.states));
      }
    } catch (const DivergenceError&) {
      cell.failed = true;
      if (keep_series) {
        cell.run_sq_distances.emplace_back();  // placeholder keeps run indices aligned
        cell.run_states.emplace_back();
      }
    }
  }
  cell.k_runs = static_cast<std::int64_t>(variances.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!variances.empty()) {
    cell.mean_variance = mean_of(variances);
    cell.stderr_variance = stderr_of(variances, cell.mean_variance);
  } else {
    cell.mean_variance = cell.stderr_variance = nan;
  }
  if (!plateaus.empty()) {
    cell.plateau_mean = mean_of(plateaus);
    cell.plateau_stderr = stderr_of(plateaus, cell.plateau_mean);
  } else {
    cell.plateau_mean = cell.plateau_stderr = nan;
  }
  cell.normalized_variance = std::numeric_limits<double>::quiet_NaN();
  return cell;
}

std::size_t worker_count(std::size_t n_cells) {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MARKOV_VI_THREADS")) {
    try {
      n = static_cast<std::size_t>(parse_uint(env));
    } catch (const IoError&) {
      throw ParameterError("MARKOV_VI_THREADS must be a nonnegative integer");
    }
    if (n == 0) n = 1;
  }
  return std::min(n, std::max<std::size_t>(1, n_cells));
}

void normalize_cells(std::vector<CellResult>& cells, std::size_t n_p, std::size_t n_sigma) {
  for (std::size_t j = 0; j < n_sigma; ++j) {
    // Baseline: the non-failed cell of minimal tau_mix within this sigma,
    // first in p order on ties.
    const CellResult* base = nullptr;
    for (std::size_t i = 0; i < n_p; ++i) {
      const CellResult& cell = cells[i * n_sigma + j];
      if (cell.failed || cell.k_runs < 1) continue;
      if (base == nullptr || cell.tau_mix < base->tau_mix) base = &cell;
    }
    if (base == nullptr) continue;  // every cell failed; normalized stays NaN
    for (std::size_t i = 0; i < n_p; ++i) {
      CellResult& cell = cells[i * n_sigma + j];
      if (&cell == base) {
        cell.normalized_variance = 1.0;
      } else if (!cell.failed && cell.k_runs >= 1) {
        if (base->mean_variance > 0.0)
          cell.normalized_variance = cell.mean_variance / base->mean_variance;
        else
          cell.normalized_variance = (cell.mean_variance == 0.0)
                                         ? 1.0
                                         : std::numeric_limits<double>::infinity();
      }
    }
  }
}

}  // namespace

ExperimentReport run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);

  AffineVIOperator shared_op;
  if (cfg.shared_instance)
    shared_op = assemble_operator(build_saddle_instance(cfg.d, cfg.lambda, cfg.nu, cfg.master_seed));

  const std::size_t n_p = cfg.p_grid.size();
  const std::size_t n_sigma = cfg.sigma_grid.size();
  const std::size_t n_cells = n_p * n_sigma;

  std::vector<CellContext> tasks(n_cells);
  for (std::size_t i = 0; i < n_p; ++i) {
    for (std::size_t j = 0; j < n_sigma; ++j) {
      CellContext& ctx = tasks[i * n_sigma + j];
      ctx.cfg = &cfg;
      ctx.shared_op = cfg.shared_instance ? &shared_op : nullptr;
      ctx.p = cfg.p_grid[i];
      ctx.sigma = cfg.sigma_grid[j];
    }
  }

  std::vector<CellResult> cells(n_cells);
  const std::size_t workers = worker_count(n_cells);
  if (workers <= 1) {
    for (std::size_t idx = 0; idx < n_cells; ++idx) cells[idx] = run_cell(tasks[idx], false);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_cells);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= n_cells) return;
          try {
            cells[idx] = run_cell(tasks[idx], false);
          } catch (...) {
            errors[idx] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  normalize_cells(cells, n_p, n_sigma);

  ExperimentReport report;
  report.cells = std::move(cells);
  report.config_echo = config_echo_text(cfg);
  report.config_hash = fnv1a_64(report.config_echo);
  return report;
}

TrajectoryTable trajectory_export(const ExperimentConfig& cfg, double p, double sigma) {
  validate_config(cfg);
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("trajectory_export: p must be in (0, 1)");
  if (sigma < 0.0) throw ParameterError("trajectory_export: sigma must be >= 0");

  AffineVIOperator shared_op;
  CellContext ctx;
  ctx.cfg = &cfg;
  ctx.p = p;
  ctx.sigma = sigma;
  if (cfg.shared_instance) {
    shared_op = assemble_operator(build_saddle_instance(cfg.d, cfg.lambda, cfg.nu, cfg.master_seed));
    ctx.shared_op = &shared_op;
  }

  return cell_trajectories(run_cell(ctx, true));
}

TrajectoryTable cell_trajectories(const CellResult& cell) {
  TrajectoryTable table;
  for (std::size_t k = 0; k < cell.run_sq_distances.size(); ++k) {
    const auto& sq = cell.run_sq_distances[k];
    const auto& states = cell.run_states[k];
    if (sq.empty()) {
      table.failed_runs.push_back(static_cast<std::int64_t>(k));
      continue;
    }
    for (std::size_t t = 0; t < states.size(); ++t) {
      table.rows.push_back(TrajectoryRow{static_cast<std::int64_t>(k),
                                         static_cast<std::int64_t>(t), sq[t], states[t]});
    }
  }
  return table;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out =
      "p,tau_mix,sigma,k_runs,mean_variance,stderr_variance,normalized_variance,"
      "plateau_mean,plateau_stderr,failed\n";
  for (const CellResult& cell : report.cells) {
    out += format_double(cell.p) + "," + std::to_string(cell.tau_mix) + "," +
           format_double(cell.sigma) + "," + std::to_string(cell.k_runs) + "," +
           format_double(cell.mean_variance) + "," + format_double(cell.stderr_variance) + "," +
           format_double(cell.normalized_variance) + "," + format_double(cell.plateau_mean) + "," +
           format_double(cell.plateau_stderr) + "," + (cell.failed ? "1" : "0") + "\n";
  }
  return out;
}

std::string trajectory_csv(const TrajectoryTable& table) {
  std::string out = "run,t,sq_distance,state\n";
  for (const TrajectoryRow& row : table.rows) {
    out += std::to_string(row.run) + "," + std::to_string(row.t) + "," +
           format_double(row.sq_distance) + "," + std::to_string(row.state) + "\n";
  }
  return out;
}

}  // namespace markvi
