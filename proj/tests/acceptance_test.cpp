// Acceptance suite: end-to-end checks of the solver, the noise engine, and
// the experiment harness at full experiment scale. Each criterion prints one
// pass/fail line; the binary exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "markvi/harness.hpp"
#include "markvi/markov_chain.hpp"
#include "markvi/metrics.hpp"
#include "markvi/problem.hpp"
#include "markvi/solver.hpp"
#include "markvi/textio.hpp"

using namespace markvi;

namespace {

constexpr std::uint64_t kMasterSeed = 987654321;

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] criterion %d: %s (%s; %.1f s)\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

ExperimentConfig figure_config() {
  ExperimentConfig cfg;
  cfg.d = 10;
  cfg.lambda = 1.0;
  cfg.nu = 1.0;
  cfg.K = 14;
  cfg.T = 100000;
  cfg.gamma_rule = GammaRule::HalfInvL;
  cfg.epsilon_mix = 0.05;
  cfg.master_seed = kMasterSeed;
  cfg.store_trajectories = false;
  return cfg;
}

// --------------------------------------------------------------------------
// 1. Lemma suite: zero violations of both descent inequalities across the
//    (p, sigma) grid, 20 seeded runs on d = 10 instances.
// --------------------------------------------------------------------------
std::pair<bool, std::string> lemma_suite() {
  const std::vector<double> p_grid{0.5, 0.8, 0.95};
  const std::vector<double> sigma_grid{0.0, 0.01, 0.1};
  std::int64_t runs = 0, steps = 0;
  for (int r = 0; r < 20; ++r) {
    const double p = p_grid[static_cast<std::size_t>(r) % 3];
    const double sigma = sigma_grid[(static_cast<std::size_t>(r) / 3) % 3];
    const AffineVIOperator op =
        assemble_operator(build_saddle_instance(10, 1.0, 1.0, 1000 + (r % 5)));
    const MarkovNoiseChain chain =
        two_state_chain(p, noise_for_sigma(NoiseKind::Gaussian, 0.1, sigma, 0.0),
                        noise_for_sigma(NoiseKind::Gaussian, -0.1, sigma, 0.0));
    SolverConfig sc;
    sc.gamma = 1.0 / (2.0 * op.L);
    sc.T = 1000;
    sc.z0 = Eigen::VectorXd::Zero(op.dim);
    sc.seed = 3000 + static_cast<std::uint64_t>(r);
    sc.record_lemma_data = true;
    const RunTrace trace = run(op, chain, sc, OracleMode::Markov);

    const LemmaReport l1 = check_lemma1(trace, op.L, op.mu);
    if (!l1.clean())
      return {false, "lemma 1 violations in run " + std::to_string(r) + ":\n" + to_text(l1)};
    const std::int64_t tau = mixing_time(chain, 0.05).tau_mix;
    const LemmaReport l2 = check_lemma2(trace, op.L, trace.gamma, tau);
    if (!l2.clean())
      return {false, "lemma 2 violations in run " + std::to_string(r) + ":\n" + to_text(l2)};
    ++runs;
    steps += l1.checked + l2.checked;
  }
  return {true, std::to_string(runs) + " runs, " + std::to_string(steps) + " inequality checks"};
}

// --------------------------------------------------------------------------
// 2. Noiseless linear rate: decay below 1e-12 of the initial squared
//    distance within 1.5x the (1 - mu gamma / 2)^t envelope prediction.
// --------------------------------------------------------------------------
std::pair<bool, std::string> noiseless_linear_rate() {
  const NoiseDistribution silent = NoiseDistribution::constant(0.0);
  std::int64_t worst_margin = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const AffineVIOperator op = assemble_operator(build_saddle_instance(10, 1.0, 1.0, seed));
    const double gamma = 1.0 / (2.0 * op.L);
    const double rate = 1.0 - op.mu * gamma / 2.0;
    const auto predicted =
        static_cast<std::int64_t>(std::ceil(std::log(1e-12) / std::log(rate)));
    const std::int64_t budget = predicted + predicted / 2;
    SolverConfig sc;
    sc.gamma = gamma;
    sc.T = budget;
    sc.z0 = Eigen::VectorXd::Zero(op.dim);
    sc.seed = seed;
    sc.store_iterates = TraceStorage::Never;
    const RunTrace trace = run(op, two_state_chain(0.5, silent, silent), sc, OracleMode::Markov);
    const double target = 1e-12 * trace.sq_distances.front();
    std::int64_t hit = -1;
    for (std::int64_t t = 0; t <= budget; ++t) {
      if (trace.sq_distances[static_cast<std::size_t>(t)] <= target) {
        hit = t;
        break;
      }
    }
    if (hit < 0 || hit > budget)
      return {false, "instance seed " + std::to_string(seed) + " missed the 1.5x envelope"};
    worst_margin = std::max(worst_margin, hit * 100 / budget);
  }
  return {true, "10 instances; slowest run used " + std::to_string(worst_margin) +
                    "% of the 1.5x envelope budget"};
}

// --------------------------------------------------------------------------
// 3. Mixing-time oracle equivalence: matrix powering equals the closed form,
//    exact integer match over the full (p, epsilon) grid.
// --------------------------------------------------------------------------
std::pair<bool, std::string> mixing_equivalence() {
  const NoiseDistribution silent = NoiseDistribution::constant(0.0);
  int checked = 0;
  for (int pi = 55; pi <= 95; pi += 5) {
    const double p = pi / 100.0;
    for (double eps : {0.1, 0.05, 0.01}) {
      const std::int64_t powering = mixing_time(two_state_chain(p, silent, silent), eps).tau_mix;
      const std::int64_t closed = two_state_mixing_time_closed_form(p, eps).tau_mix;
      if (powering != closed)
        return {false, "mismatch at p = " + format_double(p) + ", eps = " + format_double(eps) +
                           ": powering " + std::to_string(powering) + " vs closed form " +
                           std::to_string(closed)};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " grid points, exact match"};
}

// --------------------------------------------------------------------------
// 4. Figure-1 reproduction: the tail oscillation band at tau_mix = 32 is at
//    least twice the band at tau_mix = 1 (sigma = 0.1, K = 14, T = 1e5).
// --------------------------------------------------------------------------
double tail_band(const ExperimentConfig& cfg, double p) {
  const TrajectoryTable table = trajectory_export(cfg, p, 0.1);
  if (!table.failed_runs.empty()) return -1.0;
  const std::int64_t tail_start = 3 * cfg.T / 4;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const TrajectoryRow& row : table.rows) {
    if (row.t < tail_start) continue;
    lo = std::min(lo, row.sq_distance);
    hi = std::max(hi, row.sq_distance);
  }
  return hi - lo;
}

std::pair<bool, std::string> figure1_oscillation_band() {
  ExperimentConfig cfg = figure_config();
  cfg.sigma_grid = {0.1};
  const double p_slow = p_for_mixing_time(32, cfg.epsilon_mix);
  cfg.p_grid = {0.5, p_slow};
  const double band_fast = tail_band(cfg, 0.5);
  const double band_slow = tail_band(cfg, p_slow);
  if (band_fast < 0.0 || band_slow < 0.0) return {false, "a run diverged"};
  const double ratio = band_slow / band_fast;
  return {ratio >= 2.0, "band(tau=32) / band(tau=1) = " + format_double(ratio)};
}

// --------------------------------------------------------------------------
// 5. Figure-2 reproduction: normalized sample variance is nondecreasing in
//    tau_mix over tau ~ {1, 2, 4, 8, 16, 32}, up to one stderr per cell.
// --------------------------------------------------------------------------
std::pair<bool, std::string> figure2_variance_trend() {
  ExperimentConfig cfg = figure_config();
  cfg.sigma_grid = {0.1};
  cfg.p_grid = p_grid_for_mixing_times({1, 2, 4, 8, 16, 32}, cfg.epsilon_mix);
  const ExperimentReport report = run_sweep(cfg);

  double base_mean = 0.0;
  for (const CellResult& cell : report.cells) {
    if (cell.failed) return {false, "cell p = " + format_double(cell.p) + " failed"};
    if (cell.normalized_variance == 1.0 && cell.tau_mix == 1) base_mean = cell.mean_variance;
  }
  if (base_mean <= 0.0) return {false, "no tau = 1 baseline cell"};

  std::string curve = "normalized variance:";
  for (const CellResult& cell : report.cells)
    curve += " " + format_double(cell.normalized_variance);
  for (std::size_t i = 0; i + 1 < report.cells.size(); ++i) {
    const CellResult& a = report.cells[i];
    const CellResult& b = report.cells[i + 1];
    const double slack = (a.stderr_variance + b.stderr_variance) / base_mean;
    if (b.normalized_variance < a.normalized_variance - slack)
      return {false, "decrease from tau " + std::to_string(a.tau_mix) + " to " +
                         std::to_string(b.tau_mix) + " beyond one stderr; " + curve};
  }
  return {true, curve};
}

// --------------------------------------------------------------------------
// 6. Plateau-gamma scaling: halving gamma shrinks the K-averaged tail
//    plateau by a factor in [1.3, 4] at sigma = 0.1, tau_mix = 8.
// --------------------------------------------------------------------------
std::pair<bool, std::string> plateau_gamma_scaling() {
  ExperimentConfig cfg = figure_config();
  cfg.sigma_grid = {0.1};
  cfg.p_grid = {p_for_mixing_time(8, cfg.epsilon_mix)};

  const ExperimentReport full = run_sweep(cfg);

  const AffineVIOperator op =
      assemble_operator(build_saddle_instance(cfg.d, cfg.lambda, cfg.nu, cfg.master_seed));
  cfg.gamma_rule = GammaRule::Explicit;
  cfg.gamma_explicit = 1.0 / (4.0 * op.L);  // half of 1/(2L)
  const ExperimentReport halved = run_sweep(cfg);

  const CellResult& a = full.cells.front();
  const CellResult& b = halved.cells.front();
  if (a.failed || b.failed) return {false, "a run diverged"};
  const double ratio = a.plateau_mean / b.plateau_mean;
  return {ratio >= 1.3 && ratio <= 4.0,
          "plateau(gamma) / plateau(gamma/2) = " + format_double(ratio)};
}

// --------------------------------------------------------------------------
// 7. Determinism: identical configs produce byte-identical report CSVs.
// --------------------------------------------------------------------------
std::pair<bool, std::string> sweep_determinism() {
  ExperimentConfig cfg;
  cfg.d = 6;
  cfg.sigma_grid = {0.0, 0.05};
  cfg.p_grid = {0.5, 0.8};
  cfg.K = 3;
  cfg.T = 2000;
  cfg.master_seed = kMasterSeed;
  const std::string a = report_csv(run_sweep(cfg));
  const std::string b = report_csv(run_sweep(cfg));
  if (a != b) return {false, "report CSVs differ between identical sweeps"};
  return {true, std::to_string(a.size()) + " bytes, identical"};
}

}  // namespace

int main() {
  std::printf("markvi acceptance suite\n");
  criterion(1, "lemma 1/2 hold on seeded runs across the (p, sigma) grid", lemma_suite);
  criterion(2, "noiseless linear rate within 1.5x the contraction envelope",
            noiseless_linear_rate);
  criterion(3, "mixing time by powering equals the closed form", mixing_equivalence);
  criterion(4, "tail oscillation band grows with mixing time (figure 1)",
            figure1_oscillation_band);
  criterion(5, "normalized variance nondecreasing in mixing time (figure 2)",
            figure2_variance_trend);
  criterion(6, "halving gamma shrinks the plateau by a factor in [1.3, 4]",
            plateau_gamma_scaling);
  criterion(7, "full sweeps are byte-identical across reruns", sweep_determinism);
  if (g_failures == 0) {
    std::printf("acceptance: all 7 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
