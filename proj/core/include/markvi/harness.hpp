#pragma once

// Experiment orchestration: a (p, sigma) grid of cells, K seeded repeats per
// cell on one shared instance, variance/plateau aggregation, and CSV
// serialization. Seeds derive from the cell's (p, sigma) values and the
// repeat index, never from grid position or completion order, so cells are
// reproducible in isolation.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "markvi/markov_chain.hpp"
#include "markvi/metrics.hpp"
#include "markvi/oracle.hpp"
#include "markvi/problem.hpp"
#include "markvi/solver.hpp"

namespace markvi {

enum class GammaRule { HalfInvL, Corollary1, Explicit };

struct ExperimentConfig {
  int d = 10;
  double lambda = 1.0;
  double nu = 1.0;
  std::vector<double> sigma_grid;
  std::vector<double> p_grid;
  std::int64_t K = 14;
  std::int64_t T = 100000;
  GammaRule gamma_rule = GammaRule::HalfInvL;
  double gamma_explicit = 0.0;  // used when gamma_rule == Explicit
  double epsilon_mix = 0.05;
  std::uint64_t master_seed = 1;
  std::int64_t burn_in = -1;         // -1: default T/2
  double noise_mean_a = 0.1;
  double noise_mean_b = -0.1;
  NoiseKind noise_kind = NoiseKind::Gaussian;
  double noise_bound = 0.0;          // truncation half-width when truncated
  OracleMode mode = OracleMode::Markov;
  bool shared_instance = true;       // false: fresh instance per cell
  bool store_trajectories = true;
  std::int64_t plateau_window = -1;  // -1: default T/4
  DeviationMode mix_deviation = DeviationMode::Absolute;

  std::int64_t effective_burn_in() const { return burn_in >= 0 ? burn_in : T / 2; }
  std::int64_t effective_plateau_window() const {
    return plateau_window >= 0 ? plateau_window : std::max<std::int64_t>(1, T / 4);
  }
};

/// One (p, sigma) cell of the sweep. `failed` is set when any of the K runs
/// diverged; statistics then cover the k_runs that completed (NaN if none).
struct CellResult {
  double p = 0.0;
  std::int64_t tau_mix = 0;
  double sigma = 0.0;
  std::int64_t k_runs = 0;
  double mean_variance = 0.0;
  double stderr_variance = 0.0;
  double normalized_variance = 0.0;
  double plateau_mean = 0.0;
  double plateau_stderr = 0.0;
  bool failed = false;
  double gamma_used = 0.0;

  // Per-run series, populated when store_trajectories is on.
  std::vector<std::vector<double>> run_sq_distances;  // each of length T + 1
  std::vector<std::vector<int>> run_states;           // each of length T
};

struct ExperimentReport {
  std::vector<CellResult> cells;  // p-major, sigma-minor order
  std::string config_echo;        // canonical key = value text of the config
  std::uint64_t config_hash = 0;  // FNV-1a over config_echo
};

struct TrajectoryRow {
  std::int64_t run = 0;
  std::int64_t t = 0;
  double sq_distance = 0.0;
  int state = 0;
};

struct TrajectoryTable {
  std::vector<TrajectoryRow> rows;          // run-major; t in [0, T) per run
  std::vector<std::int64_t> failed_runs;    // repeats that diverged (no rows)
};

/// Counter-style derivation: distinct (master, parts) tuples map to distinct
/// streams, independent of evaluation order. Stable across releases.
std::uint64_t seed_derivation(std::uint64_t master, std::initializer_list<std::uint64_t> parts);
std::uint64_t seed_derivation(std::uint64_t master, const std::vector<std::uint64_t>& parts);

/// Full grid sweep. A diverged run marks its cell failed and the sweep
/// continues. Within each sigma, variances are normalized by the cell of
/// minimal tau_mix (itself pinned to exactly 1). Honors MARKOV_VI_THREADS.
ExperimentReport run_sweep(const ExperimentConfig& config);

/// Runs the single (p, sigma) cell and lays its K runs out as plot-ready
/// rows. Uses the same per-cell seeds as run_sweep, so the numbers match a
/// sweep containing this cell.
TrajectoryTable trajectory_export(const ExperimentConfig& config, double p, double sigma);

/// Flattens one cell's stored series into table rows (empty if the sweep ran
/// with store_trajectories = false).
TrajectoryTable cell_trajectories(const CellResult& cell);

/// The noise law a sweep cell attaches to a state: sigma = 0 selects the
/// fully noiseless dynamics (mean ignored) unless the kind is explicitly
/// constant; otherwise the configured kind at this mean and sigma.
NoiseDistribution noise_for_sigma(NoiseKind kind, double mean, double sigma, double bound);

/// p values whose two-state mixing times at `epsilon` are exactly `taus`.
std::vector<double> p_grid_for_mixing_times(const std::vector<std::int64_t>& taus, double epsilon,
                                            DeviationMode mode = DeviationMode::Absolute);

/// Config round trip. Files are `key = value` lines; unknown keys are
/// errors. Overrides are `key=value` strings applied on top of the file.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& text);
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);
void validate_config(const ExperimentConfig& config);
std::string config_echo_text(const ExperimentConfig& config);

/// CSV renderings. Columns are fixed:
///   report:     p,tau_mix,sigma,k_runs,mean_variance,stderr_variance,
///               normalized_variance,plateau_mean,plateau_stderr,failed
///   trajectory: run,t,sq_distance,state
std::string report_csv(const ExperimentReport& report);
std::string trajectory_csv(const TrajectoryTable& table);

}  // namespace markvi
