#pragma once

// Extragradient iteration driven by the Markovian oracle:
//   z^{t+1/2} = z^t - gamma F(z^t,      xi^t)
//   z^{t+1}   = z^t - gamma F(z^{t+1/2}, xi^t)
// with the same xi^t in both lines, plus step-size selection and full run
// traces for the metrics layer.

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "markvi/markov_chain.hpp"
#include "markvi/oracle.hpp"
#include "markvi/problem.hpp"

namespace markvi {

enum class TraceStorage {
  Auto,    // keep full vectors only when dim * T <= 1e7 entries
  Always,
  Never,   // squared distances and states only
};

struct SolverConfig {
  double gamma = 0.0;
  std::int64_t T = 0;
  Eigen::VectorXd z0;
  std::uint64_t seed = 0;
  bool record_lemma_data = false;  // also forces full storage
  TraceStorage store_iterates = TraceStorage::Auto;
};

/// Everything a run leaves behind. sq_distances[t] = |z^t - z*|^2 is always
/// recorded (length T + 1); iterates (T + 1) and half_iterates (T) only
/// under the storage policy; optimum_noise[t] = F(z*, xi^t) only when
/// record_lemma_data was set.
struct RunTrace {
  double gamma = 0.0;
  std::uint64_t seed = 0;
  OracleMode mode = OracleMode::Markov;
  Eigen::VectorXd z_star;
  double solution_residual = 0.0;

  std::vector<Eigen::VectorXd> iterates;
  std::vector<Eigen::VectorXd> half_iterates;
  std::vector<int> states;
  std::vector<double> sq_distances;
  std::vector<Eigen::VectorXd> optimum_noise;

  std::int64_t steps() const noexcept { return static_cast<std::int64_t>(states.size()); }
  bool has_iterates() const noexcept { return !iterates.empty(); }
  bool has_lemma_data() const noexcept { return !optimum_noise.empty(); }
};

/// One extragradient update; both evaluations reuse `sample`. Returns
/// (z^{t+1/2}, z^{t+1}).
std::pair<Eigen::VectorXd, Eigen::VectorXd> extragradient_step(const Eigen::VectorXd& z,
                                                               const StochasticOracle& oracle,
                                                               const StepSample& sample,
                                                               double gamma);

/// Runs T steps with a fresh oracle seeded from config.seed. Deterministic
/// per seed. Throws DivergenceError when an iterate goes non-finite or
/// |z^t - z*|^2 exceeds 1e12 * (1 + |z^0 - z*|^2).
RunTrace run(const AffineVIOperator& op, const MarkovNoiseChain& chain, const SolverConfig& config,
             OracleMode mode);

/// Which contraction-side constraint the tuner applies: the bound the
/// convergence analysis actually establishes, 1/(4 mu tau), or the looser
/// 1/(4 mu) quoted alongside the rate statement.
enum class StepBoundMode { Proof, Statement };

/// gamma = min{ 1/(2L),  1/(4 mu tau) or 1/(4 mu),
///              2 log(max{2, mu^2 r_tau T^2 / (112 tau^2 sigma*^2)}) / (mu T) }.
/// sigma_star = 0 sends the third bound to +inf, leaving the first two.
double tune_step_size(double L, double mu, std::int64_t tau, std::int64_t horizon_T, double r_tau,
                      double sigma_star, StepBoundMode bound = StepBoundMode::Proof);

}  // namespace markvi
