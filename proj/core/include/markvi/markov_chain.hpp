#pragma once

// Finite-state Markov noise engine: row-stochastic kernels, stationary
// distributions, mixing times, trajectory sampling, and the per-state scalar
// noise laws that feed the stochastic oracle.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace markvi {

using RngStream = std::mt19937_64;

enum class NoiseKind { Constant, Gaussian, TruncatedGaussian };

/// Scalar noise law attached to one chain state. Use the factories; they
/// enforce sigma >= 0, bound > 0, and sigma = 0 for the constant kind.
struct NoiseDistribution {
  NoiseKind kind = NoiseKind::Constant;
  double mean = 0.0;
  double sigma = 0.0;
  double bound = 0.0;  // truncation half-width, TruncatedGaussian only

  static NoiseDistribution constant(double mean);
  static NoiseDistribution gaussian(double mean, double sigma);
  static NoiseDistribution truncated_gaussian(double mean, double sigma, double bound);
};

enum class ChainStart {
  Stationary,  // xi_0 ~ pi, the stationary regime
  Fixed,       // xi_0 = initial_state, for burn-in studies
};

struct MarkovNoiseChain {
  int n_states = 0;
  Eigen::MatrixXd T;  // row-stochastic transition kernel
  std::vector<NoiseDistribution> state_noise;
  int initial_state = 0;
  ChainStart start = ChainStart::Stationary;
  Eigen::VectorXd pi;  // stationary distribution, filled at construction
};

/// How kernel-vs-stationary deviation is measured when computing tau_mix.
/// Absolute is |P{xi_t = m | xi_0 = m0} - pi_m|; Relative divides by pi_m.
enum class DeviationMode { Absolute, Relative };

struct MixingProfile {
  double epsilon = 0.0;
  std::int64_t tau_mix = 0;
  double max_deviation_at_tau = 0.0;
};

/// Validates the kernel (row sums within 1e-12 of 1, entries >= 0,
/// irreducible and aperiodic: some T^k is entrywise positive for k <= n^2)
/// and caches the stationary distribution. Throws ParameterError otherwise.
MarkovNoiseChain make_markov_chain(const Eigen::MatrixXd& T,
                                   std::vector<NoiseDistribution> state_noise,
                                   ChainStart start = ChainStart::Stationary,
                                   int initial_state = 0);

/// The two-state symmetric chain of kernel [[p, 1-p], [1-p, p]] with states
/// A (index 0) and B (index 1). p in {0, 1} is rejected: those chains are
/// not ergodic.
MarkovNoiseChain two_state_chain(double p, const NoiseDistribution& noise_a,
                                 const NoiseDistribution& noise_b,
                                 ChainStart start = ChainStart::Stationary,
                                 int initial_state = 0);

/// Left fixed point pi T = pi, sum pi = 1, by power iteration to an L1
/// residual of 1e-13.
Eigen::VectorXd stationary_distribution(const MarkovNoiseChain& chain);

/// Smallest t >= 1 whose t-step kernel deviates from pi by at most epsilon
/// uniformly over start states, found by iterated matrix powering.
MixingProfile mixing_time(const MarkovNoiseChain& chain, double epsilon,
                          DeviationMode mode = DeviationMode::Absolute);

/// Closed form for the two-state symmetric chain, where the t-step
/// deviation is |2p-1|^t / 2 (absolute) or |2p-1|^t (relative). Integer
/// result adjusted locally so it matches the powering route bit for bit.
MixingProfile two_state_mixing_time_closed_form(double p, double epsilon,
                                                DeviationMode mode = DeviationMode::Absolute);

/// Inverts the closed form: a p in [0.5, 1) whose two-state chain has
/// exactly the requested mixing time at the given epsilon.
double p_for_mixing_time(std::int64_t tau, double epsilon,
                         DeviationMode mode = DeviationMode::Absolute);

/// State sequence of the requested length; xi_0 follows the chain's start
/// mode, then xi_{t+1} ~ T[xi_t, .]. Deterministic per seed.
std::vector<int> sample_trajectory(const MarkovNoiseChain& chain, std::int64_t length,
                                   std::uint64_t seed);

/// dim independent draws from the scalar law.
Eigen::VectorXd sample_noise(const NoiseDistribution& dist, int dim, RngStream& rng);

/// One draw from the categorical distribution given by `weights` (assumed
/// normalized) using a single uniform variate from `rng`.
int sample_categorical(const Eigen::VectorXd& weights, RngStream& rng);

}  // namespace markvi
