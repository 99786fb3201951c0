#pragma once

// Stochastic oracle F(z, xi) = F(z) + xi, with xi driven by a finite Markov
// chain (or resampled i.i.d. from its stationary law). One advance() per
// solver step; the returned StepSample pins the noise state so that both
// operator evaluations of an extragradient step consume the identical xi^t.

#include <cstdint>

#include <Eigen/Dense>

#include "markvi/markov_chain.hpp"
#include "markvi/problem.hpp"

namespace markvi {

enum class OracleMode { Markov, Iid };

/// The realized randomness of one solver step. noise_vector is drawn once
/// in advance() and never redrawn.
struct StepSample {
  std::int64_t step_index = 0;
  int state = 0;
  Eigen::VectorXd noise_vector;
};

/// Single-threaded: holds the chain position and the RNG stream. The
/// operator and chain are borrowed immutably and must outlive the oracle.
class StochasticOracle {
public:
  StochasticOracle(const AffineVIOperator& op, const MarkovNoiseChain& chain, OracleMode mode,
                   std::uint64_t seed);
  // The oracle stores references; temporaries would dangle.
  StochasticOracle(AffineVIOperator&&, const MarkovNoiseChain&, OracleMode, std::uint64_t) = delete;
  StochasticOracle(const AffineVIOperator&, MarkovNoiseChain&&, OracleMode, std::uint64_t) = delete;
  StochasticOracle(AffineVIOperator&&, MarkovNoiseChain&&, OracleMode, std::uint64_t) = delete;

  /// Moves the noise process one step (first call yields the initial state;
  /// i.i.d. mode resamples from pi instead of transitioning) and draws the
  /// step's noise vector.
  StepSample advance();

  /// F(z) + sample.noise_vector. Throws StaleSampleError unless `sample` is
  /// the one produced by the most recent advance().
  Eigen::VectorXd evaluate_noisy(const StepSample& sample, const Eigen::VectorXd& z) const;

  std::int64_t step_count() const noexcept { return step_count_; }
  int current_state() const noexcept { return current_state_; }
  OracleMode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const AffineVIOperator& op() const noexcept { return *op_; }
  const MarkovNoiseChain& chain() const noexcept { return *chain_; }

  /// sum_s pi_s * mean_s: the stationary bias of the additive noise. Zero
  /// only for balanced configurations (e.g. means +/-0.1 with pi = (1/2,
  /// 1/2)); asymmetric setups surface their bias here.
  double pi_weighted_mean_noise() const;

private:
  const AffineVIOperator* op_;
  const MarkovNoiseChain* chain_;
  OracleMode mode_;
  std::uint64_t seed_;
  RngStream rng_;
  int current_state_ = 0;
  std::int64_t step_count_ = 0;
};

struct SigmaStarEstimate {
  double value = 0.0;
  bool is_estimate = false;  // true when the noise is unbounded (gaussian)
};

/// Bound on |F(z*, xi)| over noise states. Exact supremum for constant and
/// truncated noise; for unbounded gaussian noise, the empirical `quantile`
/// of |F(z*, xi)| over 1e5 draws per state, flagged as an estimate. Does not
/// advance the oracle's stream.
SigmaStarEstimate sigma_star(const StochasticOracle& oracle, const Eigen::VectorXd& z_star,
                             double quantile = 0.999);

}  // namespace markvi
