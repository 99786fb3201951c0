#include "markvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "markvi/errors.hpp"
#include "markvi/textio.hpp"

namespace markvi {

std::pair<Eigen::VectorXd, Eigen::VectorXd> extragradient_step(const Eigen::VectorXd& z,
                                                               const StochasticOracle& oracle,
                                                               const StepSample& sample,
                                                               double gamma) {
  Eigen::VectorXd z_half = z - gamma * oracle.evaluate_noisy(sample, z);
  Eigen::VectorXd z_next = z - gamma * oracle.evaluate_noisy(sample, z_half);
  return {std::move(z_half), std::move(z_next)};
}

RunTrace run(const AffineVIOperator& op, const MarkovNoiseChain& chain, const SolverConfig& config,
             OracleMode mode) {
  if (!(config.gamma > 0.0)) throw ParameterError("run: gamma must be > 0");
  if (config.T < 1) throw ParameterError("run: T must be >= 1");
  if (config.z0.size() != op.dim)
    throw ParameterError("run: z0 has length " + std::to_string(config.z0.size()) +
                         ", operator dimension is " + std::to_string(op.dim));
  if (!(op.L > 0.0) || !(op.mu > 0.0))
    throw ParameterError("run: operator constants are not certified (assemble_operator fills them)");

  const Solution sol = exact_solution(op);
  const std::int64_t T = config.T;
  bool store_full = config.record_lemma_data;
  if (!store_full) {
    switch (config.store_iterates) {
      case TraceStorage::Always: store_full = true; break;
      case TraceStorage::Never: store_full = false; break;
      case TraceStorage::Auto:
        store_full = static_cast<std::int64_t>(op.dim) * T <= 10000000;
        break;
    }
  }

  RunTrace trace;
  trace.gamma = config.gamma;
  trace.seed = config.seed;
  trace.mode = mode;
  trace.z_star = sol.z_star;
  trace.solution_residual = sol.residual;
  trace.states.reserve(static_cast<std::size_t>(T));
  trace.sq_distances.reserve(static_cast<std::size_t>(T) + 1);
  if (store_full) {
    trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
    trace.half_iterates.reserve(static_cast<std::size_t>(T));
  }
  if (config.record_lemma_data) trace.optimum_noise.reserve(static_cast<std::size_t>(T));

  // F(z*) once; the per-step optimum noise is F(z*) + xi^t.
  const Eigen::VectorXd r_star = evaluate(op, sol.z_star);

  StochasticOracle oracle(op, chain, mode, config.seed);
  Eigen::VectorXd z = config.z0;
  const double initial_sq = (z - sol.z_star).squaredNorm();
  const double blowup = 1e12 * (1.0 + initial_sq);

  trace.sq_distances.push_back(initial_sq);
  if (store_full) trace.iterates.push_back(z);

  for (std::int64_t t = 0; t < T; ++t) {
    const StepSample sample = oracle.advance();
    auto [z_half, z_next] = extragradient_step(z, oracle, sample, config.gamma);

    trace.states.push_back(sample.state);
    if (config.record_lemma_data) trace.optimum_noise.push_back(r_star + sample.noise_vector);
    if (store_full) trace.half_iterates.push_back(std::move(z_half));

    z = std::move(z_next);
    const double sq = (z - sol.z_star).squaredNorm();
    if (!std::isfinite(sq) || !z.allFinite() || sq > blowup)
      throw DivergenceError(t, "run diverged at step " + std::to_string(t) + ": |z - z*|^2 = " +
                                   format_double(sq) + " (gamma = " + format_double(config.gamma) +
                                   ")");
    trace.sq_distances.push_back(sq);
    if (store_full) trace.iterates.push_back(z);
  }
  return trace;
}

double tune_step_size(double L, double mu, std::int64_t tau, std::int64_t horizon_T, double r_tau,
                      double sigma_star, StepBoundMode bound) {
  if (!(L > 0.0) || !(mu > 0.0)) throw ParameterError("tune_step_size: L and mu must be > 0");
  if (tau < 1 || horizon_T < 1)
    throw ParameterError("tune_step_size: tau and horizon_T must be >= 1");
  if (!(r_tau > 0.0)) throw ParameterError("tune_step_size: r_tau must be > 0");
  if (sigma_star < 0.0) throw ParameterError("tune_step_size: sigma_star must be >= 0");

  const double t = static_cast<double>(horizon_T);
  const double tau_d = static_cast<double>(tau);
  const double lipschitz_bound = 1.0 / (2.0 * L);
  const double contraction_bound =
      (bound == StepBoundMode::Proof) ? 1.0 / (4.0 * mu * tau_d) : 1.0 / (4.0 * mu);
  const double ratio = (sigma_star == 0.0)
                           ? std::numeric_limits<double>::infinity()
                           : mu * mu * r_tau * t * t / (112.0 * tau_d * tau_d * sigma_star * sigma_star);
  const double log_bound = 2.0 * std::log(std::max(2.0, ratio)) / (mu * t);
  return std::min(lipschitz_bound, std::min(contraction_bound, log_bound));
}

}  // namespace markvi
