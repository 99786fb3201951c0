#include "markvi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "markvi/errors.hpp"

namespace markvi {

StochasticOracle::StochasticOracle(const AffineVIOperator& op, const MarkovNoiseChain& chain,
                                   OracleMode mode, std::uint64_t seed)
    : op_(&op), chain_(&chain), mode_(mode), seed_(seed), rng_(seed) {
  current_state_ = (chain.start == ChainStart::Stationary) ? sample_categorical(chain.pi, rng_)
                                                           : chain.initial_state;
}

StepSample StochasticOracle::advance() {
  if (mode_ == OracleMode::Iid) {
    current_state_ = sample_categorical(chain_->pi, rng_);
  } else if (step_count_ > 0) {
    // Step 0 consumes the initial state drawn at construction (pi or the
    // fixed start); transitions begin with step 1.
    current_state_ = sample_categorical(chain_->T.row(current_state_), rng_);
  }
  StepSample sample;
  sample.step_index = step_count_;
  sample.state = current_state_;
  sample.noise_vector = sample_noise(chain_->state_noise[current_state_], op_->dim, rng_);
  ++step_count_;
  return sample;
}

Eigen::VectorXd StochasticOracle::evaluate_noisy(const StepSample& sample,
                                                 const Eigen::VectorXd& z) const {
  if (sample.step_index != step_count_ - 1)
    throw StaleSampleError("evaluate_noisy: sample from step " +
                           std::to_string(sample.step_index) + " used at step count " +
                           std::to_string(step_count_) +
                           "; both evaluations of a step must reuse the current sample");
  return evaluate(*op_, z) + sample.noise_vector;
}

double StochasticOracle::pi_weighted_mean_noise() const {
  double m = 0.0;
  for (int s = 0; s < chain_->n_states; ++s) m += chain_->pi(s) * chain_->state_noise[s].mean;
  return m;
}

namespace {

// Largest |F(z*) + xi| over the truncated box: per coordinate the worst
// offset is one of the two interval endpoints.
double truncated_sup_norm(const Eigen::VectorXd& r_star, double mean, double bound) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r_star.size(); ++i) {
    const double lo = r_star(i) + mean - bound;
    const double hi = r_star(i) + mean + bound;
    const double w = std::max(std::abs(lo), std::abs(hi));
    sum += w * w;
  }
  return std::sqrt(sum);
}

}  // namespace

SigmaStarEstimate sigma_star(const StochasticOracle& oracle, const Eigen::VectorXd& z_star,
                             double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0))
    throw ParameterError("sigma_star: quantile must lie in (0, 1]");
  const AffineVIOperator& op = oracle.op();
  const MarkovNoiseChain& chain = oracle.chain();
  const Eigen::VectorXd r_star = evaluate(op, z_star);

  SigmaStarEstimate result;
  // Private stream so the estimate never perturbs the oracle's step noise.
  RngStream rng(oracle.seed() ^ 0xa76bdf3e29c401d5ULL);
  for (int s = 0; s < chain.n_states; ++s) {
    const NoiseDistribution& dist = chain.state_noise[s];
    double value = 0.0;
    switch (dist.kind) {
      case NoiseKind::Constant:
        value = (r_star.array() + dist.mean).matrix().norm();
        break;
      case NoiseKind::TruncatedGaussian:
        value = (dist.sigma == 0.0) ? (r_star.array() + dist.mean).matrix().norm()
                                    : truncated_sup_norm(r_star, dist.mean, dist.bound);
        break;
      case NoiseKind::Gaussian: {
        if (dist.sigma == 0.0) {
          value = (r_star.array() + dist.mean).matrix().norm();
          break;
        }
        constexpr int kDraws = 100000;
        std::vector<double> norms(kDraws);
        for (int k = 0; k < kDraws; ++k)
          norms[static_cast<std::size_t>(k)] =
              (r_star + sample_noise(dist, op.dim, rng)).norm();
        std::sort(norms.begin(), norms.end());
        auto idx = static_cast<std::size_t>(std::ceil(quantile * kDraws)) - 1;
        idx = std::min(idx, norms.size() - 1);
        value = norms[idx];
        result.is_estimate = true;
        break;
      }
    }
    result.value = std::max(result.value, value);
  }
  return result;
}

}  // namespace markvi
