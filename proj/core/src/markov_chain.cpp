#include "markvi/markov_chain.hpp"

#include <cmath>
#include <string>

#include "markvi/errors.hpp"
#include "markvi/textio.hpp"

namespace markvi {

NoiseDistribution NoiseDistribution::constant(double mean) {
  return NoiseDistribution{NoiseKind::Constant, mean, 0.0, 0.0};
}

NoiseDistribution NoiseDistribution::gaussian(double mean, double sigma) {
  if (sigma < 0.0) throw ParameterError("gaussian noise: sigma must be >= 0");
  return NoiseDistribution{NoiseKind::Gaussian, mean, sigma, 0.0};
}

NoiseDistribution NoiseDistribution::truncated_gaussian(double mean, double sigma, double bound) {
  if (sigma < 0.0) throw ParameterError("truncated gaussian noise: sigma must be >= 0");
  if (!(bound > 0.0)) throw ParameterError("truncated gaussian noise: bound must be > 0");
  return NoiseDistribution{NoiseKind::TruncatedGaussian, mean, sigma, bound};
}

namespace {

void validate_kernel(const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(t.rows());
  if (n < 1 || t.cols() != n) throw ParameterError("chain kernel must be square and non-empty");
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (t(i, j) < 0.0)
        throw ParameterError("chain kernel has a negative entry at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
      row_sum += t(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw ParameterError("chain kernel row " + std::to_string(i) + " sums to " +
                           format_double(row_sum) + ", expected 1");
  }
  // Primitivity: some boolean power of the adjacency pattern is all-positive
  // within n^2 steps iff the chain is irreducible and aperiodic.
  using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMat adj = (t.array() > 0.0);
  BoolMat reach = adj;
  const int cap = n * n;
  for (int k = 1; k <= cap; ++k) {
    if (reach.all()) return;
    BoolMat next = BoolMat::Constant(n, n, false);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        if (reach(i, l))
          for (int j = 0; j < n; ++j)
            if (adj(l, j)) next(i, j) = true;
    reach = next;
  }
  if (!reach.all())
    throw ParameterError("chain kernel is not ergodic (no power T^k with k <= n^2 is positive)");
}

Eigen::VectorXd stationary_of_kernel(const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(t.rows());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  const int cap = 1000000;
  for (int it = 0; it < cap; ++it) {
    Eigen::VectorXd next = t.transpose() * pi;
    next /= next.sum();
    if ((next.transpose() * t - next.transpose()).cwiseAbs().sum() <= 1e-13) return next;
    pi = next;
  }
  throw NumericalError("stationary_distribution: power iteration did not reach residual 1e-13");
}

double kernel_deviation(const Eigen::MatrixXd& power, const Eigen::VectorXd& pi,
                        DeviationMode mode) {
  double dev = 0.0;
  for (int i = 0; i < power.rows(); ++i) {
    for (int j = 0; j < power.cols(); ++j) {
      double d = std::abs(power(i, j) - pi(j));
      if (mode == DeviationMode::Relative) d /= pi(j);
      dev = std::max(dev, d);
    }
  }
  return dev;
}

}  // namespace

MarkovNoiseChain make_markov_chain(const Eigen::MatrixXd& t,
                                   std::vector<NoiseDistribution> state_noise, ChainStart start,
                                   int initial_state) {
  validate_kernel(t);
  const int n = static_cast<int>(t.rows());
  if (static_cast<int>(state_noise.size()) != n)
    throw ParameterError("chain needs one noise law per state (" + std::to_string(n) + ")");
  if (initial_state < 0 || initial_state >= n)
    throw ParameterError("initial_state out of range");
  MarkovNoiseChain chain;
  chain.n_states = n;
  chain.T = t;
  chain.state_noise = std::move(state_noise);
  chain.initial_state = initial_state;
  chain.start = start;
  chain.pi = stationary_of_kernel(t);
  return chain;
}

MarkovNoiseChain two_state_chain(double p, const NoiseDistribution& noise_a,
                                 const NoiseDistribution& noise_b, ChainStart start,
                                 int initial_state) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("two_state_chain: p = " + format_double(p) +
                         " gives a non-ergodic chain; p must lie in (0, 1)");
  Eigen::MatrixXd t(2, 2);
  t << p, 1.0 - p, 1.0 - p, p;
  return make_markov_chain(t, {noise_a, noise_b}, start, initial_state);
}

Eigen::VectorXd stationary_distribution(const MarkovNoiseChain& chain) {
  return stationary_of_kernel(chain.T);
}

MixingProfile mixing_time(const MarkovNoiseChain& chain, double epsilon, DeviationMode mode) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("mixing_time: epsilon must be in (0, 1)");
  const Eigen::VectorXd& pi = chain.pi;
  Eigen::MatrixXd power = chain.T;
  const std::int64_t cap = 10000000;
  for (std::int64_t t = 1; t <= cap; ++t) {
    const double dev = kernel_deviation(power, pi, mode);
    if (dev <= epsilon) return MixingProfile{epsilon, t, dev};
    power = power * chain.T;
  }
  throw NumericalError("mixing_time: deviation still above epsilon after 1e7 steps; "
                       "chain is mixing too slowly or not at all");
}

MixingProfile two_state_mixing_time_closed_form(double p, double epsilon, DeviationMode mode) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("closed-form mixing time: p must be in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("closed-form mixing time: epsilon must be in (0, 1)");
  const double r = std::abs(2.0 * p - 1.0);
  const double scale = (mode == DeviationMode::Absolute) ? 0.5 : 1.0;
  auto deviation = [&](std::int64_t t) { return scale * std::pow(r, static_cast<double>(t)); };
  if (r == 0.0) return MixingProfile{epsilon, 1, 0.0};
  std::int64_t t = static_cast<std::int64_t>(
      std::ceil(std::log(epsilon / scale) / std::log(r)));
  if (t < 1) t = 1;
  // The log formula can land one off at representation boundaries; settle it
  // with the same comparison the powering route performs.
  while (t > 1 && deviation(t - 1) <= epsilon) --t;
  while (deviation(t) > epsilon) ++t;
  return MixingProfile{epsilon, t, deviation(t)};
}

double p_for_mixing_time(std::int64_t tau, double epsilon, DeviationMode mode) {
  if (tau < 1) throw ParameterError("p_for_mixing_time: tau must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("p_for_mixing_time: epsilon must be in (0, 1)");
  if (tau == 1) return 0.5;
  const double scale = (mode == DeviationMode::Absolute) ? 0.5 : 1.0;
  // Target the middle of the exponent interval (tau - 1, tau] so rounding
  // cannot push the ceiling across an integer boundary.
  const double r = std::exp(std::log(epsilon / scale) / (static_cast<double>(tau) - 0.5));
  const double p = 0.5 * (1.0 + r);
  if (two_state_mixing_time_closed_form(p, epsilon, mode).tau_mix != tau)
    throw NumericalError("p_for_mixing_time: inversion failed for tau = " + std::to_string(tau));
  return p;
}

int sample_categorical(const Eigen::VectorXd& weights, RngStream& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    acc += weights(i);
    if (u < acc) return i;
  }
  return n - 1;
}

std::vector<int> sample_trajectory(const MarkovNoiseChain& chain, std::int64_t length,
                                   std::uint64_t seed) {
  if (length < 1) throw ParameterError("sample_trajectory: length must be >= 1");
  RngStream rng(seed);
  std::vector<int> states(static_cast<std::size_t>(length));
  states[0] = (chain.start == ChainStart::Stationary) ? sample_categorical(chain.pi, rng)
                                                      : chain.initial_state;
  for (std::int64_t t = 1; t < length; ++t)
    states[static_cast<std::size_t>(t)] =
        sample_categorical(chain.T.row(states[static_cast<std::size_t>(t - 1)]), rng);
  return states;
}

Eigen::VectorXd sample_noise(const NoiseDistribution& dist, int dim, RngStream& rng) {
  if (dim < 1) throw ParameterError("sample_noise: dim must be >= 1");
  Eigen::VectorXd out(dim);
  switch (dist.kind) {
    case NoiseKind::Constant:
      out.setConstant(dist.mean);
      break;
    case NoiseKind::Gaussian: {
      if (dist.sigma == 0.0) {
        out.setConstant(dist.mean);
        break;
      }
      std::normal_distribution<double> gauss(dist.mean, dist.sigma);
      for (int i = 0; i < dim; ++i) out(i) = gauss(rng);
      break;
    }
    case NoiseKind::TruncatedGaussian: {
      if (dist.sigma == 0.0) {
        out.setConstant(dist.mean);
        break;
      }
      std::normal_distribution<double> gauss(dist.mean, dist.sigma);
      const double lo = dist.mean - dist.bound;
      const double hi = dist.mean + dist.bound;
      for (int i = 0; i < dim; ++i) {
        double x = gauss(rng);
        int attempts = 0;
        while (x < lo || x > hi) {
          if (++attempts > 100000)
            throw NumericalError("truncated gaussian: acceptance region too small");
          x = gauss(rng);
        }
        out(i) = x;
      }
      break;
    }
  }
  return out;
}

}  // namespace markvi
