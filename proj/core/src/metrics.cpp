#include "markvi/metrics.hpp"

#include <cmath>

#include "markvi/errors.hpp"
#include "markvi/textio.hpp"

namespace markvi {

std::string to_text(const LemmaReport& report) {
  std::string out;
  for (const LemmaViolation& v : report.violations) {
    out += "step=" + std::to_string(v.step) + " lhs=" + format_double(v.lhs) +
           " rhs=" + format_double(v.rhs) + " slack=" + format_double(v.slack) + "\n";
  }
  return out;
}

PlateauEstimate plateau(const RunTrace& trace, std::int64_t window) {
  const std::int64_t t = trace.steps();
  if (window < 1) throw ParameterError("plateau: window must be >= 1");
  if (window > t / 2)
    throw ParameterError("plateau: window " + std::to_string(window) + " exceeds T/2 = " +
                         std::to_string(t / 2));
  const auto& sq = trace.sq_distances;
  const std::size_t n = sq.size();
  const auto w = static_cast<std::size_t>(window);
  double mean = 0.0;
  for (std::size_t i = n - w; i < n; ++i) mean += sq[i];
  mean /= static_cast<double>(w);
  double var = 0.0;
  for (std::size_t i = n - w; i < n; ++i) var += (sq[i] - mean) * (sq[i] - mean);
  const double stderr_ = (w > 1) ? std::sqrt(var / static_cast<double>(w - 1)) /
                                       std::sqrt(static_cast<double>(w))
                                 : 0.0;
  return PlateauEstimate{window, mean, stderr_};
}

double run_variance(const RunTrace& trace, std::int64_t burn_in) {
  if (!trace.has_iterates())
    throw NumericalError("run_variance: trace stored distances only; iterates are required");
  const std::int64_t t = trace.steps();
  if (burn_in < 0 || burn_in >= t)
    throw ParameterError("run_variance: burn_in must lie in [0, T)");
  const auto first = static_cast<std::size_t>(burn_in + 1);  // t ranges over (burn_in, T]
  const std::size_t last = trace.iterates.size();
  const double n = static_cast<double>(last - first);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(trace.iterates.front().size());
  for (std::size_t i = first; i < last; ++i) mean += trace.iterates[i];
  mean /= n;
  double acc = 0.0;
  for (std::size_t i = first; i < last; ++i) acc += (trace.iterates[i] - mean).squaredNorm();
  return acc / n;
}

VarianceStatistic sample_variance(std::span<const RunTrace> traces, std::int64_t burn_in) {
  if (traces.empty()) throw ParameterError("sample_variance: need at least one trace");
  const std::int64_t t = traces.front().steps();
  VarianceStatistic stat;
  stat.K = static_cast<std::int64_t>(traces.size());
  stat.per_run_variance.reserve(traces.size());
  for (const RunTrace& trace : traces) {
    if (trace.steps() != t)
      throw ParameterError("sample_variance: traces have mismatched lengths");
    stat.per_run_variance.push_back(run_variance(trace, burn_in));
  }
  for (double v : stat.per_run_variance) stat.mean_variance += v;
  stat.mean_variance /= static_cast<double>(stat.per_run_variance.size());
  return stat;
}

LemmaReport check_lemma1(const RunTrace& trace, double L, double mu) {
  if (!trace.has_lemma_data())
    throw NumericalError("check_lemma1: trace lacks lemma data (run with record_lemma_data)");
  const double gamma = trace.gamma;
  const std::int64_t t_max = trace.steps();
  LemmaReport report;
  for (std::int64_t t = 0; t < t_max; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Eigen::VectorXd& z_t = trace.iterates[i];
    const Eigen::VectorXd& z_half = trace.half_iterates[i];
    const double half_dist_sq = (z_half - trace.z_star).squaredNorm();
    const double step_sq = (z_t - z_half).squaredNorm();
    const double cross = trace.optimum_noise[i].dot(z_half - trace.z_star);
    const double lhs = trace.sq_distances[i + 1];
    const double rhs = trace.sq_distances[i] - 2.0 * gamma * mu * half_dist_sq -
                       2.0 * gamma * cross + (gamma * gamma * L * L - 1.0) * step_sq;
    const double tol = 1e-9 * std::max(1.0, trace.sq_distances[i]);
    ++report.checked;
    if (lhs > rhs + tol)
      report.violations.push_back(LemmaViolation{t, lhs, rhs, lhs - rhs});
  }
  return report;
}

LemmaReport check_lemma2(const RunTrace& trace, double L, double gamma, std::int64_t tau) {
  if (!trace.has_iterates() || trace.half_iterates.empty())
    throw NumericalError("check_lemma2: trace lacks stored iterates/half-iterates");
  if (tau < 0) throw ParameterError("check_lemma2: tau must be >= 0");
  const std::int64_t t_max = trace.steps();
  if (tau >= t_max)
    throw ParameterError("check_lemma2: trace of length " + std::to_string(t_max) +
                         " is too short for tau = " + std::to_string(tau));
  const double factor = 1.0 + gamma * L;
  LemmaReport report;
  for (std::int64_t t = tau; t < t_max; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double lhs = (trace.half_iterates[i] - trace.half_iterates[i - static_cast<std::size_t>(tau)]).norm();
    double rhs = 0.0;
    for (std::int64_t k = 0; k <= tau; ++k) {
      const auto j = static_cast<std::size_t>(t - k);
      rhs += factor * (trace.half_iterates[j] - trace.iterates[j]).norm();
    }
    const double tol = 1e-9 * std::max(1.0, rhs);
    ++report.checked;
    if (lhs > rhs + tol)
      report.violations.push_back(LemmaViolation{t, lhs, rhs, lhs - rhs});
  }
  return report;
}

}  // namespace markvi
