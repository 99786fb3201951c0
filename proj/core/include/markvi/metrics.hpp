#pragma once

// Trace analytics: tail plateau of the squared-distance series, the
// K-repeat sample-variance statistic, and per-step numerical verification of
// the two descent inequalities the convergence analysis rests on.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markvi/solver.hpp"

namespace markvi {

struct PlateauEstimate {
  std::int64_t window = 0;
  double value = 0.0;   // mean of sq_distances over the final window
  double stderr_ = 0.0; // standard error of that mean
};

struct VarianceStatistic {
  std::int64_t K = 0;
  std::vector<double> per_run_variance;
  double mean_variance = 0.0;
  std::optional<double> normalized;  // ratio to a baseline cell, set by the harness
};

struct LemmaViolation {
  std::int64_t step = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs, positive beyond tolerance
};

struct LemmaReport {
  std::int64_t checked = 0;
  std::vector<LemmaViolation> violations;
  bool clean() const noexcept { return violations.empty(); }
};

/// `step=<t> lhs=<v> rhs=<v> slack=<v>` per violation, one line each.
std::string to_text(const LemmaReport& report);

/// Mean and stderr of sq_distances over the final `window` entries.
/// Requires 1 <= window <= T/2.
PlateauEstimate plateau(const RunTrace& trace, std::int64_t window);

/// Time variance of one run over t in (burn_in, T]: (1/N) sum |z_t - mean|^2
/// with N = T - burn_in. Requires stored iterates.
double run_variance(const RunTrace& trace, std::int64_t burn_in);

/// The K-repeat statistic: per-run time variances plus their mean. All
/// traces must have equal length and stored iterates.
VarianceStatistic sample_variance(std::span<const RunTrace> traces, std::int64_t burn_in);

/// Per-step check of the descent inequality
///   |z^{t+1}-z*|^2 <= |z^t-z*|^2 - 2 gamma mu |z^{t+1/2}-z*|^2
///                     - 2 gamma <F(z*,xi^t), z^{t+1/2}-z*>
///                     + (gamma^2 L^2 - 1) |z^t-z^{t+1/2}|^2
/// at tolerance 1e-9 * max(1, |z^t-z*|^2). Requires lemma data in the trace.
LemmaReport check_lemma1(const RunTrace& trace, double L, double mu);

/// Per-step check, for t in [tau, T), of
///   |z^{t+1/2} - z^{t+1/2-tau}| <= sum_{k=0}^{tau} (1 + gamma L) |z^{t+1/2-k} - z^{t-k}|
/// at relative tolerance 1e-9. Requires stored iterates and half-iterates.
LemmaReport check_lemma2(const RunTrace& trace, double L, double gamma, std::int64_t tau);

}  // namespace markvi
