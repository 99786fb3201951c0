#pragma once

// Bilinear-plus-regularizer saddle problem family and its affine operator.
//
// The test family is
//   min_x max_y  x^T P y + b^T x + c^T y + (lambda/2)|x|^2 - (nu/2)|y|^2
// whose gradient-descent-ascent operator F(z) = (grad_x f; -grad_y f) is
// affine, F(z) = M z + q, with
//   M = [[lambda I, P], [-P^T, nu I]],   q = (b; -c).
// The symmetric part of M is diag(lambda I, nu I), so F is min(lambda, nu)-
// strongly monotone, and the Lipschitz constant is the largest singular
// value of M. An unconstrained strongly monotone problem has the unique
// solution M z* = -q.

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

namespace markvi {

/// Parameters of one generated saddle instance. P is built as U * S * V^T
/// with U, V random rotations and S diagonal, so its singular values land
/// in [0.1, 10] by construction; b and c are componentwise uniform on
/// [-1, 1]. Immutable after generation.
struct SaddleInstance {
  int d = 0;  // per-block dimension; the operator lives in R^{2d}
  Eigen::MatrixXd P;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double lambda = 0.0;
  double nu = 0.0;
  std::uint64_t seed = 0;
};

/// Affine operator F(z) = M z + q with certified constants. L and mu are
/// always computed from M (power iteration, cross-checked against a dense
/// decomposition for dim <= 64), never taken on faith.
struct AffineVIOperator {
  int dim = 0;  // = 2 d
  Eigen::MatrixXd M;
  Eigen::VectorXd q;
  double L = 0.0;   // largest singular value of M
  double mu = 0.0;  // smallest eigenvalue of (M + M^T)/2, > 0
};

struct Solution {
  Eigen::VectorXd z_star;
  double residual = 0.0;  // |M z* + q|, <= 1e-9 * (1 + |q|)
};

/// Deterministic per seed. Throws ParameterError for d < 1 or nonpositive
/// lambda / nu.
SaddleInstance build_saddle_instance(int d, double lambda, double nu, std::uint64_t seed);

/// Assembles M, q and fills the certified constants.
AffineVIOperator assemble_operator(const SaddleInstance& instance);

/// M z + q. Throws ParameterError on dimension mismatch.
Eigen::VectorXd evaluate(const AffineVIOperator& op, const Eigen::VectorXd& z);

/// Dense solve of M z = -q with iterative refinement. Throws NumericalError
/// if the residual contract cannot be met (signals a singular M, i.e. a
/// violated monotonicity invariant).
Solution exact_solution(const AffineVIOperator& op);

/// Largest singular value of M via power iteration on M^T M (relative
/// tolerance 1e-10, cap 1e5 iterations; dense cross-check for dim <= 64).
double lipschitz_constant(const AffineVIOperator& op);

/// Smallest eigenvalue of (M + M^T)/2 via shifted power iteration. Throws
/// NumericalError if the value is not strictly positive.
double strong_monotonicity_constant(const AffineVIOperator& op);

/// Smallest eigenvalue of the symmetric part without the positivity gate.
/// Diagnostic entry point: lets callers report *how* monotonicity fails.
double smallest_symmetric_eigenvalue(const Eigen::MatrixXd& M);

/// Spectral norm (largest singular value) of a general square matrix by
/// power iteration on A^T A. Deterministic start vector.
double spectral_norm_power_iteration(const Eigen::MatrixXd& A, double rel_tol = 1e-12,
                                     int max_iterations = 100000);

/// Instance file round trip: `key = value` lines with keys d, lambda, nu,
/// seed, P (row-major), b, c; 17 significant digits.
void save_instance(const SaddleInstance& instance, const std::filesystem::path& path);
SaddleInstance load_instance(const std::filesystem::path& path);

}  // namespace markvi
