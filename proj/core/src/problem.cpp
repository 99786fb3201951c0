#include "markvi/problem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "markvi/errors.hpp"
#include "markvi/textio.hpp"

namespace markvi {

namespace {

// Haar-like rotation from the QR of a Gaussian matrix. The sign fix makes Q
// unique for the given G; forcing det = +1 keeps the d = 1 case at [1] so a
// scalar P equals its singular value.
Eigen::MatrixXd random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd r_diag = qr.matrixQR().diagonal();
  for (int j = 0; j < d; ++j)
    if (r_diag(j) < 0) q.col(j) *= -1.0;
  if (q.determinant() < 0) q.col(d - 1) *= -1.0;
  return q;
}

// Deterministic unit start vector for the power iterations.
Eigen::VectorXd power_iteration_start(int n) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(n, 0);
}

// Termination for a geometrically converging Rayleigh-quotient sequence.
// The plain "change below tolerance" test stops too early when the eigengap
// is small, so the remaining error is extrapolated from the change ratio
// (for lambda_k -> lambda with ratio q, the remaining error is about
// change * q / (1 - q)). Changes at the rounding floor always count as
// converged; two consecutive hits are required either way.
class RayleighTracker {
public:
  explicit RayleighTracker(double rel_tol) : rel_tol_(rel_tol) {}

  bool converged(double lambda) {
    const double change = std::abs(lambda - lambda_prev_);
    const double scale = std::max(std::abs(lambda), std::numeric_limits<double>::min());
    bool hit = change <= 32.0 * std::numeric_limits<double>::epsilon() * scale;
    if (!hit && change_prev_ > 0.0 && change < change_prev_) {
      const double q = change / change_prev_;
      hit = change * q / (1.0 - q) <= rel_tol_ * scale;
    }
    lambda_prev_ = lambda;
    change_prev_ = change;
    quiet_ = hit ? quiet_ + 1 : 0;
    return quiet_ >= 2;
  }

private:
  double rel_tol_;
  double lambda_prev_ = 0.0;
  double change_prev_ = -1.0;
  int quiet_ = 0;
};

// Power iteration on a symmetric PSD matrix, returning the largest
// eigenvalue and its (approximate) eigenvector.
std::pair<double, Eigen::VectorXd> largest_eigenvalue_sym_psd(const Eigen::MatrixXd& s,
                                                              double rel_tol, int max_iterations) {
  const int n = static_cast<int>(s.rows());
  Eigen::VectorXd v = power_iteration_start(n);
  RayleighTracker tracker(rel_tol);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w = s * v;
    const double wnorm = w.norm();
    if (wnorm == 0.0) return {0.0, v};  // zero matrix (or v in the kernel of a rank-0 S)
    v = w / wnorm;
    const double lambda = v.dot(s * v);
    if (tracker.converged(lambda)) return {lambda, v};
  }
  throw NumericalError("power iteration did not converge within " +
                       std::to_string(max_iterations) + " iterations");
}

}  // namespace

double spectral_norm_power_iteration(const Eigen::MatrixXd& a, double rel_tol,
                                     int max_iterations) {
  if (a.rows() != a.cols()) throw ParameterError("spectral norm: matrix must be square");
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd v = power_iteration_start(n);
  RayleighTracker tracker(rel_tol);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double lambda = v.dot(w);  // Rayleigh quotient of A^T A -> sigma_max^2
    const double wnorm = w.norm();
    if (wnorm == 0.0) return 0.0;
    v = w / wnorm;
    if (tracker.converged(lambda)) return std::sqrt(std::max(lambda, 0.0));
  }
  throw NumericalError("power iteration (spectral norm) did not converge within " +
                       std::to_string(max_iterations) + " iterations");
}

SaddleInstance build_saddle_instance(int d, double lambda, double nu, std::uint64_t seed) {
  if (d < 1) throw ParameterError("build_saddle_instance: d must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("build_saddle_instance: lambda must be > 0");
  if (!(nu > 0.0)) throw ParameterError("build_saddle_instance: nu must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sv(0.1, 10.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Eigen::VectorXd sigma(d);
  for (int i = 0; i < d; ++i) sigma(i) = sv(rng);
  const Eigen::MatrixXd u = random_rotation(d, rng);
  const Eigen::MatrixXd v = random_rotation(d, rng);

  SaddleInstance inst;
  inst.d = d;
  inst.lambda = lambda;
  inst.nu = nu;
  inst.seed = seed;
  inst.P = u * sigma.asDiagonal() * v.transpose();
  inst.b.resize(d);
  inst.c.resize(d);
  for (int i = 0; i < d; ++i) inst.b(i) = unit(rng);
  for (int i = 0; i < d; ++i) inst.c(i) = unit(rng);
  return inst;
}

AffineVIOperator assemble_operator(const SaddleInstance& instance) {
  const int d = instance.d;
  if (d < 1) throw ParameterError("assemble_operator: invalid instance (d < 1)");

  AffineVIOperator op;
  op.dim = 2 * d;
  op.M.setZero(op.dim, op.dim);
  op.M.topLeftCorner(d, d) = instance.lambda * Eigen::MatrixXd::Identity(d, d);
  op.M.topRightCorner(d, d) = instance.P;
  // Second block row is -grad_y f = -P^T x - c + nu y.
  op.M.bottomLeftCorner(d, d) = -instance.P.transpose();
  op.M.bottomRightCorner(d, d) = instance.nu * Eigen::MatrixXd::Identity(d, d);
  op.q.resize(op.dim);
  op.q.head(d) = instance.b;
  op.q.tail(d) = -instance.c;
  op.L = lipschitz_constant(op);
  op.mu = strong_monotonicity_constant(op);
  return op;
}

Eigen::VectorXd evaluate(const AffineVIOperator& op, const Eigen::VectorXd& z) {
  if (z.size() != op.dim)
    throw ParameterError("evaluate: z has length " + std::to_string(z.size()) +
                         ", operator dimension is " + std::to_string(op.dim));
  return op.M * z + op.q;
}

Solution exact_solution(const AffineVIOperator& op) {
  const double q_norm = op.q.norm();
  const double tol = 1e-9 * (1.0 + q_norm);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.M);
  Eigen::VectorXd z = lu.solve(-op.q);
  double residual = (op.M * z + op.q).norm();
  for (int pass = 0; pass < 4 && residual > tol; ++pass) {
    const Eigen::VectorXd r = op.M * z + op.q;
    const Eigen::VectorXd dz = lu.solve(r);
    const Eigen::VectorXd z_new = z - dz;
    const double r_new = (op.M * z_new + op.q).norm();
    if (!(r_new < residual)) break;
    z = z_new;
    residual = r_new;
  }
  if (!std::isfinite(residual) || residual > tol)
    throw NumericalError("exact_solution: linear solve residual " + format_double(residual) +
                         " exceeds " + format_double(tol) +
                         " (singular M; monotonicity invariant violated?)");
  return Solution{std::move(z), residual};
}

double lipschitz_constant(const AffineVIOperator& op) {
  const double l = spectral_norm_power_iteration(op.M, 1e-12, 100000);
  if (op.dim <= 64) {
    const double dense = Eigen::JacobiSVD<Eigen::MatrixXd>(op.M).singularValues()(0);
    if (std::abs(l - dense) > 1e-10 * std::max(dense, 1e-300))
      throw NumericalError("lipschitz_constant: power iteration (" + format_double(l) +
                           ") disagrees with dense SVD (" + format_double(dense) + ")");
  }
  return l;
}

double smallest_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  const double bound = spectral_norm_power_iteration(s, 1e-13, 100000);
  if (bound == 0.0) return 0.0;
  const int n = static_cast<int>(s.rows());
  const Eigen::MatrixXd shifted = bound * Eigen::MatrixXd::Identity(n, n) - s;
  auto [lambda_shift, v] = largest_eigenvalue_sym_psd(shifted, 1e-13, 100000);
  (void)lambda_shift;
  // v approximates the eigenvector of the smallest eigenvalue of S; the
  // Rayleigh quotient recovers it with residual-squared accuracy.
  return v.dot(s * v) / v.squaredNorm();
}

double strong_monotonicity_constant(const AffineVIOperator& op) {
  const double mu = smallest_symmetric_eigenvalue(op.M);
  if (!(mu > 0.0))
    throw NumericalError("strong_monotonicity_constant: smallest symmetric eigenvalue " +
                         format_double(mu) + " is not positive; operator is not strongly monotone");
  return mu;
}

void save_instance(const SaddleInstance& instance, const std::filesystem::path& path) {
  std::string text;
  text += "d = " + std::to_string(instance.d) + "\n";
  text += "lambda = " + format_double(instance.lambda) + "\n";
  text += "nu = " + format_double(instance.nu) + "\n";
  text += "seed = " + std::to_string(instance.seed) + "\n";
  std::vector<double> p_flat;
  p_flat.reserve(static_cast<std::size_t>(instance.d) * instance.d);
  for (int i = 0; i < instance.d; ++i)
    for (int j = 0; j < instance.d; ++j) p_flat.push_back(instance.P(i, j));
  text += "P = " + format_doubles(p_flat) + "\n";
  text += "b = " + format_doubles(std::vector<double>(instance.b.begin(), instance.b.end())) + "\n";
  text += "c = " + format_doubles(std::vector<double>(instance.c.begin(), instance.c.end())) + "\n";
  atomic_write_file(path, text);
}

SaddleInstance load_instance(const std::filesystem::path& path) {
  const KeyValueFile kv = read_key_value_file(path);
  SaddleInstance inst;
  inst.d = static_cast<int>(parse_int(kv.get("d")));
  if (inst.d < 1) throw IoError("instance file: d must be >= 1");
  inst.lambda = parse_double(kv.get("lambda"));
  inst.nu = parse_double(kv.get("nu"));
  inst.seed = parse_uint(kv.get("seed"));
  const std::vector<double> p_flat = parse_double_list(kv.get("P"));
  const std::vector<double> b = parse_double_list(kv.get("b"));
  const std::vector<double> c = parse_double_list(kv.get("c"));
  const std::size_t d = static_cast<std::size_t>(inst.d);
  if (p_flat.size() != d * d) throw IoError("instance file: P must hold d*d values");
  if (b.size() != d || c.size() != d) throw IoError("instance file: b and c must hold d values");
  inst.P.resize(inst.d, inst.d);
  for (int i = 0; i < inst.d; ++i)
    for (int j = 0; j < inst.d; ++j) inst.P(i, j) = p_flat[static_cast<std::size_t>(i) * d + j];
  inst.b = Eigen::Map<const Eigen::VectorXd>(b.data(), inst.d);
  inst.c = Eigen::Map<const Eigen::VectorXd>(c.data(), inst.d);
  return inst;
}

}  // namespace markvi
