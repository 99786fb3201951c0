#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "markvi/errors.hpp"
#include "markvi/metrics.hpp"
#include "markvi/oracle.hpp"
#include "markvi/problem.hpp"
#include "markvi/solver.hpp"

using namespace markvi;

namespace {

const NoiseDistribution kSilent = NoiseDistribution::constant(0.0);

SaddleInstance scalar_instance(double p, double b0, double c0) {
  SaddleInstance inst;
  inst.d = 1;
  inst.P = Eigen::MatrixXd::Constant(1, 1, p);
  inst.b = Eigen::VectorXd::Constant(1, b0);
  inst.c = Eigen::VectorXd::Constant(1, c0);
  inst.lambda = 1.0;
  inst.nu = 1.0;
  return inst;
}

SolverConfig base_config(const AffineVIOperator& op, double gamma, std::int64_t T,
                         std::uint64_t seed) {
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.T = T;
  cfg.z0 = Eigen::VectorXd::Zero(op.dim);
  cfg.seed = seed;
  return cfg;
}

double tail_average(const std::vector<double>& sq, std::size_t window) {
  double acc = 0.0;
  for (std::size_t i = sq.size() - window; i < sq.size(); ++i) acc += sq[i];
  return acc / static_cast<double>(window);
}

}  // namespace

TEST_CASE("extragradient step against hand-computed scalar arithmetic") {
  const AffineVIOperator op = assemble_operator(scalar_instance(1.0, 0.0, 0.0));
  const MarkovNoiseChain chain_ = two_state_chain(0.5, kSilent, kSilent);
  StochasticOracle oracle(op, chain_, OracleMode::Markov, 3);
  const StepSample s = oracle.advance();
  Eigen::VectorXd z(2);
  z << 1.0, 0.0;
  const auto [z_half, z_next] = extragradient_step(z, oracle, s, 0.25);

  // Oracle: F(x, y) = (x + y, -x + y) componentwise, done with plain scalars.
  const double f1x = 1.0 + 0.0, f1y = -1.0 + 0.0;
  const double hx = 1.0 - 0.25 * f1x, hy = 0.0 - 0.25 * f1y;
  const double f2x = hx + hy, f2y = -hx + hy;
  const double nx = 1.0 - 0.25 * f2x, ny = 0.0 - 0.25 * f2y;
  CHECK(hx == 0.75);
  CHECK(hy == 0.25);
  CHECK(nx == 0.75);
  CHECK(ny == 0.125);
  CHECK(z_half(0) == doctest::Approx(hx).epsilon(1e-15));
  CHECK(z_half(1) == doctest::Approx(hy).epsilon(1e-15));
  CHECK(z_next(0) == doctest::Approx(nx).epsilon(1e-15));
  CHECK(z_next(1) == doctest::Approx(ny).epsilon(1e-15));
}

TEST_CASE("extragradient step: the solution is a fixed point; gamma = 0 is a no-op") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(6, 1.0, 1.0, 12));
  const Solution sol = exact_solution(op);
  const MarkovNoiseChain chain_ = two_state_chain(0.5, kSilent, kSilent);
  StochasticOracle oracle(op, chain_, OracleMode::Markov, 3);

  const double gamma = 1.0 / (2.0 * op.L);
  StepSample s = oracle.advance();
  const auto [half_fp, next_fp] = extragradient_step(sol.z_star, oracle, s, gamma);
  CHECK((half_fp - sol.z_star).norm() <= gamma * sol.residual + 1e-15);
  CHECK((next_fp - sol.z_star).norm() <= 2.0 * gamma * sol.residual + 1e-15);

  Eigen::VectorXd z = Eigen::VectorXd::Constant(op.dim, 0.4);
  s = oracle.advance();
  const auto [half0, next0] = extragradient_step(z, oracle, s, 0.0);
  CHECK(half0 == z);
  CHECK(next0 == z);
}

TEST_CASE("near-stationary start moves at most 2 gamma |F(z0)|") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(5, 1.0, 1.0, 8));
  const Solution sol = exact_solution(op);
  const double gamma = 1.0 / (2.0 * op.L);
  SolverConfig cfg = base_config(op, gamma, 1, 4);
  cfg.z0 = sol.z_star + Eigen::VectorXd::Constant(op.dim, 1e-6);
  const double delta = evaluate(op, cfg.z0).norm();
  const RunTrace trace = run(op, two_state_chain(0.5, kSilent, kSilent), cfg, OracleMode::Markov);
  CHECK((trace.iterates[1] - trace.iterates[0]).norm() <= 2.0 * gamma * delta + 1e-15);
}

TEST_CASE("noiseless run: strict decrease and decay within the spec'd horizon") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(10, 1.0, 1.0, 2024));
  const double gamma = 1.0 / (2.0 * op.L);
  const auto horizon = static_cast<std::int64_t>(
      std::ceil(20.0 * (op.L / op.mu) * std::log(1e12)));
  const RunTrace trace = run(op, two_state_chain(0.5, kSilent, kSilent),
                             base_config(op, gamma, horizon, 6), OracleMode::Markov);
  const double initial = trace.sq_distances.front();
  CHECK(trace.sq_distances.back() <= 1e-12 * initial);
  for (std::size_t t = 1; t + 1 < trace.sq_distances.size(); ++t) {
    if (trace.sq_distances[t] < 1e-24 * initial) break;  // at the float floor
    CHECK(trace.sq_distances[t + 1] < trace.sq_distances[t]);
  }
}

TEST_CASE("noiseless envelope: sq distance under C (1 - mu gamma / 2)^t with C <= 10") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AffineVIOperator op = assemble_operator(build_saddle_instance(8, 0.8, 1.2, 100 + seed));
    const double gamma = 1.0 / (2.0 * op.L);
    const double rate = 1.0 - op.mu * gamma / 2.0;
    const RunTrace trace = run(op, two_state_chain(0.5, kSilent, kSilent),
                               base_config(op, gamma, 500, seed), OracleMode::Markov);
    const double initial = trace.sq_distances.front();
    double worst = 0.0;
    for (std::size_t t = 0; t < trace.sq_distances.size(); ++t)
      worst = std::max(worst,
                       trace.sq_distances[t] / (std::pow(rate, static_cast<double>(t)) * initial));
    CHECK(worst <= 10.0);
  }
}

TEST_CASE("oversized steps trigger the divergence diagnostic") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(10, 1.0, 1.0, 55));
  const double gamma = 100.0 / op.mu;
  CHECK_THROWS_AS(run(op, two_state_chain(0.5, kSilent, kSilent),
                      base_config(op, gamma, 2000, 1), OracleMode::Markov),
                  DivergenceError);
  try {
    run(op, two_state_chain(0.5, kSilent, kSilent), base_config(op, gamma, 2000, 1),
        OracleMode::Markov);
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("runs are deterministic per seed") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(6, 1.0, 1.0, 13));
  const MarkovNoiseChain chain = two_state_chain(0.8, NoiseDistribution::gaussian(0.1, 0.05),
                                                 NoiseDistribution::gaussian(-0.1, 0.05));
  const SolverConfig cfg = base_config(op, 1.0 / (2.0 * op.L), 500, 99);
  const RunTrace a = run(op, chain, cfg, OracleMode::Markov);
  const RunTrace b = run(op, chain, cfg, OracleMode::Markov);
  CHECK(a.states == b.states);
  CHECK(a.sq_distances == b.sq_distances);
  REQUIRE(a.iterates.size() == b.iterates.size());
  for (std::size_t i = 0; i < a.iterates.size(); ++i) CHECK(a.iterates[i] == b.iterates[i]);
}

TEST_CASE("trace shapes and recomputable distances") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(4, 1.0, 1.0, 3));
  const MarkovNoiseChain chain = two_state_chain(0.7, NoiseDistribution::gaussian(0.1, 0.02),
                                                 NoiseDistribution::gaussian(-0.1, 0.02));
  SolverConfig cfg = base_config(op, 1.0 / (2.0 * op.L), 64, 5);
  cfg.record_lemma_data = true;
  const RunTrace trace = run(op, chain, cfg, OracleMode::Markov);
  CHECK(trace.iterates.size() == 65);
  CHECK(trace.half_iterates.size() == 64);
  CHECK(trace.states.size() == 64);
  CHECK(trace.sq_distances.size() == 65);
  CHECK(trace.optimum_noise.size() == 64);
  for (std::size_t t = 0; t < trace.iterates.size(); ++t)
    CHECK((trace.iterates[t] - trace.z_star).squaredNorm() == trace.sq_distances[t]);
}

TEST_CASE("storage policy: large dim * T keeps only distances and states") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(1, 1.0, 1.0, 3));
  const std::int64_t T = 5000001;  // dim * T just above the 1e7 threshold
  const RunTrace trace = run(op, two_state_chain(0.5, kSilent, kSilent),
                             base_config(op, 1.0 / (2.0 * op.L), T, 5), OracleMode::Markov);
  CHECK_FALSE(trace.has_iterates());
  CHECK(trace.half_iterates.empty());
  CHECK(trace.sq_distances.size() == static_cast<std::size_t>(T) + 1);

  SolverConfig never = base_config(op, 1.0 / (2.0 * op.L), 32, 5);
  never.store_iterates = TraceStorage::Never;
  CHECK_FALSE(run(op, two_state_chain(0.5, kSilent, kSilent), never, OracleMode::Markov)
                  .has_iterates());

  SolverConfig always = base_config(op, 1.0 / (2.0 * op.L), 32, 5);
  always.store_iterates = TraceStorage::Always;
  CHECK(run(op, two_state_chain(0.5, kSilent, kSilent), always, OracleMode::Markov)
            .has_iterates());
}

TEST_CASE("step-size tuner") {
  SUBCASE("dominated by the Lipschitz bound") {
    CHECK(tune_step_size(10.0, 1.0, 1, 1000000, 1.0, 0.0) == doctest::Approx(0.05).epsilon(1e-15));
  }
  SUBCASE("sigma zero leaves the two finite bounds") {
    const double g = tune_step_size(2.0, 1.0, 3, 1000, 1.0, 0.0);
    CHECK(g == doctest::Approx(std::min(0.25, 1.0 / 12.0)).epsilon(1e-15));
  }
  SUBCASE("independent re-evaluation of the full formula") {
    const double L = 2.0, mu = 1.0, r_tau = 1.0, sigma = 0.5;
    const std::int64_t tau = 5, T = 10000;
    const double b1 = 1.0 / (2.0 * L);
    const double b2 = 1.0 / (4.0 * mu * static_cast<double>(tau));
    const double arg =
        std::max(2.0, mu * mu * r_tau * 1e8 / (112.0 * 25.0 * sigma * sigma));
    const double b3 = 2.0 * std::log(arg) / (mu * 1e4);
    const double expected = std::min(b1, std::min(b2, b3));
    CHECK(tune_step_size(L, mu, tau, T, r_tau, sigma) == doctest::Approx(expected).epsilon(1e-15));
  }
  SUBCASE("proof-level bound is stricter than the statement-level one") {
    const double proof = tune_step_size(1.0, 1.0, 10, 1000, 1.0, 0.0, StepBoundMode::Proof);
    const double statement =
        tune_step_size(1.0, 1.0, 10, 1000, 1.0, 0.0, StepBoundMode::Statement);
    CHECK(proof == doctest::Approx(1.0 / 40.0).epsilon(1e-15));
    CHECK(statement == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(tune_step_size(0.0, 1.0, 1, 1, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(tune_step_size(1.0, 1.0, 0, 1, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(tune_step_size(1.0, 1.0, 1, 1, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(tune_step_size(1.0, 1.0, 1, 1, 1.0, -1.0), ParameterError);
  }
}

TEST_CASE("halving gamma shrinks the stochastic tail average") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(4, 1.0, 1.0, 71));
  const MarkovNoiseChain chain = two_state_chain(0.8, NoiseDistribution::gaussian(0.1, 0.1),
                                                 NoiseDistribution::gaussian(-0.1, 0.1));
  const double gamma = 1.0 / (2.0 * op.L);
  const std::int64_t T = 20000;
  double tail_full = 0.0, tail_half = 0.0;
  const int K = 8;
  for (int k = 0; k < K; ++k) {
    SolverConfig cfg = base_config(op, gamma, T, 1000 + k);
    cfg.store_iterates = TraceStorage::Never;
    tail_full += tail_average(run(op, chain, cfg, OracleMode::Markov).sq_distances, T / 4);
    cfg.gamma = gamma / 2.0;
    tail_half += tail_average(run(op, chain, cfg, OracleMode::Markov).sq_distances, T / 4);
  }
  CHECK(tail_half / tail_full <= 0.85);
}

TEST_CASE("markov mode at p = 0.5 matches iid mode in tail distribution") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(4, 1.0, 1.0, 72));
  const MarkovNoiseChain chain = two_state_chain(0.5, NoiseDistribution::gaussian(0.1, 0.1),
                                                 NoiseDistribution::gaussian(-0.1, 0.1));
  const double gamma = 1.0 / (2.0 * op.L);
  const std::int64_t T = 10000;
  const int K = 14;
  std::vector<double> markov_tails, iid_tails;
  for (int k = 0; k < K; ++k) {
    SolverConfig cfg = base_config(op, gamma, T, 5000 + k);
    cfg.store_iterates = TraceStorage::Never;
    markov_tails.push_back(
        tail_average(run(op, chain, cfg, OracleMode::Markov).sq_distances, T / 4));
    cfg.seed = 6000 + static_cast<std::uint64_t>(k);
    iid_tails.push_back(tail_average(run(op, chain, cfg, OracleMode::Iid).sq_distances, T / 4));
  }
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(v.size() - 1);
    return std::pair<double, double>(m, s2);
  };
  const auto [m1, v1] = moments(markov_tails);
  const auto [m2, v2] = moments(iid_tails);
  // Two-sample t statistic; |t| < 3 keeps us comfortably above p = 0.01.
  const double t_stat =
      (m1 - m2) / std::sqrt(v1 / static_cast<double>(K) + v2 / static_cast<double>(K));
  CHECK(std::abs(t_stat) < 3.0);
}

TEST_CASE("run validates its configuration") {
  const AffineVIOperator op = assemble_operator(build_saddle_instance(3, 1.0, 1.0, 2));
  const MarkovNoiseChain chain = two_state_chain(0.5, kSilent, kSilent);
  CHECK_THROWS_AS(run(op, chain, base_config(op, 0.0, 10, 1), OracleMode::Markov),
                  ParameterError);
  CHECK_THROWS_AS(run(op, chain, base_config(op, 0.1, 0, 1), OracleMode::Markov), ParameterError);
  SolverConfig bad_dim = base_config(op, 0.1, 10, 1);
  bad_dim.z0 = Eigen::VectorXd::Zero(op.dim + 1);
  CHECK_THROWS_AS(run(op, chain, bad_dim, OracleMode::Markov), ParameterError);
}
