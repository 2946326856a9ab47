#include <gtest/gtest.h>

#include <random>

#include "bregman/source_lab.hpp"
#include "bregman/tikhonov.hpp"
#include "oracles.hpp"

using namespace bregman;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(Solve, ScalarExamples) {
  const auto quad = solve(identity_operator(1), vec({2}), 1.0, quadratic());
  ASSERT_TRUE(quad.converged());
  EXPECT_NEAR(quad.u(0), 1.0, 1e-9);

  const auto hub = solve(diagonal_operator(vec({1})), vec({4}), 1.0, huber(1.0));
  ASSERT_TRUE(hub.converged());
  EXPECT_NEAR(hub.u(0), 3.0, 1e-9);
}

TEST(Solve, RejectsBadArguments) {
  EXPECT_THROW(solve(identity_operator(1), vec({2}), 0.0, quadratic()), Error);
  EXPECT_THROW(solve(identity_operator(1), vec({2}), -1.0, quadratic()), Error);
  EXPECT_THROW(solve(identity_operator(2), vec({2}), 1.0, quadratic()), Error);
  SolveOptions bad;
  bad.step_scale = 1.5;
  EXPECT_THROW(solve(identity_operator(1), vec({2}), 1.0, quadratic(), bad), Error);
}

TEST(Solve, MatchesNormalEquations) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> log_alpha(-2.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    const Matrix a = oracle::gaussian(gen, 10, 10);
    const auto op = factorize(a);
    const Vector v = oracle::gaussian(gen, 10);
    const double alpha = std::pow(10.0, log_alpha(gen));
    const Vector ref = oracle::normal_equations(a, v, alpha);
    const auto sol = solve(op, v, alpha, quadratic());
    ASSERT_TRUE(sol.converged()) << "case " << c;
    EXPECT_LE((sol.u - ref).norm(), 1e-6) << "case " << c;
    EXPECT_LE((direct_quadratic_solve(op, v, alpha) - ref).norm(), 1e-10 * (1.0 + ref.norm()));
  }
}

TEST(Solve, IterationLimitReturnsBestIterate) {
  std::mt19937_64 gen(32);
  const auto op = factorize(oracle::gaussian(gen, 20, 20));
  const Vector v = oracle::gaussian(gen, 20);
  SolveOptions opts;
  opts.max_iterations = 3;
  const auto sol = solve(op, v, 1e-4, power_sum(1.3), opts);
  EXPECT_EQ(sol.status, SolveStatus::IterationLimit);
  EXPECT_FALSE(sol.converged());
  EXPECT_EQ(sol.iterations, 3);
  EXPECT_TRUE(sol.u.allFinite());
  EXPECT_NEAR(sol.kkt_residual, kkt_residual(op, v, 1e-4, power_sum(1.3), sol.u), 1e-12 * (1.0 + sol.kkt_residual));
}

TEST(Solve, TotalVariationStationarity) {
  std::mt19937_64 gen(33);
  const auto op = preset_operator(preset::Integration{30});
  Vector v = apply(op, Vector::Ones(30)) + 0.01 * oracle::gaussian(gen, 30);
  const double alpha = 1e-3;
  const auto sol = solve(op, v, alpha, total_variation());
  ASSERT_TRUE(sol.converged());
  // xi = F* omega must be a TV subgradient at u: prox of u + tau xi returns u.
  const double tau = 0.37;
  EXPECT_LE((prox(total_variation(), sol.u + tau * sol.xi, tau) - sol.u).norm(), 1e-6 * (1.0 + sol.u.norm()));
}

TEST(DirectSolve, Examples) {
  EXPECT_NEAR(direct_quadratic_solve(identity_operator(1), vec({2}), 1.0)(0), 1.0, 1e-15);
  EXPECT_NEAR(direct_quadratic_solve(diagonal_operator(vec({2})), vec({2}), 2.0)(0), 2.0 / 3.0, 1e-15);
  std::mt19937_64 gen(34);
  const Matrix a = oracle::gaussian(gen, 8, 6);
  const Vector v = oracle::gaussian(gen, 8);
  const Vector u = direct_quadratic_solve(factorize(a), v, 0.3);
  EXPECT_LE((a.transpose() * (a * u - v) + 0.3 * u).norm(), 1e-10);
}

TEST(DualCertificate, Examples) {
  const auto zero = dual_certificate(identity_operator(2), vec({1, 2}), 0.5, vec({1, 2}));
  EXPECT_EQ(zero.omega.norm(), 0.0);
  EXPECT_EQ(zero.xi.norm(), 0.0);
  const auto one = dual_certificate(identity_operator(1), vec({2}), 1.0, vec({1}));
  EXPECT_DOUBLE_EQ(one.omega(0), 1.0);
  EXPECT_DOUBLE_EQ(one.xi(0), 1.0);

  std::mt19937_64 gen(35);
  const auto op = factorize(oracle::gaussian(gen, 7, 5));
  const Vector v = oracle::gaussian(gen, 7);
  const auto sol = solve(op, v, 0.05, quadratic());
  EXPECT_LE((sol.xi - sol.u).norm(), 1e-8);
}

TEST(Objective, Examples) {
  for (const auto& spec : {quadratic(), power_sum(1.5), huber(), total_variation()}) {
    EXPECT_EQ(objective(identity_operator(3), Vector::Zero(3), 0.7, spec, Vector::Zero(3)), 0.0);
  }
  EXPECT_DOUBLE_EQ(objective(identity_operator(1), vec({2}), 1.0, quadratic(), vec({1})), 1.0);
}

TEST(Objective, MinimizerInequality) {
  std::mt19937_64 gen(36);
  const auto op = preset_operator(preset::DiagonalDecay{40, 1.0});
  for (const auto& spec : {quadratic(), power_sum(1.5), huber(), power_sum_high(3.0, 1.0 / 40)}) {
    const auto inst = synthesize(op, spec, 0.4, default_omega(40));
    for (double delta : {1e-2, 1e-3}) {
      const auto data = add_noise(inst.v_dagger, delta, 5);
      const double alpha = delta;
      const auto sol = solve(op, data.v_delta, alpha, spec);
      ASSERT_TRUE(sol.converged());
      const double bound = 0.5 * delta * delta + alpha * value(spec, inst.u_dagger);
      EXPECT_LE(sol.objective, objective(op, data.v_delta, alpha, spec, inst.u_dagger) + 1e-9);
      EXPECT_LE(sol.objective, bound + 1e-9);
    }
  }
}

TEST(KktResidual, VanishesAtMinimiser) {
  const auto op = diagonal_operator(vec({2.0, 1.0}));
  const Vector v = vec({1.0, -3.0});
  const Vector u = direct_quadratic_solve(op, v, 0.5);
  EXPECT_LE(kkt_residual(op, v, 0.5, quadratic(), u), 1e-14);
  EXPECT_GT(kkt_residual(op, v, 0.5, quadratic(), Vector::Zero(2)), 0.1);
}
