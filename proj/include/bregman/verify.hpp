#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bregman/linalg.hpp"
#include "bregman/regularisers.hpp"
#include "bregman/source_lab.hpp"
#include "bregman/tikhonov.hpp"

// Seeded property suites behind the `verify` subcommand.

namespace bregman::verify {

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string detail;

  bool ok() const noexcept { return total > 0 && passed == total; }
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline Vector random_vector(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(gen);
  return x;
}

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index m, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(gen);
  return a;
}

/// Random operator up to max_dim x max_dim; one in four is made rank deficient.
inline SpectralOperator random_operator(std::mt19937_64& gen, Eigen::Index max_dim) {
  std::uniform_int_distribution<Eigen::Index> dim(1, max_dim);
  const Eigen::Index m = dim(gen);
  const Eigen::Index n = dim(gen);
  Matrix a = random_matrix(gen, m, n);
  if (std::uniform_int_distribution<int>(0, 3)(gen) == 0 && std::min(m, n) > 1) {
    const Eigen::Index r = std::uniform_int_distribution<Eigen::Index>(1, std::min(m, n) - 1)(gen);
    a = random_matrix(gen, m, r) * random_matrix(gen, r, n);
  }
  return SpectralOperator(std::move(a));
}

inline RegulariserSpec random_spec(std::mt19937_64& gen, bool include_tv) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int pick = std::uniform_int_distribution<int>(0, include_tv ? 4 : 3)(gen);
  switch (pick) {
    case 0: return quadratic();
    case 1: return power_sum(1.05 + 0.9 * unit(gen), 0.2 + 2.0 * unit(gen));
    case 2: return power_sum_high(2.1 + 3.0 * unit(gen), 0.2 + 2.0 * unit(gen));
    case 3: return huber(0.2 + 2.0 * unit(gen));
    default: return total_variation();
  }
}

}  // namespace detail

/// ||(F*F)^nu u|| <= ||Fu||^{2nu} ||u||^{1-2nu} and its dual pairing form.
inline SuiteResult interpolation(int cases = 1000, std::uint64_t seed = 20240501) {
  SuiteResult res{"interpolation", 0, cases, {}};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> nu_dist(0.0, 0.5);
  double worst = -1.0;
  for (int c = 0; c < cases; ++c) {
    const SpectralOperator op = detail::random_operator(gen, 20);
    const Vector u = detail::random_vector(gen, op.cols());
    const Vector omega = detail::random_vector(gen, op.cols());
    const double nu = nu_dist(gen);

    const double fu = apply(op, u).norm();
    const double rhs = std::pow(fu, 2.0 * nu) * std::pow(u.norm(), 1.0 - 2.0 * nu);
    const double lhs = fractional_gram_apply(op, nu, u).norm();
    const Vector xi = fractional_gram_apply(op, nu, omega);
    const double pairing = xi.dot(u);
    const double pairing_bound = omega.norm() * rhs;

    const bool ok = lhs <= rhs * (1.0 + 1e-9) && pairing <= pairing_bound * (1.0 + 1e-9) + 1e-300;
    if (ok) ++res.passed;
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
  }
  res.detail = "max ratio lhs/rhs = " + detail::sci(worst);
  return res;
}

/// Prox optimality: (u - w)/tau lies in dR(w).
inline SuiteResult prox(int cases = 1000, std::uint64_t seed = 20240502) {
  SuiteResult res{"prox", 0, cases, {}};
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<Eigen::Index> dim(1, 30);
  std::uniform_real_distribution<double> log_tau(-3.0, 1.0);
  for (int c = 0; c < cases; ++c) {
    const RegulariserSpec spec = detail::random_spec(gen, true);
    const Vector u = detail::random_vector(gen, dim(gen), 2.0);
    const double tau = std::pow(10.0, log_tau(gen));
    const Vector w = bregman::prox(spec, u, tau);
    const Vector g = (u - w) / tau;
    bool ok = true;
    if (is_single_valued(spec)) {
      ok = (subgradient(spec, w) - g).norm() <= 1e-8 * (1.0 + g.norm());
    } else {
      const double rw = value(spec, w);
      for (int k = 0; k < 20 && ok; ++k) {
        const Vector z = w + detail::random_vector(gen, w.size(), k < 10 ? 1.0 : 1e-3);
        ok = rw + g.dot(z - w) <= value(spec, z) + 1e-8;
      }
    }
    if (ok) ++res.passed;
  }
  return res;
}

/**
 * Solver certificates on random small problems: xi from the dual
 * certificate matches dR(u), and T_alpha(u) is below T_alpha at random
 * reference points.
 */
inline SuiteResult kkt(int cases = 60, std::uint64_t seed = 20240503) {
  SuiteResult res{"kkt", 0, cases, {}};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> log_alpha(-3.0, 0.0);
  SolveOptions opts;
  opts.max_iterations = 50000;
  int limits = 0;
  for (int c = 0; c < cases; ++c) {
    const SpectralOperator op = detail::random_operator(gen, 12);
    const RegulariserSpec spec = detail::random_spec(gen, true);
    const Vector v = detail::random_vector(gen, op.rows());
    const double alpha = std::pow(10.0, log_alpha(gen));
    const SolveResult sol = solve(op, v, alpha, spec, opts);
    if (!sol.converged()) {
      ++limits;
      continue;
    }
    bool ok = sol.kkt_residual <= opts.kkt_tolerance * alpha * (1.0 + sol.xi.norm());
    if (is_single_valued(spec)) {
      ok = ok && (sol.xi - subgradient(spec, sol.u)).norm() <= 10.0 * opts.kkt_tolerance * (1.0 + sol.xi.norm());
    }
    for (int k = 0; k < 5 && ok; ++k) {
      const Vector ref = detail::random_vector(gen, op.cols());
      ok = sol.objective <= objective(op, v, alpha, spec, ref) + 1e-9;
    }
    if (ok) ++res.passed;
  }
  if (limits > 0) res.detail = std::to_string(limits) + " solve(s) hit the iteration limit";
  return res;
}

/// <rho(a) - rho(b), a - b> >= ||rho(a) - rho(b)||^2 for the Huber gradient.
inline SuiteResult coconvexity(int cases = 1000, std::uint64_t seed = 20240504) {
  SuiteResult res{"coconvexity", 0, cases, {}};
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<Eigen::Index> dim(1, 20);
  std::uniform_real_distribution<double> gamma_dist(0.1, 3.0);
  for (int c = 0; c < cases; ++c) {
    const double gamma = c % 2 == 0 ? 1.0 : gamma_dist(gen);
    const RegulariserSpec spec = huber(gamma);
    const Eigen::Index n = dim(gen);
    const Vector a = detail::random_vector(gen, n, 2.0 * gamma);
    const Vector b = detail::random_vector(gen, n, 2.0 * gamma);
    const Vector xa = subgradient(spec, a);
    const Vector xb = subgradient(spec, b);
    const double sym = sym_bregman(xa, xb, a, b);
    const double gap = (xa - xb).squaredNorm();
    if (sym >= gap - 1e-12 * (1.0 + gap)) ++res.passed;
  }
  return res;
}

/**
 * Builds a subgradient of TV at the step (0,...,0,1,...,1) through the prox
 * optimality map and checks D_xi(2u, u) = 0, so no lower bound
 * C ||2u - u||^p can hold.
 */
inline SuiteResult tv_witness(Eigen::Index n = 40, double tau = 0.7) {
  SuiteResult res{"tv-witness", 0, 1, {}};
  const RegulariserSpec spec = total_variation();
  const Eigen::Index jump = n / 2;
  Vector step = Vector::Zero(n);
  step.tail(n - jump).setOnes();

  // z in [-1, 1]^(n-1) with z = 1 on the jump; D^T z is a TV subgradient at step.
  Vector z(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    const double dist = std::abs(static_cast<double>(i - (jump - 1)));
    z(i) = 1.0 - dist / static_cast<double>(n);
  }
  Vector seed_subgradient = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    seed_subgradient(i) -= z(i);
    seed_subgradient(i + 1) += z(i);
  }
  const Vector y = step + tau * seed_subgradient;
  const Vector u = bregman::prox(spec, y, tau);
  const Vector xi = (y - u) / tau;
  const double d = bregman(spec, 2.0 * u, u, xi);
  const double dist = (u - step).cwiseAbs().maxCoeff();
  if (std::abs(d) <= 1e-10 && dist <= 1e-10) res.passed = 1;
  res.detail = "D_xi(2u, u) = " + detail::sci(d) + ", |prox - step| = " + detail::sci(dist);
  return res;
}

inline std::vector<SuiteResult> run(const std::string& suite) {
  std::vector<SuiteResult> out;
  const bool all = suite == "all";
  if (all || suite == "interpolation") out.push_back(interpolation());
  if (all || suite == "prox") out.push_back(prox());
  if (all || suite == "kkt") out.push_back(kkt());
  if (all || suite == "coconvexity") out.push_back(coconvexity());
  if (all || suite == "tv-witness") out.push_back(tv_witness());
  return out;
}

}  // namespace bregman::verify
