#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bregman/error.hpp"
#include "bregman/linalg.hpp"
#include "bregman/regularisers.hpp"

namespace bregman {

struct SolveOptions {
  int max_iterations = 20000;
  /// Relative to alpha * (1 + ||xi||).
  double kkt_tolerance = 1e-9;
  /// Fraction of the 1/L step actually taken.
  double step_scale = 1.0;
};

enum class SolveStatus { Converged, IterationLimit };

struct SolveResult {
  Vector u;
  Vector omega;
  Vector xi;
  int iterations = 0;
  double kkt_residual = 0.0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Converged;

  bool converged() const noexcept { return status == SolveStatus::Converged; }
};

struct DualCertificate {
  Vector omega;
  Vector xi;
};

inline void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidAlpha, "alpha must be positive and finite, got " + std::to_string(alpha));
  }
}

inline void validate(const SolveOptions& opts) {
  if (opts.max_iterations < 1) throw Error(ErrorKind::InvalidConfig, "max_iterations must be >= 1");
  if (!(opts.kkt_tolerance > 0.0)) throw Error(ErrorKind::InvalidConfig, "kkt_tolerance must be > 0");
  if (!(opts.step_scale > 0.0 && opts.step_scale <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "step_scale must lie in (0, 1]");
  }
}

/// T_alpha(u, v) = 1/2 ||Fu - v||^2 + alpha R(u)
inline double objective(const SpectralOperator& op, const Vector& v, double alpha,
                        const RegulariserSpec& spec, const Vector& u) {
  require_same_size(op.rows(), v.size(), "objective");
  return 0.5 * (apply(op, u) - v).squaredNorm() + alpha * value(spec, u);
}

/// omega = -(Fu - v) / alpha and xi = F* omega.
inline DualCertificate dual_certificate(const SpectralOperator& op, const Vector& v, double alpha,
                                        const Vector& u) {
  require_positive_alpha(alpha);
  require_same_size(op.rows(), v.size(), "dual_certificate");
  DualCertificate cert;
  cert.omega = -(apply(op, u) - v) / alpha;
  cert.xi = apply_adjoint(op, cert.omega);
  return cert;
}

/**
 * Scaled proximal fixed-point residual
 *   L * || u - prox_{(alpha/L) R}(u - F*(Fu - v) / L) ||,   L = ||F||^2.
 * Vanishes exactly at minimisers of T_alpha(., v).
 */
inline double kkt_residual(const SpectralOperator& op, const Vector& v, double alpha,
                           const RegulariserSpec& spec, const Vector& u) {
  require_positive_alpha(alpha);
  const double lipschitz = op.norm() * op.norm();
  if (!(lipschitz > 0.0)) throw Error(ErrorKind::InvalidOperator, "operator is zero");
  const Vector grad = apply_adjoint(op, apply(op, u) - v);
  return lipschitz * (u - prox(spec, u - grad / lipschitz, alpha / lipschitz)).norm();
}

/// Closed-form minimiser of the quadratic case, (F*F + alpha I)^{-1} F* v.
inline Vector direct_quadratic_solve(const SpectralOperator& op, const Vector& v, double alpha) {
  require_positive_alpha(alpha);
  require_same_size(op.rows(), v.size(), "direct_quadratic_solve");
  const Vector& s = op.singular_values();
  Vector coeffs = op.left().transpose() * v;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) *= s(k) / (s(k) * s(k) + alpha);
  return op.right() * coeffs;
}

namespace detail {

inline SolveResult finish(const SpectralOperator& op, const Vector& v, double alpha,
                          const RegulariserSpec& spec, Vector u, int iterations, double residual,
                          SolveStatus status) {
  SolveResult result;
  DualCertificate cert = dual_certificate(op, v, alpha, u);
  result.objective = objective(op, v, alpha, spec, u);
  result.u = std::move(u);
  result.omega = std::move(cert.omega);
  result.xi = std::move(cert.xi);
  result.iterations = iterations;
  result.kkt_residual = residual;
  result.status = status;
  return result;
}

}  // namespace detail

/**
 * Minimises 1/2 ||Fu - v||^2 + alpha R(u) by accelerated proximal gradient
 * with function-value and gradient-direction restarts, starting from u = 0
 * with step step_scale / L.
 *
 * Stops once the scaled prox fixed-point residual drops below
 * kkt_tolerance * alpha * (1 + ||xi||). When the iteration budget runs out
 * the iterate with the smallest residual is returned with
 * SolveStatus::IterationLimit.
 */
inline SolveResult solve(const SpectralOperator& op, const Vector& v, double alpha,
                         const RegulariserSpec& spec, const SolveOptions& opts = {}) {
  require_positive_alpha(alpha);
  validate(opts);
  require_same_size(op.rows(), v.size(), "solve");
  const double lipschitz = op.norm() * op.norm();
  if (!(lipschitz > 0.0)) throw Error(ErrorKind::InvalidOperator, "operator is zero");
  const double step = opts.step_scale / lipschitz;
  const Matrix& F = op.matrix();

  auto value_at = [&](const Vector& Fu, const Vector& u) {
    return 0.5 * (Fu - v).squaredNorm() + alpha * value(spec, u);
  };
  auto residual_at = [&](const Vector& u, const Vector& grad) {
    return lipschitz * (u - prox(spec, u - grad / lipschitz, alpha / lipschitz)).norm();
  };

  Vector x = Vector::Zero(op.cols());
  Vector Fx = Vector::Zero(op.rows());
  Vector gx = F.transpose() * (Fx - v);
  double fx = value_at(Fx, x);

  Vector y = x, gy = gx;
  double t = 1.0;
  bool at_restart = true;

  Vector best = x;
  double best_residual = residual_at(x, gx);
  if (best_residual <= opts.kkt_tolerance * (alpha + gx.norm())) {
    return detail::finish(op, v, alpha, spec, std::move(best), 0, best_residual, SolveStatus::Converged);
  }

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    Vector x_new = prox(spec, y - step * gy, step * alpha);
    Vector Fx_new = F * x_new;
    const double f_new = value_at(Fx_new, x_new);

    // Objective went up by more than rounding: drop the momentum and retry
    // from the current iterate.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fx);
    if (f_new > fx + slack && !at_restart) {
      t = 1.0;
      y = x;
      gy = gx;
      at_restart = true;
      continue;
    }
    // Near the tolerance the objective no longer resolves progress; the
    // momentum direction is then checked against the gradient step instead.
    const bool momentum_bad = (y - x_new).dot(x_new - x) > 0.0;

    Vector g_new = F.transpose() * (Fx_new - v);
    const double res = residual_at(x_new, g_new);
    if (res < best_residual) {
      best_residual = res;
      best = x_new;
    }
    if (res <= opts.kkt_tolerance * (alpha + g_new.norm())) {
      return detail::finish(op, v, alpha, spec, std::move(x_new), iter, res, SolveStatus::Converged);
    }

    if (momentum_bad) t = 1.0;
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_new;
    y = x_new + beta * (x_new - x);
    gy = g_new + beta * (g_new - gx);
    x = std::move(x_new);
    Fx = std::move(Fx_new);
    gx = std::move(g_new);
    fx = f_new;
    t = t_new;
    at_restart = false;
  }
  return detail::finish(op, v, alpha, spec, std::move(best), opts.max_iterations, best_residual,
                        SolveStatus::IterationLimit);
}

}  // namespace bregman
