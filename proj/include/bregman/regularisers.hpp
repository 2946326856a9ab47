#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "bregman/error.hpp"
#include "bregman/linalg.hpp"
#include "bregman/tv_denoise.hpp"

namespace bregman {

namespace reg {

/// R(u) = 1/2 ||u||^2
struct Quadratic {};

/// R(u) = (h/p) sum |u_i|^p with 1 < p < 2 (sequence-space power penalty).
struct PowerSum {
  double p;
  double weight = 1.0;
};

/// R(u) = (h/p) sum |u_i|^p with p > 2; h plays the role of a quadrature weight.
struct PowerSumHigh {
  double p;
  double weight;
};

/// R(u) = sum |u_{i+1} - u_i|
struct TotalVariation1D {};

/// R(u) = sum phi(u_i), phi(t) = t^2/2 for |t| <= gamma, gamma |t| - gamma^2/2 beyond.
struct Huber {
  double gamma = 1.0;
};

}  // namespace reg

using RegulariserSpec =
    std::variant<reg::Quadratic, reg::PowerSum, reg::PowerSumHigh, reg::TotalVariation1D, reg::Huber>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline RegulariserSpec quadratic() { return reg::Quadratic{}; }

inline RegulariserSpec power_sum(double p, double weight = 1.0) {
  if (!(p > 1.0 && p < 2.0)) {
    throw Error(ErrorKind::InvalidExponent, "power_sum needs 1 < p < 2, got " + std::to_string(p));
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorKind::InvalidExponent, "power_sum weight must be positive");
  }
  return reg::PowerSum{p, weight};
}

inline RegulariserSpec power_sum_high(double p, double weight) {
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::InvalidExponent, "power_sum_high needs p > 2, got " + std::to_string(p));
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorKind::InvalidExponent, "power_sum_high weight must be positive");
  }
  return reg::PowerSumHigh{p, weight};
}

/// L^p penalty on a uniform grid of n cells (weight 1/n).
inline RegulariserSpec lp_quadrature(double p, Eigen::Index n) {
  return power_sum_high(p, 1.0 / static_cast<double>(n));
}

inline RegulariserSpec total_variation() { return reg::TotalVariation1D{}; }

inline RegulariserSpec huber(double gamma = 1.0) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidExponent, "huber threshold must be positive");
  }
  return reg::Huber{gamma};
}

inline std::string name(const RegulariserSpec& spec) {
  return std::visit(overloaded{
                        [](const reg::Quadratic&) -> std::string { return "quadratic"; },
                        [](const reg::PowerSum&) -> std::string { return "power_sum"; },
                        [](const reg::PowerSumHigh&) -> std::string { return "power_sum_high"; },
                        [](const reg::TotalVariation1D&) -> std::string { return "total_variation"; },
                        [](const reg::Huber&) -> std::string { return "huber"; },
                    },
                    spec);
}

inline bool is_quadratic(const RegulariserSpec& spec) {
  return std::holds_alternative<reg::Quadratic>(spec);
}

inline bool is_single_valued(const RegulariserSpec& spec) {
  return !std::holds_alternative<reg::TotalVariation1D>(spec);
}

struct ConvexityProfile {
  std::optional<double> p_convex;
  std::optional<double> q_coconvex;
};

inline ConvexityProfile convexity_profile(const RegulariserSpec& spec) {
  return std::visit(
      overloaded{
          [](const reg::Quadratic&) { return ConvexityProfile{2.0, 2.0}; },
          [](const reg::PowerSum& s) { return ConvexityProfile{2.0, s.p / (s.p - 1.0)}; },
          [](const reg::PowerSumHigh& s) { return ConvexityProfile{s.p, 2.0}; },
          [](const reg::TotalVariation1D&) { return ConvexityProfile{}; },
          [](const reg::Huber&) { return ConvexityProfile{std::nullopt, 2.0}; },
      },
      spec);
}

namespace scalar {

inline double huber_phi(double t, double gamma) {
  const double a = std::abs(t);
  return a <= gamma ? 0.5 * t * t : gamma * a - 0.5 * gamma * gamma;
}

inline double huber_rho(double t, double gamma) { return std::clamp(t, -gamma, gamma); }

inline double power_derivative(double t, double p, double weight) {
  if (t == 0.0) return 0.0;
  return weight * std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

/**
 * Solves w + c sign(w)|w|^{p-1} = u for w with c > 0.
 *
 * The left side is strictly increasing, the root shares the sign of u and
 * |w| <= |u|. Newton on the magnitude, falling back to bisection whenever
 * a step leaves the current bracket.
 */
inline double power_prox(double u, double p, double c) {
  if (u == 0.0) return 0.0;
  const double target = std::abs(u);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto residual = [&](double t) { return t + c * std::pow(t, p - 1.0) - target; };

  double lo = 0.0;
  double hi = target;
  // Starting point: the smaller of the two one-term approximations.
  double t = std::min(target, std::pow(target / c, 1.0 / (p - 1.0)));
  if (!(t > 0.0) || !std::isfinite(t)) t = 0.5 * target;

  // Iterate to full double precision; the solver's stationarity test is
  // relative to alpha and cannot absorb a coarser inner solve.
  for (int iter = 0; iter < 300; ++iter) {
    const double g = residual(t);
    if (g == 0.0) break;
    if (g > 0.0) hi = t;
    else lo = t;
    const double dg = 1.0 + c * (p - 1.0) * std::pow(t, p - 2.0);
    double next = t - g / dg;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const bool stalled = std::abs(next - t) <= 2.0 * eps * t;
    t = next;
    if (stalled || hi - lo <= 2.0 * eps * hi) break;
  }
  return std::copysign(t, u);
}

}  // namespace scalar

inline double value(const RegulariserSpec& spec, const Vector& u) {
  return std::visit(
      overloaded{
          [&](const reg::Quadratic&) { return 0.5 * u.squaredNorm(); },
          [&](const reg::PowerSum& s) { return s.weight / s.p * u.array().abs().pow(s.p).sum(); },
          [&](const reg::PowerSumHigh& s) {
            return s.weight / s.p * u.array().abs().pow(s.p).sum();
          },
          [&](const reg::TotalVariation1D&) {
            if (u.size() < 2) return 0.0;
            return (u.tail(u.size() - 1) - u.head(u.size() - 1)).cwiseAbs().sum();
          },
          [&](const reg::Huber& s) {
            double total = 0.0;
            for (Eigen::Index i = 0; i < u.size(); ++i) total += scalar::huber_phi(u(i), s.gamma);
            return total;
          },
      },
      spec);
}

/// argmin_w 1/2 ||w - u||^2 + tau R(w)
inline Vector prox(const RegulariserSpec& spec, const Vector& u, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidAlpha, "prox step must be positive");
  return std::visit(
      overloaded{
          [&](const reg::Quadratic&) -> Vector { return u / (1.0 + tau); },
          [&](const reg::PowerSum& s) -> Vector {
            return u.unaryExpr([&](double x) { return scalar::power_prox(x, s.p, tau * s.weight); });
          },
          [&](const reg::PowerSumHigh& s) -> Vector {
            return u.unaryExpr([&](double x) { return scalar::power_prox(x, s.p, tau * s.weight); });
          },
          [&](const reg::TotalVariation1D&) -> Vector { return tv_denoise_1d(u, tau); },
          [&](const reg::Huber& s) -> Vector {
            return u.unaryExpr([&](double x) {
              if (std::abs(x) <= s.gamma * (1.0 + tau)) return x / (1.0 + tau);
              return x - std::copysign(tau * s.gamma, x);
            });
          },
      },
      spec);
}

inline Vector subgradient(const RegulariserSpec& spec, const Vector& u) {
  return std::visit(
      overloaded{
          [&](const reg::Quadratic&) -> Vector { return u; },
          [&](const reg::PowerSum& s) -> Vector {
            return u.unaryExpr([&](double x) { return scalar::power_derivative(x, s.p, s.weight); });
          },
          [&](const reg::PowerSumHigh& s) -> Vector {
            return u.unaryExpr([&](double x) { return scalar::power_derivative(x, s.p, s.weight); });
          },
          [&](const reg::TotalVariation1D&) -> Vector {
            throw Error(ErrorKind::NotSingleValued, "total variation has a set-valued subdifferential");
          },
          [&](const reg::Huber& s) -> Vector {
            return u.unaryExpr([&](double x) { return scalar::huber_rho(x, s.gamma); });
          },
      },
      spec);
}

/// Picks u with xi in dR(u). At |xi_i| = gamma the Huber branch returns u_i = xi_i.
inline Vector invert_subgradient(const RegulariserSpec& spec, const Vector& xi) {
  auto power_inverse = [&](double p, double weight) -> Vector {
    return xi.unaryExpr([&](double x) {
      if (x == 0.0) return 0.0;
      return std::copysign(std::pow(std::abs(x) / weight, 1.0 / (p - 1.0)), x);
    });
  };
  return std::visit(
      overloaded{
          [&](const reg::Quadratic&) -> Vector { return xi; },
          [&](const reg::PowerSum& s) -> Vector { return power_inverse(s.p, s.weight); },
          [&](const reg::PowerSumHigh& s) -> Vector { return power_inverse(s.p, s.weight); },
          [&](const reg::TotalVariation1D&) -> Vector {
            throw Error(ErrorKind::Unsupported, "TV source synthesis");
          },
          [&](const reg::Huber& s) -> Vector {
            const double peak = xi.size() > 0 ? xi.cwiseAbs().maxCoeff() : 0.0;
            if (peak > s.gamma) {
              throw Error(ErrorKind::OutOfDomain, "huber subgradient entries must satisfy |xi_i| <= " +
                                                      std::to_string(s.gamma) + ", max is " +
                                                      std::to_string(peak));
            }
            return xi;
          },
      },
      spec);
}

/// D_xi(u_tilde, u) = R(u_tilde) - R(u) - <xi, u_tilde - u>
inline double bregman(const RegulariserSpec& spec, const Vector& u_tilde, const Vector& u,
                      const Vector& xi) {
  require_same_size(u.size(), u_tilde.size(), "bregman");
  require_same_size(u.size(), xi.size(), "bregman");
  if (is_single_valued(spec)) {
    const Vector expected = subgradient(spec, u);
    if ((expected - xi).norm() > 1e-8 * (1.0 + expected.norm())) {
      throw Error(ErrorKind::NotASubgradient, "xi is not the subgradient of R at u");
    }
  }
  if (is_quadratic(spec)) return 0.5 * (u_tilde - u).squaredNorm();
  return value(spec, u_tilde) - value(spec, u) - xi.dot(u_tilde - u);
}

/// <xi - xi_tilde, u - u_tilde>
inline double sym_bregman(const Vector& xi, const Vector& xi_tilde, const Vector& u,
                          const Vector& u_tilde) {
  require_same_size(xi.size(), xi_tilde.size(), "sym_bregman");
  require_same_size(xi.size(), u.size(), "sym_bregman");
  require_same_size(xi.size(), u_tilde.size(), "sym_bregman");
  return (xi - xi_tilde).dot(u - u_tilde);
}

}  // namespace bregman
