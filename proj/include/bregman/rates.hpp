#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>

#include "bregman/error.hpp"
#include "bregman/regularisers.hpp"

namespace bregman {

namespace regime {

/// Plain source condition, no extra convexity.
struct Basic {};
/// R locally p-convex.
struct PConvex {
  double p;
};
/// R locally q-coconvex.
struct QCoconvex {
  double q;
};

}  // namespace regime

using Regime = std::variant<regime::Basic, regime::PConvex, regime::QCoconvex>;

enum class Measure { Bregman, SymBregman, Norm, Residual };

inline std::string to_string(Measure m) {
  switch (m) {
    case Measure::Bregman: return "bregman";
    case Measure::SymBregman: return "sym_bregman";
    case Measure::Norm: return "norm";
    case Measure::Residual: return "residual";
  }
  return "unknown";
}

inline std::string regime_name(const Regime& r) {
  return std::visit(overloaded{
                        [](const regime::Basic&) -> std::string { return "basic"; },
                        [](const regime::PConvex&) -> std::string { return "pconvex"; },
                        [](const regime::QCoconvex&) -> std::string { return "qco"; },
                    },
                    r);
}

/// alpha ~ delta^theta_alpha gives error ~ delta^rate in `measure`.
struct ExponentPair {
  double theta_alpha = 0.0;
  double rate = 0.0;
  Measure measure = Measure::Bregman;
};

inline void require_admissible(const Regime& r, double nu) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::InadmissibleNu, "inadmissible nu " + std::to_string(nu) + " for regime " +
                                               regime_name(r) + ": " + why);
  };
  std::visit(overloaded{
                 [&](const regime::Basic&) {
                   if (!(nu > 0.0 && nu <= 0.5)) fail("need 0 < nu <= 1/2");
                 },
                 [&](const regime::PConvex& s) {
                   if (!(nu > 0.0 && nu <= 0.5)) fail("need 0 < nu <= 1/2");
                   if (!(s.p >= 1.0) || !std::isfinite(s.p)) fail("need p >= 1");
                 },
                 [&](const regime::QCoconvex& s) {
                   if (!(nu >= 0.5 && nu <= 1.0)) fail("need 1/2 <= nu <= 1");
                   if (!(s.q >= 1.0) || !std::isfinite(s.q)) fail("need q >= 1");
                 },
             },
             r);
}

/**
 * Parameter-choice exponent and predicted rate for each regime.
 *
 *   Basic:        theta = 2 - 2nu,                          r = 2nu
 *   PConvex(p):   theta = (2p - 2 - 2p nu + 4nu)/(p - 1 + 2nu),  r = 2 nu p/(p - 1 + 2nu)
 *   QCoconvex(q): theta = (2 + 2nu q - 4nu)/(1 + 2nu q - 2nu),   r = 2 nu q/(1 + 2nu q - 2nu)
 *
 * The PConvex denominator is the one that balances delta^2/alpha against
 * alpha^{nu p/(p - 1 - p nu + 2nu)}. In every regime theta + r = 2.
 */
inline ExponentPair theoretical_exponents(const Regime& r, double nu) {
  require_admissible(r, nu);
  return std::visit(overloaded{
                        [&](const regime::Basic&) {
                          return ExponentPair{2.0 - 2.0 * nu, 2.0 * nu, Measure::Bregman};
                        },
                        [&](const regime::PConvex& s) {
                          const double p = s.p;
                          const double den = p - 1.0 + 2.0 * nu;
                          return ExponentPair{(2.0 * p - 2.0 - 2.0 * p * nu + 4.0 * nu) / den,
                                              2.0 * nu * p / den, Measure::Bregman};
                        },
                        [&](const regime::QCoconvex& s) {
                          const double q = s.q;
                          const double den = 1.0 + 2.0 * nu * q - 2.0 * nu;
                          return ExponentPair{(2.0 + 2.0 * nu * q - 4.0 * nu) / den,
                                              2.0 * nu * q / den, Measure::SymBregman};
                        },
                    },
                    r);
}

/// Norm rate implied by a (sym-)Bregman rate under p-convexity.
inline double norm_rate_from(const ExponentPair& pair, double p_convex) {
  if (!(p_convex >= 1.0)) {
    throw Error(ErrorKind::InvalidExponent, "p-convexity exponent must be >= 1");
  }
  return pair.rate / p_convex;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Inclusive index range into a delta grid.
struct FitWindow {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last >= first ? last - first + 1 : 0; }
};

/// Ordinary least squares of log(error) against log(delta).
inline SlopeFit fit_slope(std::span<const std::pair<double, double>> points, FitWindow window) {
  if (window.last >= points.size() || window.first > window.last) {
    throw Error(ErrorKind::InvalidConfig, "fit window outside the point list");
  }
  if (window.size() < 3) throw Error(ErrorKind::InvalidConfig, "fit needs at least 3 points");

  double sx = 0.0, sy = 0.0;
  const auto count = static_cast<double>(window.size());
  for (std::size_t i = window.first; i <= window.last; ++i) {
    const auto [delta, err] = points[i];
    if (!(err > 0.0)) {
      throw Error(ErrorKind::NonPositiveError, "error value " + std::to_string(err) + " at index " +
                                                   std::to_string(i) + " is not positive");
    }
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidConfig, "delta must be positive");
    sx += std::log(delta);
    sy += std::log(err);
  }
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = window.first; i <= window.last; ++i) {
    const double dx = std::log(points[i].first) - mx;
    const double dy = std::log(points[i].second) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidConfig, "fit needs distinct delta values");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    const double ss_res = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;
  }
  return fit;
}

/// Convenience overload fitting the whole list.
inline SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidConfig, "fit needs at least 3 points");
  return fit_slope(points, FitWindow{0, points.size() - 1});
}

}  // namespace bregman
