#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "bregman/error.hpp"
#include "bregman/linalg.hpp"
#include "bregman/regularisers.hpp"

namespace bregman {

/// Bundle realising xi = (F*F)^nu omega in dR(u) with v = F u.
struct SourceInstance {
  double nu = 0.0;
  Vector omega_dagger;
  Vector xi_dagger;
  Vector u_dagger;
  Vector v_dagger;
  double omega_norm = 0.0;
};

struct NoisyData {
  Vector v_delta;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

inline SourceInstance synthesize(const SpectralOperator& op, const RegulariserSpec& spec, double nu,
                                 const Vector& omega_dagger) {
  if (std::holds_alternative<reg::TotalVariation1D>(spec)) {
    throw Error(ErrorKind::Unsupported, "TV source synthesis");
  }
  if (!(nu > 0.0 && nu <= 1.0)) {
    throw Error(ErrorKind::InvalidExponent, "source exponent must lie in (0, 1], got " + std::to_string(nu));
  }
  require_same_size(op.cols(), omega_dagger.size(), "synthesize");
  if (!all_finite(omega_dagger)) throw Error(ErrorKind::DimensionError, "omega has non-finite entries");

  SourceInstance inst;
  inst.nu = nu;
  inst.omega_dagger = omega_dagger;
  inst.omega_norm = omega_dagger.norm();
  inst.xi_dagger = fractional_gram_apply(op, nu, omega_dagger);
  inst.u_dagger = invert_subgradient(spec, inst.xi_dagger);
  inst.v_dagger = apply(op, inst.u_dagger);
  return inst;
}

/**
 * v_delta = v_dagger + delta * e / ||e|| with e standard normal drawn from a
 * generator seeded by `seed`; the noise norm equals delta up to rounding.
 */
inline NoisyData add_noise(const Vector& v_dagger, double delta, std::uint64_t seed) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidNoise, "noise level must be positive, got " + std::to_string(delta));
  }
  if (v_dagger.size() < 1) throw Error(ErrorKind::DimensionError, "empty data vector");

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector direction(v_dagger.size());
  do {
    for (Eigen::Index i = 0; i < direction.size(); ++i) direction(i) = normal(gen);
  } while (direction.norm() == 0.0);
  direction /= direction.norm();

  NoisyData data;
  data.v_delta = v_dagger + delta * direction;
  data.delta = delta;
  data.seed = seed;
  return data;
}

namespace preset {

struct DiagonalDecay {
  Eigen::Index n;
  double a;
};

struct Integration {
  Eigen::Index n;
};

struct RandomGaussian {
  Eigen::Index m;
  Eigen::Index n;
  std::uint64_t seed;
};

}  // namespace preset

using OperatorPreset = std::variant<preset::DiagonalDecay, preset::Integration, preset::RandomGaussian>;

/// Gaussian matrix with i.i.d. N(0, 1/m) entries, filled column by column.
inline Matrix random_gaussian_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(gen) * scale;
  return a;
}

inline SpectralOperator preset_operator(const OperatorPreset& kind) {
  return std::visit(
      overloaded{
          [](const preset::DiagonalDecay& d) {
            if (d.n < 2 || !(d.a > 0.0) || !std::isfinite(d.a)) {
              throw Error(ErrorKind::InvalidOperator, "diagonal_decay needs n >= 2 and a > 0");
            }
            Vector diag(d.n);
            for (Eigen::Index k = 0; k < d.n; ++k) diag(k) = std::pow(static_cast<double>(k + 1), -d.a);
            return diagonal_operator(diag);
          },
          [](const preset::Integration& d) {
            if (d.n < 2) throw Error(ErrorKind::InvalidOperator, "integration needs n >= 2");
            Matrix m = Matrix::Zero(d.n, d.n);
            m.triangularView<Eigen::Lower>().setConstant(1.0 / static_cast<double>(d.n));
            return SpectralOperator(std::move(m));
          },
          [](const preset::RandomGaussian& d) {
            if (d.m < 2 || d.n < 2) throw Error(ErrorKind::InvalidOperator, "random_gaussian needs m, n >= 2");
            return SpectralOperator(random_gaussian_matrix(d.m, d.n, d.seed));
          },
      },
      kind);
}

/// Alternating signs with magnitudes k^{-1/2}, normalised to unit length.
inline Vector default_omega(Eigen::Index n) {
  Vector w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = 1.0 / std::sqrt(static_cast<double>(k + 1));
    w(k) = (k % 2 == 0) ? mag : -mag;
  }
  return w / w.norm();
}

/// Standard normal direction of unit length.
inline Vector random_omega(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(n);
  do {
    for (Eigen::Index k = 0; k < n; ++k) w(k) = normal(gen);
  } while (w.norm() == 0.0);
  return w / w.norm();
}

}  // namespace bregman
