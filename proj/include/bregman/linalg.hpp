#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <string>

#include "bregman/error.hpp"

namespace bregman {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative cutoff below which singular values are treated as zero.
inline constexpr double kRankCutoff = 1e-12;

inline bool all_finite(const Vector& x) { return x.allFinite(); }

inline void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::DimensionError, std::string(what) + ": expected length " +
                                               std::to_string(a) + ", got " + std::to_string(b));
  }
}

/**
 * Dense linear map F : R^n -> R^m together with its thin singular value
 * factorization F = U diag(sigma) V^T, truncated to the numerical rank.
 *
 * Immutable after construction. The matrix itself is kept for the forward
 * and adjoint actions; the factors drive the spectral calculus.
 */
class SpectralOperator {
 public:
  explicit SpectralOperator(Matrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() < 1 || matrix_.cols() < 1) {
      throw Error(ErrorKind::InvalidOperator, "operator must be at least 1x1");
    }
    if (!matrix_.allFinite()) {
      throw Error(ErrorKind::InvalidOperator, "operator has a non-finite entry");
    }
    Eigen::BDCSVD<Matrix> svd(matrix_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < s.size() && smax > 0.0 && s(rank) > kRankCutoff * smax) ++rank;
    sigma_ = s.head(rank);
    left_ = svd.matrixU().leftCols(rank);
    right_ = svd.matrixV().leftCols(rank);
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  const Matrix& left() const noexcept { return left_; }
  const Matrix& right() const noexcept { return right_; }
  const Vector& singular_values() const noexcept { return sigma_; }

  Eigen::Index rows() const noexcept { return matrix_.rows(); }
  Eigen::Index cols() const noexcept { return matrix_.cols(); }
  Eigen::Index rank() const noexcept { return sigma_.size(); }

  double norm() const noexcept { return sigma_.size() > 0 ? sigma_(0) : 0.0; }

 private:
  Matrix matrix_;
  Vector sigma_;
  Matrix left_;
  Matrix right_;
};

inline SpectralOperator factorize(Matrix matrix) { return SpectralOperator(std::move(matrix)); }

/// Diagonal operator with the given diagonal entries.
inline SpectralOperator diagonal_operator(const Vector& diag) {
  Matrix m = Matrix::Zero(diag.size(), diag.size());
  m.diagonal() = diag;
  return SpectralOperator(std::move(m));
}

inline SpectralOperator identity_operator(Eigen::Index n) {
  return SpectralOperator(Matrix::Identity(n, n));
}

inline Vector apply(const SpectralOperator& op, const Vector& u) {
  require_same_size(op.cols(), u.size(), "apply");
  return op.matrix() * u;
}

inline Vector apply_adjoint(const SpectralOperator& op, const Vector& v) {
  require_same_size(op.rows(), v.size(), "apply_adjoint");
  return op.matrix().transpose() * v;
}

inline double operator_norm(const SpectralOperator& op) noexcept { return op.norm(); }

namespace detail {

inline Vector spectral_power(const Matrix& basis, const Vector& sigma, double power,
                             const Vector& w) {
  Vector coeffs = basis.transpose() * w;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) *= std::pow(sigma(k), power);
  return basis * coeffs;
}

}  // namespace detail

/**
 * (F*F)^nu w computed as sum_k sigma_k^{2 nu} <v_k, w> v_k.
 *
 * Kernel directions are annihilated for every nu, so nu = 0 yields the
 * orthogonal projection onto the range of F*.
 */
inline Vector fractional_gram_apply(const SpectralOperator& op, double nu, const Vector& w) {
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw Error(ErrorKind::InvalidExponent, "nu must lie in [0, 1], got " + std::to_string(nu));
  }
  require_same_size(op.cols(), w.size(), "fractional_gram_apply");
  return detail::spectral_power(op.right(), op.singular_values(), 2.0 * nu, w);
}

/// (FF*)^mu w on the data side, via the left singular vectors.
inline Vector gram_power_factor(const SpectralOperator& op, double mu, const Vector& w) {
  if (!(mu >= 0.0 && mu <= 0.5)) {
    throw Error(ErrorKind::InvalidExponent, "mu must lie in [0, 1/2], got " + std::to_string(mu));
  }
  require_same_size(op.rows(), w.size(), "gram_power_factor");
  return detail::spectral_power(op.left(), op.singular_values(), 2.0 * mu, w);
}

}  // namespace bregman
