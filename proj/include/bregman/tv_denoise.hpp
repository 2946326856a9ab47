#pragma once

#include <cstddef>
#include <vector>

#include "bregman/linalg.hpp"

namespace bregman {

/**
 * Exact solution of  argmin_w  1/2 ||w - y||^2 + lambda * sum_i |w_{i+1} - w_i|.
 *
 * Dynamic programming over the derivative of the forward message, which is
 * piecewise linear; knots are kept in a deque-like buffer of size 2n that grows
 * outwards from the centre. Back-pointers (the clamp interval of each step)
 * recover the solution in a single backward pass. Runs in O(n) amortised.
 */
inline Vector tv_denoise_1d(const Vector& y, double lambda) {
  const auto n = static_cast<std::size_t>(y.size());
  Vector theta(y.size());
  if (n == 0) return theta;
  if (n == 1 || lambda <= 0.0) return y;

  std::vector<double> knot(2 * n), slope(2 * n), offset(2 * n);
  std::vector<double> lower(n - 1), upper(n - 1);

  lower[0] = y(0) - lambda;
  upper[0] = y(0) + lambda;
  auto l = static_cast<std::ptrdiff_t>(n) - 1;
  auto r = static_cast<std::ptrdiff_t>(n);
  knot[l] = lower[0];
  knot[r] = upper[0];
  slope[l] = 1.0;
  offset[l] = -y(0) + lambda;
  slope[r] = -1.0;
  offset[r] = y(0) + lambda;
  double a_first = 1.0;
  double b_first = -y(1) - lambda;
  double a_last = -1.0;
  double b_last = y(1) - lambda;

  for (std::size_t k = 1; k + 1 < n; ++k) {
    // Leftmost point where the derivative exceeds -lambda.
    double a_lo = a_first;
    double b_lo = b_first;
    std::ptrdiff_t lo = l;
    for (; lo <= r; ++lo) {
      if (a_lo * knot[lo] + b_lo > -lambda) break;
      a_lo += slope[lo];
      b_lo += offset[lo];
    }
    // Rightmost point where the derivative is below lambda.
    double a_hi = a_last;
    double b_hi = b_last;
    std::ptrdiff_t hi = r;
    for (; hi >= lo; --hi) {
      if (-a_hi * knot[hi] - b_hi < lambda) break;
      a_hi += slope[hi];
      b_hi += offset[hi];
    }

    lower[k] = (-lambda - b_lo) / a_lo;
    l = lo - 1;
    knot[l] = lower[k];

    upper[k] = (lambda + b_hi) / (-a_hi);
    r = hi + 1;
    knot[r] = upper[k];

    slope[l] = a_lo;
    offset[l] = b_lo + lambda;
    slope[r] = a_hi;
    offset[r] = b_hi + lambda;
    a_first = 1.0;
    b_first = -y(static_cast<Eigen::Index>(k + 1)) - lambda;
    a_last = -1.0;
    b_last = y(static_cast<Eigen::Index>(k + 1)) - lambda;
  }

  // The last coordinate sits where the final derivative vanishes.
  double a_lo = a_first;
  double b_lo = b_first;
  for (std::ptrdiff_t lo = l; lo <= r; ++lo) {
    if (a_lo * knot[lo] + b_lo > 0.0) break;
    a_lo += slope[lo];
    b_lo += offset[lo];
  }
  theta(static_cast<Eigen::Index>(n - 1)) = -b_lo / a_lo;

  for (std::size_t k = n - 1; k-- > 0;) {
    const double next = theta(static_cast<Eigen::Index>(k + 1));
    double value = next;
    if (next > upper[k]) value = upper[k];
    else if (next < lower[k]) value = lower[k];
    theta(static_cast<Eigen::Index>(k)) = value;
  }
  return theta;
}

}  // namespace bregman
