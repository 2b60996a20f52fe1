#pragma once

#include <Eigen/Core>

namespace nedstokes {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

namespace tensor {

/// The skew tensor [[0,1],[-1,0]].
inline Mat2 J() {
  Mat2 j;
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

/// Double contraction a:b = sum_ij a_ij b_ij.
inline double contract(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

/// tau - (tau:J)/2 J. Removes the J-component, which leaves the symmetric part of tau.
inline Mat2 dev_r(const Mat2& tau) { return tau - 0.5 * contract(tau, J()) * J(); }

/// Row-wise curl of a vector field given its Jacobian grad(v)_ij = d v_i / d x_j:
/// curl_(v) = [[-d2 v1, d1 v1], [-d2 v2, d1 v2]].
inline Mat2 curl_of_vector(const Mat2& grad) {
  Mat2 c;
  c << -grad(0, 1), grad(0, 0), -grad(1, 1), grad(1, 0);
  return c;
}

}  // namespace tensor
}  // namespace nedstokes
