#pragma once

#include <vector>

#include "nedstokes/tensor.hpp"

namespace nedstokes {

/// Rule on the reference triangle {(0,0),(1,0),(0,1)}. Points are stored in
/// reference Cartesian coordinates; barycentric coordinates are (1-x-y, x, y).
/// Weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxTriangleDegree = 10;

/// Triangle rule exact for polynomials of total degree <= `degree` (0..10), all
/// weights positive. Degrees up to 5 use fully symmetric rules; degrees 6..10 use
/// a collapsed Gauss product rule. Throws ErrorCategory::Configuration otherwise.
const QuadratureRule& triangle_quadrature(int degree);

/// Gauss-Legendre rule on [0,1] exact to `degree` (any degree >= 0).
const QuadratureRule1D& gauss_quadrature(int degree);

/// n-point Gauss-Legendre rule on [0,1].
QuadratureRule1D gauss_legendre(int npoints);

}  // namespace nedstokes
