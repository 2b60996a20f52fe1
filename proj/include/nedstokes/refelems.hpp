#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "nedstokes/tensor.hpp"

namespace nedstokes {

enum class Family { Ned1, Ned2, Pk };

/// Shape functions on the reference triangle {(0,0),(1,0),(0,1)}.
///
/// Nédélec bases are dual to their degrees of freedom. Local edge i is opposite
/// local vertex i and runs from the lower to the higher local vertex:
/// e0 = v1->v2, e1 = v0->v2, e2 = v0->v1. Edge functional p on edge e is
///   int_0^1 v(x(s)) . (x_end - x_start) L_p(2s-1) ds,
/// with L_p the Legendre polynomial, so it is invariant under the covariant
/// Piola map. DOFs are ordered edge by edge, then interior moments.
class ReferenceBasis {
 public:
  ReferenceBasis() = default;

  Family family() const { return family_; }
  int order() const { return order_; }
  int dim() const { return dim_; }
  /// Highest total polynomial degree appearing in the basis.
  int poly_degree() const { return degree_; }
  bool is_vector() const { return family_ != Family::Pk; }
  /// DOFs per edge (Nédélec only).
  int edge_dofs() const { return edge_dofs_; }
  /// Interior DOFs for one vector field (Nédélec only).
  int interior_dofs() const { return interior_dofs_; }

  /// Vector values, one per basis function.
  void eval(const Vec2& xhat, std::span<Vec2> out) const;
  /// Scalar curl d1 v2 - d2 v1.
  void eval_curl(const Vec2& xhat, std::span<double> out) const;
  /// Jacobian d v_i / d x_j of each vector basis function.
  void eval_jacobian(const Vec2& xhat, std::span<Mat2> out) const;
  /// Scalar values (Pk only).
  void eval_scalar(const Vec2& xhat, std::span<double> out) const;
  /// Scalar gradients (Pk only).
  void eval_gradient(const Vec2& xhat, std::span<Vec2> out) const;

  /// Applies every DOF functional to a vector field on the reference triangle.
  Eigen::VectorXd apply_dofs(const std::function<Vec2(const Vec2&)>& field,
                             int field_degree) const;

  /// Matrix D with D(i, j) = dof_i(basis_j); the identity up to roundoff.
  Eigen::MatrixXd dof_matrix() const;

  friend ReferenceBasis ned_basis(Family family, int order);
  friend ReferenceBasis pk_basis(int order);

 private:
  void monomials(const Vec2& x, Eigen::VectorXd& m, Eigen::VectorXd& mx,
                 Eigen::VectorXd& my) const;

  Family family_ = Family::Pk;
  int order_ = 0;
  int dim_ = 0;
  int degree_ = 0;
  int edge_dofs_ = 0;
  int interior_dofs_ = 0;
  std::vector<std::pair<int, int>> exponents_;
  // Columns are basis functions. Vector bases stack the x-component monomial
  // coefficients above the y-component ones.
  Eigen::MatrixXd coeffs_;
  // Interior test fields, same layout as coeffs_.
  Eigen::MatrixXd interior_tests_;
};

/// First kind: Ned1 order k in {0,1,2}, P_k^2 + P~_k (-y, x).
/// Second kind: Ned2 order m in {1,2,3}, P_m^2.
ReferenceBasis ned_basis(Family family, int order);

/// Monomial basis of P_order, order in {0,1,2,3}.
ReferenceBasis pk_basis(int order);

/// Shifted Legendre polynomial L_p(2s-1).
double legendre01(int p, double s);

}  // namespace nedstokes
