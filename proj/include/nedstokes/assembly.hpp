#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <vector>

#include "nedstokes/spaces.hpp"
#include "nedstokes/sparse.hpp"

namespace nedstokes {

/// Discrete bilinear forms on the full (unconstrained) spaces.
struct Forms {
  /// a(xi, tau) = (1/mu) int xi^r : tau^r, n_sigma x n_sigma.
  CsrMatrix A;
  /// b(tau, v) = int v . curl(tau), n_u x n_sigma.
  CsrMatrix B;
  /// Velocity mass matrix, n_u x n_u.
  CsrMatrix M;
  /// j_i = int phi_i : J.
  Eigen::VectorXd j;
  double mu = 1.0;
};

/// quad_degree < 0 selects 2 * (stress polynomial degree) + 2, capped at 10.
Forms assemble_forms(const Discretization& d, double mu, int quad_degree = -1);

/// K x = lambda N x with unknowns [free stress | velocity | multiplier].
struct Pencil {
  CsrMatrix K;
  CsrMatrix N;
  /// Full stress index of each free stress unknown.
  std::vector<int> sigma_free;
  int n_sigma_full = 0;
  int n_u = 0;
  /// 1 when the zero-mean constraint on sigma:J is carried by a multiplier.
  int n_c = 0;
  /// Free stress unknown with the largest coefficient in the interpolant of J
  /// (the kernel direction the multiplier removes); -1 without multiplier.
  int pin = -1;

  int size() const { return K.rows(); }
  int n_sigma() const { return static_cast<int>(sigma_free.size()); }
  int u_offset() const { return n_sigma(); }
  /// Stress coefficients in full numbering, zeros at eliminated DOFs.
  Eigen::VectorXd expand_sigma(const Eigen::VectorXd& x) const;
};

/// AllDirichlet: K = [[A, B^T, j], [B, 0, 0], [j^T, 0, 0]], N = diag(0, -M, 0).
/// Mixed: the multiplier is dropped and stress DOFs on Neumann edges are
/// removed. With verify set, K is factorized once and a singular K raises an
/// Assembly error.
Pencil build_pencil(const Forms& forms, const Discretization& d, bool verify = false);

/// Factorization of K - theta N. The multiplier row and column are dense, which
/// ruins the fill of a sparse LU, so they are swapped for a single pin entry and
/// restored by a rank-two Woodbury correction.
class PencilFactorization {
 public:
  /// Throws SingularMatrixError when K - theta N is singular.
  PencilFactorization(const Pencil& p, double theta);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  std::unique_ptr<Factorization> lu_;
  Eigen::MatrixXd u_;        // [w, e_last]
  Eigen::MatrixXd z_;        // LU^{-1} u_
  Eigen::Matrix2d capinv_;   // (I + V^T z_)^{-1}, V = [e_last, w]
  bool bordered_ = false;
};

/// Writes K.coo and N.coo into `dir`.
void export_pencil_coo(const Pencil& p, const std::filesystem::path& dir);

}  // namespace nedstokes
