#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "nedstokes/assembly.hpp"
#include "nedstokes/error.hpp"

namespace nedstokes {

struct EigConfig {
  int nev = 5;
  /// Shift theta; eigenvalues nearest to it are found first.
  double shift = 0.0;
  /// 0 selects max(40, 4 nev).
  int krylov_dim = 0;
  /// Relative residual tolerance on the shifted-inverted operator.
  double tol = 1e-10;
  int max_restarts = 50;
  std::uint64_t seed = 1;
  /// Ritz values below drop_tol * max |nu| belong to infinite eigenvalues.
  double drop_tol = 1e-8;
};

struct SpectralSolution {
  /// Ascending.
  std::vector<double> eigenvalues;
  /// Pencil-space eigenvectors, scaled so that ||u_h||_0 = 1.
  std::vector<Eigen::VectorXd> vectors;
  /// Stress coefficients in full numbering (eliminated DOFs are zero).
  std::vector<Eigen::VectorXd> sigma;
  std::vector<Eigen::VectorXd> u;
  std::vector<double> multiplier;
  /// ||K x - lambda N x||_2 / ||x||_2.
  std::vector<double> residuals;
  std::vector<bool> converged;
  int restarts = 0;
};

/// Raised when fewer than nev pairs converge; carries what was found.
class UnconvergedError : public Error {
 public:
  UnconvergedError(const std::string& what, SpectralSolution partial)
      : Error(ErrorCategory::Unconverged, what), partial_(std::move(partial)) {}
  const SpectralSolution& partial() const noexcept { return partial_; }

 private:
  SpectralSolution partial_;
};

/// Shift-invert Arnoldi on S = (K - theta N)^{-1} N with explicit restarts.
/// Throws Error(ShiftAtEigenvalue) when K - theta N cannot be factorized.
SpectralSolution solve_eig(const Pencil& pencil, const EigConfig& cfg = {});

/// ||K x - lambda N x||_2 / ||x||_2 for each stored pair, recomputed from scratch.
std::vector<double> eigen_residuals(const Pencil& pencil, const SpectralSolution& sol);

/// ||K x - lambda N x||_2 / ||x||_2; throws InvalidInput for a zero vector.
double eigen_residual(const Pencil& pencil, double lambda, const Eigen::VectorXd& x);

}  // namespace nedstokes
