#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "nedstokes/postproc.hpp"

namespace nedstokes {

/// Per-triangle residual indicators. Column i of `addends` is addend i + 1:
/// 1 ||Theta u - u||^2, 2 h^2 ||curl u - sigma^r/mu||^2, 3 h^2 ||div(sigma^r/mu)||^2,
/// 4 sum over interior edges h_e ||[sigma^r/mu] n||^2, 5 the same over boundary
/// edges with the trace itself. Edge terms count fully for both neighbours.
struct LocalIndicators {
  Eigen::MatrixXd addends;
  Eigen::VectorXd eta_sq;

  double total_sq() const { return eta_sq.sum(); }
  double eta() const { return std::sqrt(total_sq()); }
  Eigen::VectorXd eta_local() const { return eta_sq.cwiseSqrt(); }
};

/// Lowest-order (k = 0) schemes only; other velocity orders raise Unsupported.
/// Neumann edges are left out of the boundary addend.
LocalIndicators compute_indicators(const DiscreteField& sigma, const DiscreteField& u,
                                   const DiscreteField& theta_u, double mu);

/// |lambda_ref - lambda_h| / eta^2; +infinity when eta = 0 and the error is not.
double effectivity(double lambda_ref, double lambda_h, double eta);

/// triangle_id, addend1..addend5, eta_sq
void write_indicators_csv(const LocalIndicators& ind, const std::filesystem::path& path);

}  // namespace nedstokes
