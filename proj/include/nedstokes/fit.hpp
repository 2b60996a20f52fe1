#pragma once

#include <utility>
#include <vector>

namespace nedstokes {

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Euclidean norm of the residuals in log-log space.
  double residual = 0.0;
};

/// Least-squares slope of log(error) against log(h). Needs two or more pairs with
/// positive entries; throws InvalidInput otherwise.
OrderFit fit_order(const std::vector<std::pair<double, double>>& pairs);

struct Extrapolation {
  double lambda = 0.0;
  double c = 0.0;
  /// NaN when the series is constant and the order is undefined.
  double t = 0.0;
  bool t_defined = true;
  /// sqrt of the minimized sum of squares.
  double residual = 0.0;
};

/// Fits lambda_h ~ lambda + c h^t over three or more pairs (h, lambda_h): t is
/// bracketed on a grid over [0.25, 8] and refined by golden section, lambda and c
/// are the linear least-squares solution for each t.
Extrapolation extrapolate(const std::vector<std::pair<double, double>>& pairs);

}  // namespace nedstokes
