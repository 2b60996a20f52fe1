#include "nedstokes/fit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "nedstokes/error.hpp"

namespace nedstokes {

OrderFit fit_order(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw Error(ErrorCategory::InvalidInput, "fit_order needs at least two points");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [h, e] = pairs[static_cast<std::size_t>(i)];
    if (!(h > 0.0) || !(e > 0.0) || !std::isfinite(h) || !std::isfinite(e)) {
      throw Error(ErrorCategory::InvalidInput, "fit_order needs positive finite values");
    }
    a(i, 0) = 1.0;
    a(i, 1) = std::log(h);
    b(i) = std::log(e);
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  return {x(1), x(0), (a * x - b).norm()};
}

namespace {

struct LinearFit {
  double lambda;
  double c;
  double sse;
};

LinearFit fit_at(const std::vector<std::pair<double, double>>& pairs, double t) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::pow(pairs[static_cast<std::size_t>(i)].first, t);
    b(i) = pairs[static_cast<std::size_t>(i)].second;
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  return {x(0), x(1), (a * x - b).squaredNorm()};
}

}  // namespace

Extrapolation extrapolate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw Error(ErrorCategory::InvalidInput, "extrapolate needs at least three points");
  double mean = 0.0;
  for (const auto& [h, l] : pairs) {
    if (!(h > 0.0) || !std::isfinite(l)) throw Error(ErrorCategory::InvalidInput, "extrapolate needs h > 0 and finite values");
    mean += l;
  }
  mean /= static_cast<double>(pairs.size());
  double spread = 0.0;
  for (const auto& p : pairs) spread = std::max(spread, std::abs(p.second - mean));
  if (spread <= 1e-14 * std::max(1.0, std::abs(mean))) {
    return {mean, 0.0, std::numeric_limits<double>::quiet_NaN(), false, 0.0};
  }

  constexpr double lo = 0.25, hi = 8.0;
  constexpr int grid = 400;
  auto t_of = [&](int i) { return lo * std::pow(hi / lo, static_cast<double>(i) / grid); };
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double s = fit_at(pairs, t_of(i)).sse;
    if (s < best_sse) {
      best_sse = s;
      best = i;
    }
  }
  double a = t_of(std::max(0, best - 1));
  double b = t_of(std::min(grid, best + 1));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = fit_at(pairs, x1).sse, f2 = fit_at(pairs, x2).sse;
  while (b - a > 1e-13 * b) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = fit_at(pairs, x1).sse;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = fit_at(pairs, x2).sse;
    }
  }
  const double t = 0.5 * (a + b);
  const auto f = fit_at(pairs, t);
  return {f.lambda, f.c, t, true, std::sqrt(f.sse)};
}

}  // namespace nedstokes
