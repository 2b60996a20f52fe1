#include "nedstokes/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "nedstokes/error.hpp"

namespace nedstokes {

namespace {

// Adds the orbit of barycentric (a, a, 1-2a) (or the centroid when a == 1/3).
void add_orbit(QuadratureRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  if (std::abs(b - a) < 1e-15) {
    rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    rule.weights.push_back(0.5 * w);
    return;
  }
  const std::array<std::array<double, 3>, 3> bary{{{a, a, b}, {a, b, a}, {b, a, a}}};
  for (const auto& l : bary) {
    rule.points.emplace_back(l[1], l[2]);
    rule.weights.push_back(0.5 * w);
  }
}

QuadratureRule symmetric_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree) {
    case 0:
    case 1:
      add_orbit(rule, 1.0 / 3.0, 1.0);
      break;
    case 2:
      add_orbit(rule, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:
    case 4:
      // Dunavant degree-4 rule; its positive weights make it preferable to the
      // degree-3 rule with a negative centroid weight.
      add_orbit(rule, 0.445948490915965, 0.223381589678011);
      add_orbit(rule, 0.091576213509771, 0.109951743655322);
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      add_orbit(rule, 1.0 / 3.0, 9.0 / 40.0);
      add_orbit(rule, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
      add_orbit(rule, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
      break;
    }
    default:
      break;
  }
  return rule;
}

// Duffy map (u, v) -> (u (1 - v), v) with Jacobian (1 - v).
QuadratureRule collapsed_rule(int degree) {
  const QuadratureRule1D gu = gauss_legendre((degree + 2) / 2);
  const QuadratureRule1D gv = gauss_legendre((degree + 3) / 2);
  QuadratureRule rule;
  rule.degree = degree;
  for (std::size_t j = 0; j < gv.size(); ++j) {
    const double v = gv.points[j];
    for (std::size_t i = 0; i < gu.size(); ++i) {
      rule.points.emplace_back(gu.points[i] * (1.0 - v), v);
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - v));
    }
  }
  return rule;
}

}  // namespace

QuadratureRule1D gauss_legendre(int npoints) {
  if (npoints < 1) {
    throw Error(ErrorCategory::Configuration, "gauss_legendre: need at least one point");
  }
  // Golub-Welsch on the Legendre Jacobi matrix over [-1,1].
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(npoints, npoints);
  for (int k = 1; k < npoints; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = beta;
    jac(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  QuadratureRule1D rule;
  rule.degree = 2 * npoints - 1;
  for (int i = 0; i < npoints; ++i) {
    const double x = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.points.push_back(0.5 * (x + 1.0));
    rule.weights.push_back(v0 * v0);  // 2 v0^2 on [-1,1], halved on [0,1]
  }
  return rule;
}

const QuadratureRule& triangle_quadrature(int degree) {
  if (degree < 0 || degree > kMaxTriangleDegree) {
    throw Error(ErrorCategory::Configuration,
                "triangle quadrature degree " + std::to_string(degree) + " outside [0, 10]");
  }
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> r;
    for (int d = 0; d <= kMaxTriangleDegree; ++d) {
      r.push_back(d <= 5 ? symmetric_rule(d) : collapsed_rule(d));
    }
    return r;
  }();
  return rules[static_cast<std::size_t>(degree)];
}

const QuadratureRule1D& gauss_quadrature(int degree) {
  if (degree < 0) {
    throw Error(ErrorCategory::Configuration, "negative quadrature degree");
  }
  static std::mutex mutex;
  static std::map<int, QuadratureRule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    QuadratureRule1D rule = gauss_legendre(degree / 2 + 1);
    rule.degree = degree;
    it = cache.emplace(degree, std::move(rule)).first;
  }
  return it->second;
}

}  // namespace nedstokes
