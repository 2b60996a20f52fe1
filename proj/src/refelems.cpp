#include "nedstokes/refelems.hpp"

#include <Eigen/LU>
#include <array>
#include <string>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

namespace nedstokes {

namespace {

double ipow(double x, int n) {
  if (n < 0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

std::vector<std::pair<int, int>> monomial_exponents(int degree) {
  std::vector<std::pair<int, int>> e;
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) e.emplace_back(d - b, b);
  }
  return e;
}

int monomial_index(const std::vector<std::pair<int, int>>& exps, int a, int b) {
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i].first == a && exps[i].second == b) return static_cast<int>(i);
  }
  return -1;
}

struct RefEdge {
  Vec2 start;
  Vec2 end;
};

const std::array<RefEdge, 3>& reference_edges() {
  static const std::array<RefEdge, 3> edges{{
      {Vec2(1.0, 0.0), Vec2(0.0, 1.0)},
      {Vec2(0.0, 0.0), Vec2(0.0, 1.0)},
      {Vec2(0.0, 0.0), Vec2(1.0, 0.0)},
  }};
  return edges;
}

}  // namespace

double legendre01(int p, double s) {
  const double x = 2.0 * s - 1.0;
  if (p == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int n = 1; n < p; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void ReferenceBasis::monomials(const Vec2& x, Eigen::VectorXd& m, Eigen::VectorXd& mx,
                               Eigen::VectorXd& my) const {
  const auto n = static_cast<Eigen::Index>(exponents_.size());
  m.resize(n);
  mx.resize(n);
  my.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [a, b] = exponents_[static_cast<std::size_t>(i)];
    m(i) = ipow(x(0), a) * ipow(x(1), b);
    mx(i) = a * ipow(x(0), a - 1) * ipow(x(1), b);
    my(i) = b * ipow(x(0), a) * ipow(x(1), b - 1);
  }
}

void ReferenceBasis::eval(const Vec2& xhat, std::span<Vec2> out) const {
  Eigen::VectorXd m, mx, my;
  monomials(xhat, m, mx, my);
  const auto nm = m.size();
  const Eigen::VectorXd vx = coeffs_.topRows(nm).transpose() * m;
  const Eigen::VectorXd vy = coeffs_.bottomRows(nm).transpose() * m;
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = Vec2(vx(i), vy(i));
}

void ReferenceBasis::eval_curl(const Vec2& xhat, std::span<double> out) const {
  Eigen::VectorXd m, mx, my;
  monomials(xhat, m, mx, my);
  const auto nm = m.size();
  const Eigen::VectorXd c =
      coeffs_.bottomRows(nm).transpose() * mx - coeffs_.topRows(nm).transpose() * my;
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = c(i);
}

void ReferenceBasis::eval_jacobian(const Vec2& xhat, std::span<Mat2> out) const {
  Eigen::VectorXd m, mx, my;
  monomials(xhat, m, mx, my);
  const auto nm = m.size();
  const Eigen::VectorXd v1x = coeffs_.topRows(nm).transpose() * mx;
  const Eigen::VectorXd v1y = coeffs_.topRows(nm).transpose() * my;
  const Eigen::VectorXd v2x = coeffs_.bottomRows(nm).transpose() * mx;
  const Eigen::VectorXd v2y = coeffs_.bottomRows(nm).transpose() * my;
  for (int i = 0; i < dim_; ++i) {
    Mat2 g;
    g << v1x(i), v1y(i), v2x(i), v2y(i);
    out[static_cast<std::size_t>(i)] = g;
  }
}

void ReferenceBasis::eval_scalar(const Vec2& xhat, std::span<double> out) const {
  Eigen::VectorXd m, mx, my;
  monomials(xhat, m, mx, my);
  const Eigen::VectorXd v = coeffs_.transpose() * m;
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = v(i);
}

void ReferenceBasis::eval_gradient(const Vec2& xhat, std::span<Vec2> out) const {
  Eigen::VectorXd m, mx, my;
  monomials(xhat, m, mx, my);
  const Eigen::VectorXd gx = coeffs_.transpose() * mx;
  const Eigen::VectorXd gy = coeffs_.transpose() * my;
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = Vec2(gx(i), gy(i));
}

Eigen::VectorXd ReferenceBasis::apply_dofs(const std::function<Vec2(const Vec2&)>& field,
                                           int field_degree) const {
  if (!is_vector()) {
    throw Error(ErrorCategory::Unsupported, "apply_dofs: scalar bases have no edge functionals");
  }
  Eigen::VectorXd dofs(dim_);
  const auto& g = gauss_quadrature(field_degree + edge_dofs_ - 1);
  int idx = 0;
  for (const auto& edge : reference_edges()) {
    const Vec2 tangent = edge.end - edge.start;
    for (int p = 0; p < edge_dofs_; ++p) {
      double sum = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double s = g.points[q];
        const Vec2 x = edge.start + s * tangent;
        sum += g.weights[q] * field(x).dot(tangent) * legendre01(p, s);
      }
      dofs(idx++) = sum;
    }
  }
  if (interior_dofs_ > 0) {
    const auto& rule = triangle_quadrature(std::min(kMaxTriangleDegree, field_degree + degree_));
    const auto nm = static_cast<Eigen::Index>(exponents_.size());
    Eigen::VectorXd m, mx, my;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(interior_dofs_);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      monomials(rule.points[q], m, mx, my);
      const Vec2 f = field(rule.points[q]);
      const Eigen::VectorXd wx = interior_tests_.topRows(nm).transpose() * m;
      const Eigen::VectorXd wy = interior_tests_.bottomRows(nm).transpose() * m;
      acc += rule.weights[q] * (f(0) * wx + f(1) * wy);
    }
    dofs.segment(idx, interior_dofs_) = acc;
  }
  return dofs;
}

Eigen::MatrixXd ReferenceBasis::dof_matrix() const {
  Eigen::MatrixXd d(dim_, dim_);
  std::vector<Vec2> vals(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) {
    auto column = [&](const Vec2& x) {
      eval(x, vals);
      return vals[static_cast<std::size_t>(j)];
    };
    d.col(j) = apply_dofs(column, degree_);
  }
  return d;
}

ReferenceBasis ned_basis(Family family, int order) {
  ReferenceBasis rb;
  rb.family_ = family;
  rb.order_ = order;
  int nprime = 0;
  if (family == Family::Ned1) {
    if (order < 0 || order > 2) {
      throw Error(ErrorCategory::Configuration,
                  "Ned1 order " + std::to_string(order) + " unsupported (0..2)");
    }
    rb.degree_ = order + 1;
    rb.edge_dofs_ = order + 1;
    rb.interior_dofs_ = order * (order + 1);
    nprime = (order + 1) * (order + 3);
  } else if (family == Family::Ned2) {
    if (order < 1 || order > 3) {
      throw Error(ErrorCategory::Configuration,
                  "Ned2 order " + std::to_string(order) + " unsupported (1..3)");
    }
    rb.degree_ = order;
    rb.edge_dofs_ = order + 1;
    rb.interior_dofs_ = (order - 1) * (order + 1);
    nprime = (order + 1) * (order + 2);
  } else {
    throw Error(ErrorCategory::Configuration, "ned_basis: family must be Ned1 or Ned2");
  }
  rb.dim_ = nprime;
  rb.exponents_ = monomial_exponents(rb.degree_);
  const auto nm = static_cast<Eigen::Index>(rb.exponents_.size());
  const auto& ex = rb.exponents_;

  // Prime basis: full vector polynomials of degree <= k (Ned1) or m (Ned2).
  const int full_degree = order;
  Eigen::MatrixXd prime = Eigen::MatrixXd::Zero(2 * nm, nprime);
  int col = 0;
  for (Eigen::Index i = 0; i < nm; ++i) {
    if (ex[static_cast<std::size_t>(i)].first + ex[static_cast<std::size_t>(i)].second >
        full_degree) {
      continue;
    }
    prime(i, col++) = 1.0;
    prime(nm + i, col++) = 1.0;
  }
  if (family == Family::Ned1) {
    // Homogeneous part p(x,y) (-y, x) with p of degree exactly k.
    for (int b = 0; b <= order; ++b) {
      const int a = order - b;
      prime(monomial_index(ex, a, b + 1), col) = -1.0;
      prime(nm + monomial_index(ex, a + 1, b), col) = 1.0;
      ++col;
    }
  }

  // Interior test fields: P_{k-1}^2 for Ned1, RT_{m-2} for Ned2.
  const int test_degree = family == Family::Ned1 ? order - 1 : order - 2;
  rb.interior_tests_ = Eigen::MatrixXd::Zero(2 * nm, rb.interior_dofs_);
  int t = 0;
  if (test_degree >= 0) {
    for (Eigen::Index i = 0; i < nm; ++i) {
      const auto [a, b] = ex[static_cast<std::size_t>(i)];
      if (a + b > test_degree) continue;
      rb.interior_tests_(i, t++) = 1.0;
      rb.interior_tests_(nm + i, t++) = 1.0;
    }
    if (family == Family::Ned2) {
      for (int b = 0; b <= test_degree; ++b) {
        const int a = test_degree - b;
        rb.interior_tests_(monomial_index(ex, a + 1, b), t) = 1.0;
        rb.interior_tests_(nm + monomial_index(ex, a, b + 1), t) = 1.0;
        ++t;
      }
    }
  }

  // Dualize: basis = prime * D^{-1}, D(i,j) = dof_i(prime_j).
  rb.coeffs_ = prime;
  const Eigen::MatrixXd d = rb.dof_matrix();
  rb.coeffs_ = prime * d.fullPivLu().inverse();
  return rb;
}

ReferenceBasis pk_basis(int order) {
  if (order < 0 || order > 3) {
    throw Error(ErrorCategory::Configuration,
                "Pk order " + std::to_string(order) + " unsupported (0..3)");
  }
  ReferenceBasis rb;
  rb.family_ = Family::Pk;
  rb.order_ = order;
  rb.degree_ = order;
  rb.exponents_ = monomial_exponents(order);
  rb.dim_ = static_cast<int>(rb.exponents_.size());
  rb.coeffs_ = Eigen::MatrixXd::Identity(rb.dim_, rb.dim_);
  return rb;
}

}  // namespace nedstokes
