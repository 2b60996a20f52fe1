#include "nedstokes/estimator.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

namespace nedstokes {

namespace {

// sigma^r / mu and its row-wise divergence on triangle t.
Mat2 scaled_sigma_r(const DiscreteField& sigma, int t, const Vec2& xhat, double mu) {
  return tensor::dev_r(eval_tensor(sigma, t, xhat)) / mu;
}

Vec2 div_sigma_r(const DiscreteField& sigma, int t, const Vec2& xhat, double mu) {
  const Eigen::VectorXd& c = sigma.coeffs;
  const auto g = eval_stress_gradient(*sigma.disc, {c.data(), static_cast<std::size_t>(c.size())}, t, xhat);
  // d/dx_l of (sigma_01 - sigma_10), the J-coefficient times two.
  const Vec2 dj(g[0](1, 0) - g[1](0, 0), g[0](1, 1) - g[1](0, 1));
  Vec2 d;
  // Row 0 of sigma^r: (s00, s01 - j/2); row 1: (s10 + j/2, s11).
  d(0) = g[0](0, 0) + g[0](1, 1) - 0.5 * dj(1);
  d(1) = g[1](0, 0) + 0.5 * dj(0) + g[1](1, 1);
  return d / mu;
}

}  // namespace

LocalIndicators compute_indicators(const DiscreteField& sigma, const DiscreteField& u,
                                   const DiscreteField& theta_u, double mu) {
  if (sigma.kind != FieldKind::StressTensor || u.kind != FieldKind::Velocity ||
      theta_u.kind != FieldKind::NodalP1Vector) {
    throw Error(ErrorCategory::InvalidInput, "compute_indicators: expected stress, velocity and nodal fields");
  }
  if (u.disc->desc.k != 0) {
    throw Error(ErrorCategory::Unsupported, "the residual estimator is implemented for k = 0 only");
  }
  if (&sigma.mesh() != &u.mesh() || &u.mesh() != &theta_u.mesh()) {
    throw Error(ErrorCategory::InvalidInput, "compute_indicators: fields live on different meshes");
  }
  if (!(mu > 0.0)) throw Error(ErrorCategory::InvalidInput, "compute_indicators: mu must be positive");
  const Mesh& mesh = sigma.mesh();
  const int nt = mesh.num_triangles();
  LocalIndicators ind;
  ind.addends = Eigen::MatrixXd::Zero(nt, 5);
  const auto& rule = triangle_quadrature(4);
  const std::span<const double> ucoef(u.coeffs.data(), static_cast<std::size_t>(u.coeffs.size()));
  for (int t = 0; t < nt; ++t) {
    const double jac = 2.0 * mesh.area(t);
    const double h2 = mesh.diameter(t) * mesh.diameter(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2& xh = rule.points[q];
      const double w = rule.weights[q] * jac;
      ind.addends(t, 0) += w * (eval_vector(theta_u, t, xh) - eval_vector(u, t, xh)).squaredNorm();
      const Mat2 curl_u = tensor::curl_of_vector(eval_velocity_gradient(*u.disc, ucoef, t, xh));
      ind.addends(t, 1) += w * h2 * (curl_u - scaled_sigma_r(sigma, t, xh, mu)).squaredNorm();
      ind.addends(t, 2) += w * h2 * div_sigma_r(sigma, t, xh, mu).squaredNorm();
    }
  }

  const auto& g = gauss_legendre(4);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edge(e);
    if (edge.tag == BoundaryTag::Neumann) continue;
    const Vec2 a = mesh.vertex(edge.v[0]);
    const Vec2 b = mesh.vertex(edge.v[1]);
    const double he = mesh.edge_length(e);
    const Vec2 n = mesh.edge_normal(e);
    const int t0 = edge.tri[0];
    const int t1 = edge.tri[1];
    const auto m0 = mesh.affine_map(t0);
    double sum = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Vec2 x = a + g.points[q] * (b - a);
      Mat2 s = scaled_sigma_r(sigma, t0, m0.to_reference(x), mu);
      if (t1 >= 0) s -= scaled_sigma_r(sigma, t1, mesh.affine_map(t1).to_reference(x), mu);
      sum += g.weights[q] * he * (s * n).squaredNorm();
    }
    const double term = he * sum;
    const int col = edge.is_boundary() ? 4 : 3;
    ind.addends(t0, col) += term;
    if (t1 >= 0) ind.addends(t1, col) += term;
  }
  ind.eta_sq = ind.addends.rowwise().sum();
  return ind;
}

double effectivity(double lambda_ref, double lambda_h, double eta) {
  const double err = std::abs(lambda_ref - lambda_h);
  if (eta == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return err / (eta * eta);
}

void write_indicators_csv(const LocalIndicators& ind, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string() + " for writing");
  os << "triangle_id,addend1,addend2,addend3,addend4,addend5,eta_sq\n" << std::setprecision(17);
  for (Eigen::Index t = 0; t < ind.addends.rows(); ++t) {
    os << t;
    for (int i = 0; i < 5; ++i) os << ',' << ind.addends(t, i);
    os << ',' << ind.eta_sq(t) << '\n';
  }
  if (!os) throw Error(ErrorCategory::Io, "write failed for " + path.string());
}

}  // namespace nedstokes
