#include "nedstokes/spaces.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

namespace nedstokes {

namespace {

// Local edge i joins these local vertices, lower index first.
constexpr int kEdgeStart[3] = {1, 0, 0};
constexpr int kEdgeEnd[3] = {2, 2, 1};

}  // namespace

SpaceDescriptor SpaceDescriptor::scheme(int ell, int k) {
  if ((ell != 1 && ell != 2) || k < 0 || k > 2) {
    throw Error(ErrorCategory::Configuration, "unsupported scheme (" + std::to_string(ell) + "," +
                                                  std::to_string(k) +
                                                  "); need l in {1,2}, k in {0,1,2}");
  }
  return SpaceDescriptor{ell, k};
}

std::string SpaceDescriptor::name() const {
  return "P" + std::to_string(k) + "-NED" + std::to_string(ell) + "_" +
         std::to_string(stress_order());
}

DofMap build_dofmap(const Mesh& mesh, const SpaceDescriptor& desc, BCMode bc) {
  const auto basis = ned_basis(desc.stress_family(), desc.stress_order());
  DofMap m;
  m.local_vec_dim = basis.dim();
  m.local_u_dim = (desc.k + 1) * (desc.k + 2) / 2;
  m.edge_dofs = basis.edge_dofs();
  m.interior_dofs = basis.interior_dofs();
  const int nt = mesh.num_triangles();
  m.n_vec = mesh.num_edges() * m.edge_dofs + nt * m.interior_dofs;
  m.n_sigma = 2 * m.n_vec;
  m.n_u = 2 * nt * m.local_u_dim;
  m.vec_index.resize(static_cast<std::size_t>(nt) * static_cast<std::size_t>(m.local_vec_dim));
  m.vec_sign.resize(m.vec_index.size());

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    auto idx = m.vec_index.begin() + static_cast<std::ptrdiff_t>(t) * m.local_vec_dim;
    auto sgn = m.vec_sign.begin() + static_cast<std::ptrdiff_t>(t) * m.local_vec_dim;
    int l = 0;
    for (int i = 0; i < 3; ++i) {
      const bool aligned = tri.v[static_cast<std::size_t>(kEdgeStart[i])] <
                           tri.v[static_cast<std::size_t>(kEdgeEnd[i])];
      for (int p = 0; p < m.edge_dofs; ++p, ++l) {
        idx[l] = tri.e[static_cast<std::size_t>(i)] * m.edge_dofs + p;
        // Reversing the edge flips the tangent and maps L_p to (-1)^p L_p.
        sgn[l] = aligned ? 1.0 : (p % 2 == 0 ? -1.0 : 1.0);
      }
    }
    for (int i = 0; i < m.interior_dofs; ++i, ++l) {
      idx[l] = mesh.num_edges() * m.edge_dofs + t * m.interior_dofs + i;
      sgn[l] = 1.0;
    }
  }

  if (bc == BCMode::Mixed) {
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edge(e).tag != BoundaryTag::Neumann) continue;
      for (int row = 0; row < 2; ++row) {
        for (int p = 0; p < m.edge_dofs; ++p) {
          m.constrained.push_back(m.sigma_index(row, e * m.edge_dofs + p));
        }
      }
    }
    if (m.constrained.empty()) {
      throw Error(ErrorCategory::Configuration, "mixed boundary conditions need Neumann edges");
    }
    std::sort(m.constrained.begin(), m.constrained.end());
  }
  return m;
}

Discretization make_discretization(std::shared_ptr<const Mesh> mesh, SpaceDescriptor desc,
                                   BCMode bc) {
  Discretization d;
  d.desc = SpaceDescriptor::scheme(desc.ell, desc.k);
  d.bc = bc;
  d.stress_basis = ned_basis(d.desc.stress_family(), d.desc.stress_order());
  d.velocity_basis = pk_basis(d.desc.velocity_order());
  d.dofs = build_dofmap(*mesh, d.desc, bc);
  d.mesh = std::move(mesh);
  return d;
}

void eval_vector_basis(const Discretization& d, int t, const AffineMap& map, const Vec2& xhat,
                       std::span<Vec2> values, std::span<double> curls,
                       std::span<Mat2> jacobians) {
  const auto signs = d.dofs.signs(t);
  const Mat2 binv_t = map.Binv.transpose();
  if (!values.empty()) {
    d.stress_basis.eval(xhat, values);
    for (std::size_t i = 0; i < signs.size(); ++i) values[i] = signs[i] * (binv_t * values[i]);
  }
  if (!curls.empty()) {
    d.stress_basis.eval_curl(xhat, curls);
    for (std::size_t i = 0; i < signs.size(); ++i) curls[i] *= signs[i] / map.det;
  }
  if (!jacobians.empty()) {
    d.stress_basis.eval_jacobian(xhat, jacobians);
    for (std::size_t i = 0; i < signs.size(); ++i) {
      jacobians[i] = signs[i] * (binv_t * jacobians[i] * map.Binv);
    }
  }
}

Mat2 eval_stress(const Discretization& d, std::span<const double> sigma, int t, const Vec2& xhat) {
  const auto map = d.mesh->affine_map(t);
  std::vector<Vec2> vals(static_cast<std::size_t>(d.dofs.local_vec_dim));
  eval_vector_basis(d, t, map, xhat, vals, {});
  const auto idx = d.dofs.vec_dofs(t);
  Mat2 s = Mat2::Zero();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int row = 0; row < 2; ++row) {
      s.row(row) += sigma[static_cast<std::size_t>(d.dofs.sigma_index(row, idx[i]))] *
                    vals[i].transpose();
    }
  }
  return s;
}

Vec2 eval_stress_curl(const Discretization& d, std::span<const double> sigma, int t,
                      const Vec2& xhat) {
  const auto map = d.mesh->affine_map(t);
  std::vector<double> curls(static_cast<std::size_t>(d.dofs.local_vec_dim));
  eval_vector_basis(d, t, map, xhat, {}, curls);
  const auto idx = d.dofs.vec_dofs(t);
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int row = 0; row < 2; ++row) {
      c(row) += sigma[static_cast<std::size_t>(d.dofs.sigma_index(row, idx[i]))] * curls[i];
    }
  }
  return c;
}

std::array<Mat2, 2> eval_stress_gradient(const Discretization& d, std::span<const double> sigma,
                                         int t, const Vec2& xhat) {
  const auto map = d.mesh->affine_map(t);
  std::vector<Mat2> jac(static_cast<std::size_t>(d.dofs.local_vec_dim));
  eval_vector_basis(d, t, map, xhat, {}, {}, jac);
  const auto idx = d.dofs.vec_dofs(t);
  std::array<Mat2, 2> g{Mat2::Zero(), Mat2::Zero()};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int row = 0; row < 2; ++row) {
      g[static_cast<std::size_t>(row)] +=
          sigma[static_cast<std::size_t>(d.dofs.sigma_index(row, idx[i]))] * jac[i];
    }
  }
  return g;
}

Vec2 eval_velocity(const Discretization& d, std::span<const double> u, int t, const Vec2& xhat) {
  std::vector<double> phi(static_cast<std::size_t>(d.dofs.local_u_dim));
  d.velocity_basis.eval_scalar(xhat, phi);
  Vec2 v = Vec2::Zero();
  for (int q = 0; q < d.dofs.local_u_dim; ++q) {
    for (int c = 0; c < 2; ++c) {
      v(c) += u[static_cast<std::size_t>(d.dofs.u_index(t, c, q))] * phi[static_cast<std::size_t>(q)];
    }
  }
  return v;
}

Mat2 eval_velocity_gradient(const Discretization& d, std::span<const double> u, int t,
                            const Vec2& xhat) {
  const auto map = d.mesh->affine_map(t);
  std::vector<Vec2> grad(static_cast<std::size_t>(d.dofs.local_u_dim));
  d.velocity_basis.eval_gradient(xhat, grad);
  Mat2 g = Mat2::Zero();
  for (int q = 0; q < d.dofs.local_u_dim; ++q) {
    const Vec2 gp = map.Binv.transpose() * grad[static_cast<std::size_t>(q)];
    for (int c = 0; c < 2; ++c) {
      g.row(c) += u[static_cast<std::size_t>(d.dofs.u_index(t, c, q))] * gp.transpose();
    }
  }
  return g;
}

Eigen::VectorXd interpolate_ned(const Discretization& d, const TensorField& tau) {
  const auto& mesh = *d.mesh;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(d.dofs.n_sigma);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = mesh.affine_map(t);
    const auto idx = d.dofs.vec_dofs(t);
    const auto sgn = d.dofs.signs(t);
    for (int row = 0; row < 2; ++row) {
      // Covariant pullback of one tensor row.
      auto pulled = [&](const Vec2& xhat) -> Vec2 {
        const Vec2 r = tau(map.to_physical(xhat)).row(row).transpose();
        return map.B.transpose() * r;
      };
      const Eigen::VectorXd local = d.stress_basis.apply_dofs(pulled, kMaxTriangleDegree);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        coeffs(d.dofs.sigma_index(row, idx[i])) = sgn[i] * local(static_cast<Eigen::Index>(i));
      }
    }
  }
  return coeffs;
}

Eigen::VectorXd l2_project_velocity(const Discretization& d, const VectorField& v) {
  const auto& mesh = *d.mesh;
  const auto& rule = triangle_quadrature(kMaxTriangleDegree);
  const int n = d.dofs.local_u_dim;
  // The reference mass matrix is the same on every triangle up to |det B|.
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::VectorXd> phi(rule.size(), Eigen::VectorXd(n));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    d.velocity_basis.eval_scalar(rule.points[q], {phi[q].data(), static_cast<std::size_t>(n)});
    mass += rule.weights[q] * phi[q] * phi[q].transpose();
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(mass);
  Eigen::VectorXd coeffs(d.dofs.n_u);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = mesh.affine_map(t);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 f = v(map.to_physical(rule.points[q]));
      rhs.col(0) += rule.weights[q] * f(0) * phi[q];
      rhs.col(1) += rule.weights[q] * f(1) * phi[q];
    }
    const Eigen::MatrixXd c = llt.solve(rhs);
    for (int comp = 0; comp < 2; ++comp) {
      for (int i = 0; i < n; ++i) coeffs(d.dofs.u_index(t, comp, i)) = c(i, comp);
    }
  }
  return coeffs;
}

}  // namespace nedstokes
