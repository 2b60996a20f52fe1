#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"
#include "nedstokes/spaces.hpp"

using namespace nedstokes;

namespace {

std::shared_ptr<const Mesh> square(int n, SquareDomain dom = SquareDomain::UnitSquare) {
  return std::make_shared<const Mesh>(build_square_mesh(n, dom));
}

std::shared_ptr<const Mesh> single_triangle() {
  return std::make_shared<const Mesh>(
      std::vector<Vec2>{Vec2(0.1, 0.2), Vec2(1.3, 0.4), Vec2(0.5, 1.1)},
      std::vector<std::array<int, 3>>{{0, 1, 2}});
}

const SpaceDescriptor kSchemes[] = {{1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};

// Smooth tensor field and its row-wise curl.
Mat2 smooth_tau(const Vec2& x) {
  Mat2 m;
  m << std::sin(x(1)), x(0) * x(0), std::cos(x(0) * x(1)), x(0) - x(1) * x(1) * x(1);
  return m;
}
Vec2 smooth_tau_curl(const Vec2& x) {
  // curl(a, b) = d1 b - d2 a
  return Vec2(2 * x(0) - std::cos(x(1)), 1.0 + x(0) * std::sin(x(0) * x(1)));
}

double stress_l2_error(const Discretization& d, const Eigen::VectorXd& c, const TensorField& f) {
  const auto& rule = triangle_quadrature(kMaxTriangleDegree);
  double err = 0.0;
  for (int t = 0; t < d.mesh->num_triangles(); ++t) {
    const auto map = d.mesh->affine_map(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Mat2 diff = eval_stress(d, {c.data(), static_cast<std::size_t>(c.size())}, t, rule.points[q]) -
                        f(map.to_physical(rule.points[q]));
      err += rule.weights[q] * std::abs(map.det) * diff.squaredNorm();
    }
  }
  return std::sqrt(err);
}

}  // namespace

TEST(Spaces, CountsOnTwoTriangles) {
  const auto d = make_discretization(square(1), SpaceDescriptor::scheme(1, 0));
  EXPECT_EQ(d.dofs.n_vec, 5);
  EXPECT_EQ(d.dofs.n_sigma, 10);
  EXPECT_EQ(d.dofs.n_u, 4);
  EXPECT_TRUE(d.dofs.constrained.empty());
  const auto d2 = make_discretization(square(3), SpaceDescriptor::scheme(2, 1));
  // Ned2 order 2: 3 per edge, 3 interior.
  EXPECT_EQ(d2.dofs.n_vec, 3 * d2.mesh->num_edges() + 3 * d2.mesh->num_triangles());
  EXPECT_EQ(d2.dofs.n_u, 2 * 18 * 3);
}

TEST(Spaces, UnsupportedSchemeAndMissingNeumann) {
  EXPECT_THROW((void)SpaceDescriptor::scheme(3, 0), Error);
  EXPECT_THROW((void)SpaceDescriptor::scheme(1, 3), Error);
  try {
    (void)build_dofmap(*square(2), SpaceDescriptor::scheme(1, 0), BCMode::Mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Configuration);
  }
}

TEST(Spaces, MixedModeConstrainsNeumannEdges) {
  auto mesh = std::make_shared<const Mesh>(tag_bottom_dirichlet(build_square_mesh(2, SquareDomain::UnitSquare)));
  const auto d = make_discretization(mesh, SpaceDescriptor::scheme(1, 1), BCMode::Mixed);
  // 6 Neumann edges, 2 DOFs each, 2 rows.
  EXPECT_EQ(d.dofs.constrained.size(), 24u);
}

TEST(Spaces, TangentialTraceIsContinuous) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (const auto& scheme : kSchemes) {
    const auto d = make_discretization(std::make_shared<const Mesh>(build_circle_mesh(2)), scheme);
    Eigen::VectorXd c(d.dofs.n_sigma);
    for (auto& v : c) v = dist(rng);
    const std::span<const double> cs(c.data(), static_cast<std::size_t>(c.size()));
    const auto& mesh = *d.mesh;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto& ed = mesh.edge(e);
      if (ed.is_boundary()) continue;
      const Vec2 a = mesh.vertex(ed.v[0]), b = mesh.vertex(ed.v[1]);
      const Vec2 tangent = mesh.edge_tangent(e);
      for (double s : {0.15, 0.5, 0.8}) {
        const Vec2 x = a + s * (b - a);
        const auto m0 = mesh.affine_map(ed.tri[0]);
        const Vec2 t0 = eval_stress(d, cs, ed.tri[0], m0.to_reference(x)) * tangent;
        const Vec2 t1 = eval_stress(d, cs, ed.tri[1], mesh.affine_map(ed.tri[1]).to_reference(x)) * tangent;
        // Roundoff scale: sum of |c_i| |phi_i(x)| over the local basis.
        std::vector<Vec2> vals(static_cast<std::size_t>(d.dofs.local_vec_dim));
        eval_vector_basis(d, ed.tri[0], m0, m0.to_reference(x), vals, {});
        double scale = 0.0;
        const auto idx = d.dofs.vec_dofs(ed.tri[0]);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          scale += (std::abs(c(idx[i])) + std::abs(c(d.dofs.sigma_index(1, idx[i])))) * vals[i].norm();
        }
        EXPECT_LT((t0 - t1).norm(), 1e-12 * scale) << scheme.name();
      }
    }
  }
}

TEST(Spaces, InterpolationReproducesConstantsAndWhitneyFields) {
  Mat2 c;
  c << 1.5, -2.0, 0.25, 3.0;
  for (const auto& s : kSchemes) {
    const auto d = make_discretization(square(3), s);
    const auto coeff = interpolate_ned(d, [&](const Vec2&) { return c; });
    EXPECT_LT(stress_l2_error(d, coeff, [&](const Vec2&) { return c; }), 1e-12) << s.name();
  }
  // Rows (y, -x) and (1, 2) lie in the lowest-order space.
  const auto d = make_discretization(single_triangle(), SpaceDescriptor::scheme(1, 0));
  auto f = [](const Vec2& x) {
    Mat2 m;
    m << x(1), -x(0), 1.0, 2.0;
    return m;
  };
  EXPECT_LT(stress_l2_error(d, interpolate_ned(d, f), f), 1e-13);
}

TEST(Spaces, InterpolationIsIdempotent) {
  for (const auto& s : kSchemes) {
    const auto d = make_discretization(square(2), s);
    const auto c1 = interpolate_ned(d, smooth_tau);
    const std::span<const double> cs(c1.data(), static_cast<std::size_t>(c1.size()));
    // Evaluate the interpolant and interpolate again, triangle by triangle.
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(c1.size());
    for (int t = 0; t < d.mesh->num_triangles(); ++t) {
      auto single = d;
      auto on_t = [&](const Vec2& x) { return eval_stress(d, cs, t, d.mesh->affine_map(t).to_reference(x)); };
      const auto ct = interpolate_ned(single, on_t);
      for (int i : d.dofs.vec_dofs(t)) {
        for (int row = 0; row < 2; ++row) c2(d.dofs.sigma_index(row, i)) = ct(d.dofs.sigma_index(row, i));
      }
    }
    EXPECT_LT((c1 - c2).cwiseAbs().maxCoeff(), 1e-11) << s.name();
  }
}

TEST(Spaces, CommutingDiagram) {
  const auto& rule = triangle_quadrature(6);
  for (const auto& s : kSchemes) {
    const auto d = make_discretization(square(4), s);
    const auto sigma = interpolate_ned(d, smooth_tau);
    const auto rcurl = l2_project_velocity(d, smooth_tau_curl);
    const std::span<const double> ss(sigma.data(), static_cast<std::size_t>(sigma.size()));
    const std::span<const double> rs(rcurl.data(), static_cast<std::size_t>(rcurl.size()));
    double worst = 0.0;
    for (int t = 0; t < d.mesh->num_triangles(); ++t) {
      for (const auto& xhat : rule.points) {
        worst = std::max(worst, (eval_stress_curl(d, ss, t, xhat) - eval_velocity(d, rs, t, xhat)).norm());
      }
    }
    EXPECT_LT(worst, 1e-10) << s.name();
  }
}

TEST(Spaces, InterpolationErrorOrder) {
  for (const auto& s : kSchemes) {
    double prev = 0.0;
    for (int n : {4, 8, 16}) {
      const auto d = make_discretization(square(n), s);
      const double err = stress_l2_error(d, interpolate_ned(d, smooth_tau), smooth_tau);
      if (prev > 0.0) {
        // Ned1_k has full order k+1 in L2; Ned2_{k+1} has order k+2.
        const double expected = s.ell + s.k;
        EXPECT_GT(std::log2(prev / err), expected - 0.2) << s.name() << " N=" << n;
      }
      prev = err;
    }
  }
}

TEST(Spaces, VelocityProjection) {
  const auto d = make_discretization(single_triangle(), SpaceDescriptor::scheme(1, 0));
  const auto c = l2_project_velocity(d, [](const Vec2& x) { return x; });
  const Vec2 centroid = d.mesh->centroid(0);
  EXPECT_NEAR(c(d.dofs.u_index(0, 0, 0)), centroid(0), 1e-14);
  EXPECT_NEAR(c(d.dofs.u_index(0, 1, 0)), centroid(1), 1e-14);

  const auto d2 = make_discretization(square(2), SpaceDescriptor::scheme(1, 2));
  auto f = [](const Vec2& x) { return Vec2(x(0) * x(0), x(0) * x(1)); };
  const auto c2 = l2_project_velocity(d2, f);
  const std::span<const double> cs(c2.data(), static_cast<std::size_t>(c2.size()));
  for (int t = 0; t < d2.mesh->num_triangles(); ++t) {
    const Vec2 xhat(0.2, 0.3);
    EXPECT_LT((eval_velocity(d2, cs, t, xhat) - f(d2.mesh->affine_map(t).to_physical(xhat))).norm(), 1e-12);
  }
}
