#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "nedstokes/assembly.hpp"
#include "nedstokes/error.hpp"

using namespace nedstokes;

namespace {

Discretization disc(Mesh m, int ell, int k, BCMode bc = BCMode::AllDirichlet) {
  return make_discretization(std::make_shared<const Mesh>(std::move(m)), SpaceDescriptor::scheme(ell, k), bc);
}

const SpaceDescriptor kSchemes[] = {{1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};

}  // namespace

TEST(Assembly, TensorIdentities) {
  const Mat2 j = tensor::J();
  EXPECT_EQ(tensor::contract(j, j), 2.0);
  EXPECT_EQ(tensor::dev_r(j).norm(), 0.0);
  EXPECT_EQ(tensor::dev_r(Mat2::Identity()), Mat2::Identity());
  Mat2 t;
  t << 1.5, -2.0, 0.7, 3.0;
  EXPECT_NEAR(tensor::contract(tensor::dev_r(t), j), 0.0, 1e-15);
  EXPECT_LT((tensor::dev_r(tensor::dev_r(t)) - tensor::dev_r(t)).norm(), 1e-15);
  EXPECT_LT((tensor::dev_r(t) - 0.5 * (t + t.transpose())).norm(), 1e-15);
}

TEST(Assembly, VelocityMassOnTwoTriangles) {
  const auto d = disc(build_square_mesh(1, SquareDomain::UnitSquare), 1, 0);
  const auto f = assemble_forms(d, 1.0);
  EXPECT_LT((f.M.to_dense() - 0.5 * Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-15);
}

TEST(Assembly, CurlBlockMatchesStokesTheorem) {
  // int_T curl(psi_e) = circulation of psi_e around T: +-1 for the lowest order,
  // + when the global edge direction agrees with the counter-clockwise boundary.
  const auto d = disc(build_circle_mesh(2), 1, 0);
  const auto f = assemble_forms(d, 1.0);
  const auto& mesh = *d.mesh;
  const Eigen::MatrixXd b = f.B.to_dense();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int a = tri.v[(i + 1) % 3], c = tri.v[(i + 2) % 3];  // CCW traversal a -> c
      const auto& e = mesh.edge(tri.e[i]);
      const double expected = e.v[0] == a && e.v[1] == c ? 1.0 : -1.0;
      for (int comp = 0; comp < 2; ++comp) {
        EXPECT_NEAR(b(d.dofs.u_index(t, comp, 0), d.dofs.sigma_index(comp, tri.e[i])), expected, 1e-13);
        EXPECT_EQ(b(d.dofs.u_index(t, comp, 0), d.dofs.sigma_index(1 - comp, tri.e[i])), 0.0);
      }
    }
  }
}

TEST(Assembly, JModeIsInTheKernelOfAAndB) {
  for (const auto& s : kSchemes) {
    const auto d = disc(build_lshape_mesh(2), s.ell, s.k);
    const auto f = assemble_forms(d, 1.0);
    const auto jh = interpolate_ned(d, [](const Vec2&) { return tensor::J(); });
    EXPECT_LT(matvec(f.A, jh).cwiseAbs().maxCoeff(), 1e-12) << s.name();
    EXPECT_LT(matvec(f.B, jh).cwiseAbs().maxCoeff(), 1e-12) << s.name();
    EXPECT_NEAR(f.j.dot(jh), 2.0 * 3.0, 1e-12) << s.name();
  }
}

TEST(Assembly, BlockDefiniteness) {
  const auto d = disc(build_square_mesh(2, SquareDomain::UnitSquare), 1, 1);
  const auto f = assemble_forms(d, 1.0);
  EXPECT_TRUE(f.A.is_symmetric(1e-14));
  EXPECT_TRUE(f.M.is_symmetric(1e-14));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(f.A.to_dense());
  EXPECT_GT(ea.eigenvalues().minCoeff(), -1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(f.M.to_dense());
  EXPECT_GT(em.eigenvalues().minCoeff(), 0.0);
}

TEST(Assembly, PencilStructure) {
  for (const auto& s : kSchemes) {
    const auto d = disc(build_square_mesh(4, SquareDomain::BiUnitSquare), s.ell, s.k);
    const auto p = build_pencil(assemble_forms(d, 1.0), d, true);
    EXPECT_EQ(p.size(), d.dofs.n_sigma + d.dofs.n_u + 1);
    EXPECT_TRUE(p.K.is_symmetric(1e-12)) << s.name();
    EXPECT_TRUE(p.N.is_symmetric(1e-14));
    for (int r = 0; r < p.N.rows(); ++r) {
      for (int q = p.N.row_ptr()[r]; q < p.N.row_ptr()[r + 1]; ++q) {
        EXPECT_GE(r, p.u_offset());
        EXPECT_LT(r, p.u_offset() + p.n_u);
      }
    }
  }
}

TEST(Assembly, KIsNonsingularAndTheBorderedSolveIsExact) {
  const auto d = disc(build_square_mesh(3, SquareDomain::BiUnitSquare), 1, 1);
  const auto p = build_pencil(assemble_forms(d, 1.0), d);
  const Eigen::MatrixXd k = p.K.to_dense();
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p.size(), -1.0, 2.0);
  const Eigen::VectorXd b = k * x;
  for (double theta : {0.0, 3.5}) {
    const PencilFactorization f(p, theta);
    const Eigen::MatrixXd shifted = k - theta * p.N.to_dense();
    const Eigen::VectorXd rhs = shifted * x;
    EXPECT_LT((f.solve(rhs) - x).norm(), 1e-9 * x.norm());
  }
  // Only x = 0 solves K x = 0.
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  EXPECT_EQ(lu.rank(), p.size());
  (void)b;
}

TEST(Assembly, MixedBoundaryConditionsEliminateNeumannStress) {
  const auto d = disc(tag_bottom_dirichlet(build_square_mesh(3, SquareDomain::UnitSquare)), 1, 0, BCMode::Mixed);
  const auto p = build_pencil(assemble_forms(d, 1.0), d, true);
  EXPECT_EQ(p.n_c, 0);
  EXPECT_EQ(p.n_sigma(), d.dofs.n_sigma - static_cast<int>(d.dofs.constrained.size()));
  EXPECT_EQ(p.size(), p.n_sigma() + d.dofs.n_u);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(p.size());
  const auto full = p.expand_sigma(x);
  for (int c : d.dofs.constrained) EXPECT_EQ(full(c), 0.0);
}

TEST(Assembly, CooExport) {
  const auto d = disc(build_square_mesh(1, SquareDomain::UnitSquare), 1, 0);
  const auto p = build_pencil(assemble_forms(d, 1.0), d);
  const auto dir = std::filesystem::temp_directory_path() / "nedstokes_coo_test";
  export_pencil_coo(p, dir);
  std::ifstream is(dir / "N.coo");
  int i, j;
  double v;
  int count = 0;
  while (is >> i >> j >> v) {
    EXPECT_NEAR(v, -0.5, 1e-15);
    ++count;
  }
  EXPECT_EQ(count, 4);
  std::filesystem::remove_all(dir);
}

TEST(Assembly, InvalidViscosity) {
  const auto d = disc(build_square_mesh(1, SquareDomain::UnitSquare), 1, 0);
  EXPECT_THROW(assemble_forms(d, 0.0), Error);
}
