#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "nedstokes/error.hpp"
#include "nedstokes/mesh.hpp"

using namespace nedstokes;

namespace {

void expect_euler(const Mesh& m) {
  EXPECT_EQ(m.num_vertices() - m.num_edges() + m.num_triangles(), 1);
}

bool same_mesh(const Mesh& a, const Mesh& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() ||
      a.num_triangles() != b.num_triangles()) {
    return false;
  }
  for (int i = 0; i < a.num_vertices(); ++i) {
    if (a.vertex(i) != b.vertex(i)) return false;
  }
  for (int i = 0; i < a.num_edges(); ++i) {
    if (a.edge(i).v != b.edge(i).v || a.edge(i).tag != b.edge(i).tag) return false;
  }
  for (int i = 0; i < a.num_triangles(); ++i) {
    if (a.triangle(i).v != b.triangle(i).v || a.triangle(i).e != b.triangle(i).e) return false;
  }
  return true;
}

}  // namespace

TEST(Mesh, SquareCountsAndArea) {
  for (int n : {1, 2, 5, 8}) {
    for (auto pattern : {DiagonalPattern::Uniform, DiagonalPattern::Outward}) {
      const auto m = build_square_mesh(n, SquareDomain::BiUnitSquare, pattern);
      EXPECT_EQ(m.num_triangles(), 2 * n * n);
      EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1));
      expect_euler(m);
      m.check_invariants();
      EXPECT_NEAR(m.total_area(), 4.0, 1e-13);
      int boundary = 0;
      for (const auto& e : m.edges()) boundary += e.is_boundary();
      EXPECT_EQ(boundary, 4 * n);
    }
  }
}

TEST(Mesh, RefinementEdgeIsLongest) {
  const auto m = build_square_mesh(4, SquareDomain::UnitSquare, DiagonalPattern::Outward);
  for (int t = 0; t < m.num_triangles(); ++t) {
    EXPECT_NEAR(m.edge_length(m.triangle(t).e[0]), m.diameter(t), 1e-15);
  }
}

TEST(Mesh, CircleCountsAndArea) {
  for (int n : {1, 2, 3, 6}) {
    const auto m = build_circle_mesh(n);
    EXPECT_EQ(m.num_triangles(), 6 * n * n);
    expect_euler(m);
    m.check_invariants();
    const int s = 6 * n;
    const double polygon = 0.5 * s * std::sin(2.0 * std::numbers::pi / s);
    EXPECT_NEAR(m.total_area(), polygon, 1e-12);
    EXPECT_FALSE(has_hanging_vertices(m));
    EXPECT_GT(min_angle(m), 0.3);
  }
}

TEST(Mesh, LShapeCountsAndArea) {
  for (int n : {1, 2, 4}) {
    const auto m = build_lshape_mesh(n);
    EXPECT_EQ(m.num_triangles(), 6 * n * n);
    expect_euler(m);
    m.check_invariants();
    EXPECT_NEAR(m.total_area(), 3.0, 1e-13);
    for (int t = 0; t < m.num_triangles(); ++t) {
      const Vec2 c = m.centroid(t);
      EXPECT_FALSE(c(0) < 0 && c(1) < 0);
    }
  }
}

TEST(Mesh, BottomDirichletTagging) {
  const auto m = tag_bottom_dirichlet(build_square_mesh(3, SquareDomain::UnitSquare));
  int dir = 0, neu = 0;
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge(e).tag == BoundaryTag::Dirichlet) {
      ++dir;
      EXPECT_NEAR(m.vertex(m.edge(e).v[0])(1), 0.0, 1e-15);
    }
    neu += m.edge(e).tag == BoundaryTag::Neumann;
  }
  EXPECT_EQ(dir, 3);
  EXPECT_EQ(neu, 9);
}

TEST(Mesh, FileRoundTripIsExact) {
  const auto m = tag_bottom_dirichlet(build_circle_mesh(3));
  std::stringstream ss;
  write_mesh(m, ss);
  const auto r = read_mesh(ss);
  EXPECT_TRUE(same_mesh(m, r));
  std::stringstream again;
  write_mesh(r, again);
  std::stringstream first;
  write_mesh(m, first);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Mesh, MalformedFilesAreRejected) {
  const char* bad[] = {
      "3 3",
      "3 3 1\n0 0\n1 0\n0 1\n0 1 1\n0 2 1\n1 2 1\n0 1 2 0 1 2\n",  // edge list order wrong
      "3 3 1\n0 0\n1 0\n0 1\n0 1 1\n0 2 1\n1 2 7\n0 1 2 2 1 0\n",  // bad tag
      "3 3 1\n0 0\n0 1\n1 0\n1 2 1\n0 2 1\n0 1 1\n0 1 2 0 1 2\n",  // clockwise
  };
  for (const char* text : bad) {
    std::istringstream is(text);
    try {
      (void)read_mesh(is);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::InvalidInput);
    }
  }
  std::istringstream good("3 3 1\n0 0\n1 0\n0 1\n1 2 1\n0 2 1\n0 1 1\n0 1 2 0 1 2\n");
  EXPECT_EQ(read_mesh(good).num_triangles(), 1);
}

TEST(Mesh, RefinementIsConformingAndPreservesArea) {
  std::mt19937 rng(7);
  auto m = build_lshape_mesh(2);
  for (int it = 0; it < 8; ++it) {
    std::vector<int> marked;
    std::uniform_int_distribution<int> pick(0, m.num_triangles() - 1);
    for (int i = 0; i < 1 + m.num_triangles() / 5; ++i) marked.push_back(pick(rng));
    const auto r = refine(m, marked);
    r.check_invariants();
    expect_euler(r);
    EXPECT_FALSE(has_hanging_vertices(r));
    EXPECT_NEAR(r.total_area(), 3.0, 1e-12);
    // Every marked triangle has been cut.
    std::vector<int> children(static_cast<std::size_t>(m.num_triangles()), 0);
    for (const auto& t : r.triangles()) ++children[static_cast<std::size_t>(t.parent)];
    for (int t : marked) EXPECT_GE(children[static_cast<std::size_t>(t)], 2);
    m = r;
  }
  EXPECT_GT(min_angle(m), 0.3);
}

TEST(Mesh, RefinementKeepsBoundaryTags) {
  const auto m = tag_bottom_dirichlet(build_square_mesh(2, SquareDomain::UnitSquare));
  std::vector<int> all(static_cast<std::size_t>(m.num_triangles()));
  std::iota(all.begin(), all.end(), 0);
  // Legs are only cut by the second bisection sweep.
  auto r = refine(m, all);
  all.resize(static_cast<std::size_t>(r.num_triangles()));
  std::iota(all.begin(), all.end(), 0);
  r = refine(r, all);
  int dir = 0;
  for (const auto& e : r.edges()) {
    if (e.tag == BoundaryTag::Dirichlet) {
      ++dir;
      EXPECT_EQ(r.vertex(e.v[0])(1), 0.0);
      EXPECT_EQ(r.vertex(e.v[1])(1), 0.0);
    }
  }
  EXPECT_EQ(dir, 4);
}

TEST(Mesh, UniformBisectionTwiceQuartersTriangles) {
  auto m = build_square_mesh(2, SquareDomain::UnitSquare);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<int> all(static_cast<std::size_t>(m.num_triangles()));
    std::iota(all.begin(), all.end(), 0);
    m = refine(m, all);
  }
  EXPECT_EQ(m.num_triangles(), 8 * 4);
}

TEST(Mesh, EdgeRenumbering) {
  const auto m = build_circle_mesh(2);
  std::vector<int> perm(static_cast<std::size_t>(m.num_edges()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  const auto r = renumber_edges(m, perm);
  r.check_invariants();
  for (int e = 0; e < m.num_edges(); ++e) EXPECT_EQ(m.edge(e).v, r.edge(perm[static_cast<std::size_t>(e)]).v);
}

TEST(Mesh, Patches) {
  const auto m = build_square_mesh(3, SquareDomain::UnitSquare);
  const auto p = patches(m);
  double total = 0.0;
  for (const auto& z : p.vertex) total += z.measure;
  EXPECT_NEAR(total, 3.0, 1e-13);  // every triangle counted once per vertex
  for (int e = 0; e < m.num_edges(); ++e) {
    EXPECT_EQ(p.edge[static_cast<std::size_t>(e)].triangles.size(), m.edge(e).is_boundary() ? 1u : 2u);
  }
}
