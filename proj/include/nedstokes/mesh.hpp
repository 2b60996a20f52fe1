#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nedstokes/tensor.hpp"

namespace nedstokes {

enum class BoundaryTag : std::uint8_t { Interior = 0, Dirichlet = 1, Neumann = 2 };

/// Vertices are counter-clockwise. Local edge i is opposite local vertex i.
/// Vertex 0 is the newest vertex, so edge 0 is the refinement edge.
struct Triangle {
  std::array<int, 3> v{};
  std::array<int, 3> e{};
  /// Triangle of the coarser mesh this one was cut from (-1 for an initial mesh).
  int parent = -1;
};

/// Vertex ids are stored ascending; v[0] -> v[1] is the global tangent direction.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> tri{-1, -1};
  BoundaryTag tag = BoundaryTag::Interior;

  bool is_boundary() const { return tri[1] < 0; }
};

/// x = origin + B xhat maps the reference triangle onto a mesh triangle.
struct AffineMap {
  Vec2 origin;
  Mat2 B;
  Mat2 Binv;
  double det = 0.0;

  Vec2 to_physical(const Vec2& xhat) const { return origin + B * xhat; }
  Vec2 to_reference(const Vec2& x) const { return Binv * (x - origin); }
};

/// Boundary tag for the boundary edge joining two vertex ids.
using TagFunction = std::function<BoundaryTag(int, int)>;

/// Conforming triangulation. Immutable once built.
class Mesh {
 public:
  Mesh() = default;

  /// Builds edges and adjacency from triangle vertex triples. Clockwise triples are
  /// flipped (keeping vertex 0). Boundary edges are tagged by `tag`, Dirichlet if empty.
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       const TagFunction& tag = {}, std::vector<int> parents = {});

  /// Assembles a mesh from explicit entity lists (file input, edge renumbering).
  /// Recomputes adjacency and throws InvalidInput when the lists are inconsistent.
  static Mesh from_entities(std::vector<Vec2> vertices, std::vector<Edge> edges,
                            std::vector<Triangle> triangles);

  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const Vec2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Edge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  const Triangle& triangle(int i) const { return triangles_[static_cast<std::size_t>(i)]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  double area(int t) const;
  double signed_area(int t) const;
  Vec2 centroid(int t) const;
  /// Longest edge of the triangle.
  double diameter(int t) const;
  double edge_length(int e) const;
  /// Unit tangent from edge.v[0] to edge.v[1].
  Vec2 edge_tangent(int e) const;
  /// Unit normal, the tangent rotated clockwise.
  Vec2 edge_normal(int e) const;
  AffineMap affine_map(int t) const;
  double total_area() const;

  /// Throws InvalidInput describing the first violated invariant.
  void check_invariants() const;

 private:
  void build_edges(const TagFunction& tag);

  std::vector<Vec2> vertices_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
};

enum class SquareDomain { UnitSquare, BiUnitSquare };

/// Uniform: every cell split bottom-left -> top-right.
/// Outward / Inward: each cell diagonal lies along the ray from the domain centre
/// (Outward) or across it (Inward). Both keep the full symmetry group of the
/// square, which the exact double eigenvalue needs; Uniform keeps only half of it.
enum class DiagonalPattern { Uniform, Outward, Inward };

Mesh build_square_mesh(int n, SquareDomain domain,
                       DiagonalPattern pattern = DiagonalPattern::Uniform);

/// Unit disk from n concentric rings; ring r carries 6r vertices, 6n^2 triangles.
Mesh build_circle_mesh(int n);

/// (-1,1)^2 minus [-1,0]^2, three n x n blocks of split squares.
Mesh build_lshape_mesh(int n);

/// Copy of `mesh` with every boundary edge retagged from its endpoint coordinates.
Mesh retag_boundary(const Mesh& mesh,
                    const std::function<BoundaryTag(const Vec2&, const Vec2&)>& tag);

/// Bottom side (y = ymin) Dirichlet, every other boundary edge Neumann.
Mesh tag_bottom_dirichlet(const Mesh& mesh);

/// Newest-vertex bisection with closure: each marked triangle is bisected at least
/// once and the result is conforming.
Mesh refine(const Mesh& mesh, std::span<const int> marked);

/// Edge `i` becomes edge `perm[i]`. Geometry and orientation are unchanged.
Mesh renumber_edges(const Mesh& mesh, std::span<const int> perm);

struct Patch {
  enum class Center { Vertex, Edge, Triangle };
  Center center = Center::Vertex;
  int id = -1;
  std::vector<int> triangles;
  double measure = 0.0;
};

struct Patches {
  std::vector<Patch> vertex;
  std::vector<Patch> edge;
};

/// Vertex patches omega_z and edge patches omega_e.
Patches patches(const Mesh& mesh);

/// Brute-force check that no vertex lies inside an edge it is not an endpoint of.
bool has_hanging_vertices(const Mesh& mesh);

/// Smallest interior angle over all triangles, in radians.
double min_angle(const Mesh& mesh);

void write_mesh(const Mesh& mesh, std::ostream& os);
Mesh read_mesh(std::istream& is);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace nedstokes
