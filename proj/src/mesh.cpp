#include "nedstokes/mesh.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "nedstokes/error.hpp"

namespace nedstokes {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::array<int, 2> local_edge(const std::array<int, 3>& v, int i) {
  return {v[static_cast<std::size_t>((i + 1) % 3)], v[static_cast<std::size_t>((i + 2) % 3)]};
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0)));
}

// Counter-clockwise order with the longest edge opposite vertex 0.
std::array<int, 3> label_longest_edge(std::array<int, 3> t, const std::vector<Vec2>& x) {
  if (orient(x[t[0]], x[t[1]], x[t[2]]) < 0.0) std::swap(t[1], t[2]);
  int best = 0;
  double best_len = -1.0;
  for (int i = 0; i < 3; ++i) {
    const auto [a, b] = local_edge(t, i);
    const double len = (x[a] - x[b]).norm();
    if (len > best_len * (1.0 + 1e-12)) {
      best_len = len;
      best = i;
    }
  }
  return {t[static_cast<std::size_t>(best)], t[static_cast<std::size_t>((best + 1) % 3)],
          t[static_cast<std::size_t>((best + 2) % 3)]};
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCategory::InvalidInput, "mesh: " + what);
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           const TagFunction& tag, std::vector<int> parents)
    : vertices_(std::move(vertices)) {
  if (!parents.empty() && parents.size() != triangles.size()) {
    invalid("parent list size mismatch");
  }
  triangles_.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto v = triangles[t];
    for (int id : v) {
      if (id < 0 || id >= static_cast<int>(vertices_.size())) invalid("vertex id out of range");
    }
    if (orient(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]) < 0.0) std::swap(v[1], v[2]);
    Triangle tri;
    tri.v = v;
    tri.parent = parents.empty() ? -1 : parents[t];
    triangles_.push_back(tri);
  }
  build_edges(tag);
}

void Mesh::build_edges(const TagFunction& tag) {
  edges_.clear();
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      auto [a, b] = local_edge(tri.v, i);
      const auto key = edge_key(a, b);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {std::min(a, b), std::max(a, b)};
        e.tri = {static_cast<int>(t), -1};
        edges_.push_back(e);
      } else {
        auto& e = edges_[static_cast<std::size_t>(it->second)];
        if (e.tri[1] >= 0) invalid("edge shared by more than two triangles");
        e.tri[1] = static_cast<int>(t);
      }
      tri.e[static_cast<std::size_t>(i)] = it->second;
    }
  }
  for (auto& e : edges_) {
    if (e.is_boundary()) {
      e.tag = tag ? tag(e.v[0], e.v[1]) : BoundaryTag::Dirichlet;
      if (e.tag == BoundaryTag::Interior) invalid("boundary edge tagged Interior");
    } else {
      e.tag = BoundaryTag::Interior;
    }
  }
}

Mesh Mesh::from_entities(std::vector<Vec2> vertices, std::vector<Edge> edges,
                         std::vector<Triangle> triangles) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.edges_ = std::move(edges);
  m.triangles_ = std::move(triangles);
  const int nv = m.num_vertices();
  std::unordered_map<std::uint64_t, int> lookup;
  for (std::size_t i = 0; i < m.edges_.size(); ++i) {
    auto& e = m.edges_[i];
    if (e.v[0] < 0 || e.v[1] >= nv || e.v[0] >= e.v[1]) invalid("edge vertices not ascending");
    if (!lookup.emplace(edge_key(e.v[0], e.v[1]), static_cast<int>(i)).second) {
      invalid("duplicate edge");
    }
    e.tri = {-1, -1};
  }
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& tri = m.triangles_[t];
    for (int i = 0; i < 3; ++i) {
      if (tri.v[static_cast<std::size_t>(i)] < 0 || tri.v[static_cast<std::size_t>(i)] >= nv) {
        invalid("triangle vertex out of range");
      }
    }
    for (int i = 0; i < 3; ++i) {
      const auto [a, b] = local_edge(tri.v, i);
      const auto it = lookup.find(edge_key(a, b));
      if (it == lookup.end() || it->second != tri.e[static_cast<std::size_t>(i)]) {
        invalid("triangle " + std::to_string(t) + " edge list does not match its vertices");
      }
      auto& e = m.edges_[static_cast<std::size_t>(it->second)];
      if (e.tri[0] < 0) {
        e.tri[0] = static_cast<int>(t);
      } else if (e.tri[1] < 0) {
        e.tri[1] = static_cast<int>(t);
      } else {
        invalid("edge shared by more than two triangles");
      }
    }
  }
  m.check_invariants();
  return m;
}

double Mesh::signed_area(int t) const {
  const auto& v = triangle(t).v;
  return orient(vertex(v[0]), vertex(v[1]), vertex(v[2]));
}

double Mesh::area(int t) const { return std::abs(signed_area(t)); }

Vec2 Mesh::centroid(int t) const {
  const auto& v = triangle(t).v;
  return (vertex(v[0]) + vertex(v[1]) + vertex(v[2])) / 3.0;
}

double Mesh::diameter(int t) const {
  double h = 0.0;
  for (int e : triangle(t).e) h = std::max(h, edge_length(e));
  return h;
}

double Mesh::edge_length(int e) const {
  const auto& ed = edge(e);
  return (vertex(ed.v[1]) - vertex(ed.v[0])).norm();
}

Vec2 Mesh::edge_tangent(int e) const {
  const auto& ed = edge(e);
  return (vertex(ed.v[1]) - vertex(ed.v[0])).normalized();
}

Vec2 Mesh::edge_normal(int e) const {
  const Vec2 t = edge_tangent(e);
  return Vec2(t(1), -t(0));
}

AffineMap Mesh::affine_map(int t) const {
  const auto& v = triangle(t).v;
  AffineMap map;
  map.origin = vertex(v[0]);
  map.B.col(0) = vertex(v[1]) - map.origin;
  map.B.col(1) = vertex(v[2]) - map.origin;
  map.det = map.B.determinant();
  map.Binv = map.B.inverse();
  return map;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += area(t);
  return a;
}

void Mesh::check_invariants() const {
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(signed_area(t) > 0.0)) invalid("triangle " + std::to_string(t) + " not counter-clockwise");
    const auto& tri = triangle(t);
    for (int i = 0; i < 3; ++i) {
      const auto [a, b] = local_edge(tri.v, i);
      const auto& e = edge(tri.e[static_cast<std::size_t>(i)]);
      if (e.v[0] != std::min(a, b) || e.v[1] != std::max(a, b)) {
        invalid("triangle " + std::to_string(t) + " local edge mismatch");
      }
      if (e.tri[0] != t && e.tri[1] != t) invalid("edge adjacency misses triangle");
    }
  }
  for (int i = 0; i < num_edges(); ++i) {
    const auto& e = edge(i);
    if (e.v[0] >= e.v[1]) invalid("edge " + std::to_string(i) + " vertices not ascending");
    if (e.tri[0] < 0) invalid("edge " + std::to_string(i) + " has no triangle");
    if (e.is_boundary() != (e.tag != BoundaryTag::Interior)) {
      invalid("edge " + std::to_string(i) + " boundary tag inconsistent with adjacency");
    }
  }
  if (num_vertices() - num_edges() + num_triangles() != 1) invalid("Euler relation V - E + T = 1 fails");
}

Mesh build_square_mesh(int n, SquareDomain domain, DiagonalPattern pattern) {
  if (n < 1) throw Error(ErrorCategory::Configuration, "square mesh needs N >= 1");
  const double lo = domain == SquareDomain::UnitSquare ? 0.0 : -1.0;
  const double hi = 1.0;
  const double mid = 0.5 * (lo + hi);
  const double h = (hi - lo) / n;
  std::vector<Vec2> x;
  x.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // Exact end points so boundary coordinates compare cleanly.
      const double xi = i == n ? hi : lo + i * h;
      const double yj = j == n ? hi : lo + j * h;
      x.emplace_back(xi, yj);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      bool forward = true;
      if (pattern != DiagonalPattern::Uniform) {
        const double cx = lo + (i + 0.5) * h - mid;
        const double cy = lo + (j + 0.5) * h - mid;
        forward = cx * cy >= -1e-14;
        if (pattern == DiagonalPattern::Inward) forward = !forward;
      }
      if (forward) {
        tris.push_back(label_longest_edge({a, b, c}, x));
        tris.push_back(label_longest_edge({a, c, d}, x));
      } else {
        tris.push_back(label_longest_edge({a, b, d}, x));
        tris.push_back(label_longest_edge({b, c, d}, x));
      }
    }
  }
  return Mesh(std::move(x), std::move(tris));
}

Mesh build_circle_mesh(int n) {
  if (n < 1) throw Error(ErrorCategory::Configuration, "circle mesh needs N >= 1");
  std::vector<Vec2> x;
  x.emplace_back(0.0, 0.0);
  auto ring_start = [](int r) { return r == 0 ? 0 : 1 + 3 * r * (r - 1); };
  auto ring_size = [](int r) { return r == 0 ? 1 : 6 * r; };
  for (int r = 1; r <= n; ++r) {
    const double radius = static_cast<double>(r) / n;
    const int m = 6 * r;
    for (int j = 0; j < m; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / m;
      x.emplace_back(radius * std::cos(theta), radius * std::sin(theta));
    }
  }
  std::vector<std::array<int, 3>> tris;
  for (int r = 1; r <= n; ++r) {
    const int nin = ring_size(r - 1);
    const int nout = ring_size(r);
    auto in = [&](int a) { return ring_start(r - 1) + (r == 1 ? 0 : a % nin); };
    auto out = [&](int b) { return ring_start(r) + b % nout; };
    if (r == 1) {
      for (int b = 0; b < nout; ++b) tris.push_back(label_longest_edge({in(0), out(b), out(b + 1)}, x));
      continue;
    }
    // Merge the two rings by angle; angles compared exactly as rationals.
    int a = 0, b = 0;
    while (a < nin || b < nout) {
      const bool advance_outer =
          a == nin || (b < nout && static_cast<long>(b + 1) * nin <= static_cast<long>(a + 1) * nout);
      if (advance_outer) {
        tris.push_back(label_longest_edge({in(a), out(b), out(b + 1)}, x));
        ++b;
      } else {
        tris.push_back(label_longest_edge({in(a), out(b), in(a + 1)}, x));
        ++a;
      }
    }
  }
  return Mesh(std::move(x), std::move(tris));
}

Mesh build_lshape_mesh(int n) {
  if (n < 1) throw Error(ErrorCategory::Configuration, "L-shape mesh needs N >= 1");
  const int m = 2 * n;
  const double h = 2.0 / m;
  std::vector<int> ids(static_cast<std::size_t>((m + 1) * (m + 1)), -1);
  std::vector<Vec2> x;
  auto coord = [&](int i) { return i == n ? 0.0 : (i == m ? 1.0 : -1.0 + i * h); };
  auto inside = [n](int i, int j) { return !(i < n && j < n); };  // cell (i,j)
  auto vid = [&](int i, int j) {
    auto& slot = ids[static_cast<std::size_t>(j * (m + 1) + i)];
    if (slot < 0) {
      slot = static_cast<int>(x.size());
      x.emplace_back(coord(i), coord(j));
    }
    return slot;
  };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (!inside(i, j)) continue;
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  for (auto& t : tris) t = label_longest_edge(t, x);
  return Mesh(std::move(x), std::move(tris));
}

Mesh retag_boundary(const Mesh& mesh,
                    const std::function<BoundaryTag(const Vec2&, const Vec2&)>& tag) {
  std::vector<Edge> edges(mesh.edges().begin(), mesh.edges().end());
  for (auto& e : edges) {
    if (e.is_boundary()) e.tag = tag(mesh.vertex(e.v[0]), mesh.vertex(e.v[1]));
  }
  return Mesh::from_entities({mesh.vertices().begin(), mesh.vertices().end()}, std::move(edges),
                             {mesh.triangles().begin(), mesh.triangles().end()});
}

Mesh tag_bottom_dirichlet(const Mesh& mesh) {
  double ymin = std::numeric_limits<double>::infinity();
  for (const auto& p : mesh.vertices()) ymin = std::min(ymin, p(1));
  return retag_boundary(mesh, [ymin](const Vec2& a, const Vec2& b) {
    const bool bottom = std::abs(a(1) - ymin) < 1e-12 && std::abs(b(1) - ymin) < 1e-12;
    return bottom ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  });
}

Mesh refine(const Mesh& mesh, std::span<const int> marked) {
  const int nt = mesh.num_triangles();
  std::vector<char> cut(static_cast<std::size_t>(mesh.num_edges()), 0);
  for (int t : marked) {
    if (t < 0 || t >= nt) throw Error(ErrorCategory::InvalidInput, "refine: triangle id out of range");
    cut[static_cast<std::size_t>(mesh.triangle(t).e[0])] = 1;
  }
  // Closure: a triangle with any cut edge must also cut its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& tri : mesh.triangles()) {
      auto& ref = cut[static_cast<std::size_t>(tri.e[0])];
      if (!ref && (cut[static_cast<std::size_t>(tri.e[1])] || cut[static_cast<std::size_t>(tri.e[2])])) {
        ref = 1;
        changed = true;
      }
    }
  }

  std::vector<Vec2> x(mesh.vertices().begin(), mesh.vertices().end());
  std::unordered_map<std::uint64_t, int> midpoint;
  std::vector<int> midpoint_parent_edge;  // indexed by new vertex id - old count
  const int nv_old = mesh.num_vertices();
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!cut[static_cast<std::size_t>(e)]) continue;
    const auto& ed = mesh.edge(e);
    midpoint.emplace(edge_key(ed.v[0], ed.v[1]), static_cast<int>(x.size()));
    x.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
    midpoint_parent_edge.push_back(e);
  }

  std::vector<std::array<int, 3>> tris;
  std::vector<int> parents;
  tris.reserve(static_cast<std::size_t>(nt) + 3 * marked.size());
  auto split = [&](auto&& self, const std::array<int, 3>& v, int parent) -> void {
    const auto it = midpoint.find(edge_key(v[1], v[2]));
    if (it == midpoint.end()) {
      tris.push_back(v);
      parents.push_back(parent);
      return;
    }
    const int m = it->second;
    self(self, {m, v[0], v[1]}, parent);
    self(self, {m, v[2], v[0]}, parent);
  };
  for (int t = 0; t < nt; ++t) split(split, mesh.triangle(t).v, t);

  // Old edges keep their tag; halves of a cut edge inherit it.
  std::unordered_map<std::uint64_t, BoundaryTag> old_tags;
  for (const auto& e : mesh.edges()) {
    if (e.is_boundary()) old_tags.emplace(edge_key(e.v[0], e.v[1]), e.tag);
  }
  auto tag = [&](int a, int b) {
    if (const auto it = old_tags.find(edge_key(a, b)); it != old_tags.end()) return it->second;
    const int m = std::max(a, b);
    if (m >= nv_old) {
      const int pe = midpoint_parent_edge[static_cast<std::size_t>(m - nv_old)];
      return mesh.edge(pe).tag;
    }
    throw Error(ErrorCategory::Assembly, "refine: boundary edge without a parent");
  };
  return Mesh(std::move(x), std::move(tris), tag, std::move(parents));
}

Mesh renumber_edges(const Mesh& mesh, std::span<const int> perm) {
  const auto ne = static_cast<std::size_t>(mesh.num_edges());
  if (perm.size() != ne) throw Error(ErrorCategory::InvalidInput, "renumber_edges: size mismatch");
  std::vector<Edge> edges(ne);
  std::vector<char> seen(ne, 0);
  for (std::size_t i = 0; i < ne; ++i) {
    const auto p = static_cast<std::size_t>(perm[i]);
    if (p >= ne || seen[p]) throw Error(ErrorCategory::InvalidInput, "renumber_edges: not a permutation");
    seen[p] = 1;
    edges[p] = mesh.edge(static_cast<int>(i));
  }
  std::vector<Triangle> tris(mesh.triangles().begin(), mesh.triangles().end());
  for (auto& t : tris) {
    for (auto& e : t.e) e = perm[static_cast<std::size_t>(e)];
  }
  return Mesh::from_entities({mesh.vertices().begin(), mesh.vertices().end()}, std::move(edges),
                             std::move(tris));
}

Patches patches(const Mesh& mesh) {
  Patches p;
  p.vertex.resize(static_cast<std::size_t>(mesh.num_vertices()));
  for (int z = 0; z < mesh.num_vertices(); ++z) {
    p.vertex[static_cast<std::size_t>(z)].center = Patch::Center::Vertex;
    p.vertex[static_cast<std::size_t>(z)].id = z;
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.area(t);
    for (int z : mesh.triangle(t).v) {
      auto& patch = p.vertex[static_cast<std::size_t>(z)];
      patch.triangles.push_back(t);
      patch.measure += a;
    }
  }
  p.edge.resize(static_cast<std::size_t>(mesh.num_edges()));
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto& patch = p.edge[static_cast<std::size_t>(e)];
    patch.center = Patch::Center::Edge;
    patch.id = e;
    for (int t : mesh.edge(e).tri) {
      if (t < 0) continue;
      patch.triangles.push_back(t);
      patch.measure += mesh.area(t);
    }
  }
  return p;
}

bool has_hanging_vertices(const Mesh& mesh) {
  for (const auto& e : mesh.edges()) {
    const Vec2 a = mesh.vertex(e.v[0]);
    const Vec2 b = mesh.vertex(e.v[1]);
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const Vec2 lo = a.cwiseMin(b), hi = a.cwiseMax(b);
    for (int z = 0; z < mesh.num_vertices(); ++z) {
      if (z == e.v[0] || z == e.v[1]) continue;
      const Vec2 p = mesh.vertex(z);
      if ((p.array() < lo.array() - 1e-12).any() || (p.array() > hi.array() + 1e-12).any()) continue;
      const double s = (p - a).dot(d) / len2;
      if (s <= 1e-12 || s >= 1.0 - 1e-12) continue;
      if ((a + s * d - p).norm() < 1e-12 * std::sqrt(len2)) return true;
    }
  }
  return false;
}

double min_angle(const Mesh& mesh) {
  double best = std::numbers::pi;
  for (const auto& t : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 p = mesh.vertex(t.v[static_cast<std::size_t>(i)]);
      const Vec2 u = mesh.vertex(t.v[static_cast<std::size_t>((i + 1) % 3)]) - p;
      const Vec2 w = mesh.vertex(t.v[static_cast<std::size_t>((i + 2) % 3)]) - p;
      const double c = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
      best = std::min(best, std::acos(c));
    }
  }
  return best;
}

void write_mesh(const Mesh& mesh, std::ostream& os) {
  os << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices()) os << p(0) << ' ' << p(1) << '\n';
  for (const auto& e : mesh.edges()) {
    os << e.v[0] << ' ' << e.v[1] << ' ' << static_cast<int>(e.tag) << '\n';
  }
  for (const auto& t : mesh.triangles()) {
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.e[0] << ' ' << t.e[1] << ' '
       << t.e[2] << '\n';
  }
}

Mesh read_mesh(std::istream& is) {
  long nv = -1, ne = -1, nt = -1;
  if (!(is >> nv >> ne >> nt) || nv < 0 || ne < 0 || nt < 0) invalid("bad header");
  std::vector<Vec2> x(static_cast<std::size_t>(nv));
  for (auto& p : x) {
    if (!(is >> p(0) >> p(1))) invalid("truncated vertex list");
  }
  std::vector<Edge> edges(static_cast<std::size_t>(ne));
  for (auto& e : edges) {
    int tag = -1;
    if (!(is >> e.v[0] >> e.v[1] >> tag) || tag < 0 || tag > 2) invalid("bad edge line");
    e.tag = static_cast<BoundaryTag>(tag);
  }
  std::vector<Triangle> tris(static_cast<std::size_t>(nt));
  for (auto& t : tris) {
    if (!(is >> t.v[0] >> t.v[1] >> t.v[2] >> t.e[0] >> t.e[1] >> t.e[2])) invalid("bad triangle line");
  }
  return Mesh::from_entities(std::move(x), std::move(edges), std::move(tris));
}

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string() + " for writing");
  write_mesh(mesh, os);
  if (!os) throw Error(ErrorCategory::Io, "write failed: " + path.string());
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::Io, "cannot open " + path.string());
  return read_mesh(is);
}

}  // namespace nedstokes
