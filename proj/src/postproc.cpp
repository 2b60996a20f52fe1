#include "nedstokes/postproc.hpp"

#include <fstream>
#include <iomanip>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

namespace nedstokes {

namespace {

void require_kind(const DiscreteField& f, FieldKind kind, const char* op) {
  if (f.kind != kind) {
    throw Error(ErrorCategory::InvalidInput, std::string(op) + ": expected a " + to_string(kind) +
                                                 " field, got " + to_string(f.kind));
  }
}

void check_length(const DiscreteField& f) {
  long expected = 0;
  switch (f.kind) {
    case FieldKind::StressTensor:
    case FieldKind::Pressure:
    case FieldKind::Vorticity:
      expected = f.disc->dofs.n_sigma;
      break;
    case FieldKind::Velocity:
      expected = f.disc->dofs.n_u;
      break;
    case FieldKind::NodalP1Vector:
      expected = 2L * f.mesh().num_vertices();
      break;
  }
  if (f.coeffs.size() != expected) {
    throw Error(ErrorCategory::InvalidInput, to_string(f.kind) + " field has " +
                                                 std::to_string(f.coeffs.size()) +
                                                 " coefficients, expected " + std::to_string(expected));
  }
}

std::span<const double> span_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::StressTensor: return "stress";
    case FieldKind::Velocity: return "velocity";
    case FieldKind::Pressure: return "pressure";
    case FieldKind::Vorticity: return "vorticity";
    case FieldKind::NodalP1Vector: return "nodal_p1_vector";
  }
  return "unknown";
}

int DiscreteField::components() const {
  switch (kind) {
    case FieldKind::StressTensor:
    case FieldKind::Vorticity: return 4;
    case FieldKind::Velocity:
    case FieldKind::NodalP1Vector: return 2;
    case FieldKind::Pressure: return 1;
  }
  return 0;
}

Eigen::VectorXd DiscreteField::value(int t, const Vec2& xhat) const {
  Eigen::VectorXd v(components());
  switch (kind) {
    case FieldKind::StressTensor:
    case FieldKind::Vorticity: {
      const Mat2 m = eval_tensor(*this, t, xhat);
      v << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
      break;
    }
    case FieldKind::Velocity:
    case FieldKind::NodalP1Vector:
      v = eval_vector(*this, t, xhat);
      break;
    case FieldKind::Pressure:
      v(0) = eval_scalar(*this, t, xhat);
      break;
  }
  return v;
}

DiscreteField stress_field(std::shared_ptr<const Discretization> d, Eigen::VectorXd sigma) {
  DiscreteField f{std::move(d), FieldKind::StressTensor, std::move(sigma), 1.0, "stress"};
  check_length(f);
  return f;
}

DiscreteField velocity_field(std::shared_ptr<const Discretization> d, Eigen::VectorXd u) {
  DiscreteField f{std::move(d), FieldKind::Velocity, std::move(u), 1.0, "velocity"};
  check_length(f);
  return f;
}

DiscreteField pressure_from_stress(const DiscreteField& sigma) {
  require_kind(sigma, FieldKind::StressTensor, "pressure_from_stress");
  return {sigma.disc, FieldKind::Pressure, sigma.coeffs, 1.0, "pressure"};
}

DiscreteField vorticity_from_stress(const DiscreteField& sigma, const DiscreteField& pressure,
                                    double mu) {
  require_kind(sigma, FieldKind::StressTensor, "vorticity_from_stress");
  require_kind(pressure, FieldKind::Pressure, "vorticity_from_stress");
  if (pressure.disc != sigma.disc || pressure.coeffs != sigma.coeffs) {
    throw Error(ErrorCategory::InvalidInput,
                "vorticity_from_stress: pressure was not recovered from this stress");
  }
  if (!(mu > 0.0)) throw Error(ErrorCategory::InvalidInput, "vorticity_from_stress: mu must be positive");
  return {sigma.disc, FieldKind::Vorticity, sigma.coeffs, mu, "vorticity"};
}

Mat2 eval_tensor(const DiscreteField& f, int t, const Vec2& xhat) {
  if (f.kind == FieldKind::StressTensor) return eval_stress(*f.disc, span_of(f.coeffs), t, xhat);
  if (f.kind == FieldKind::Vorticity) {
    const Mat2 s = eval_stress(*f.disc, span_of(f.coeffs), t, xhat);
    const double p = -0.5 * tensor::contract(s, tensor::J());
    return (s + p * tensor::J()) / f.mu;
  }
  throw Error(ErrorCategory::InvalidInput, "eval_tensor: " + to_string(f.kind) + " is not a tensor field");
}

Vec2 eval_vector(const DiscreteField& f, int t, const Vec2& xhat) {
  if (f.kind == FieldKind::Velocity) return eval_velocity(*f.disc, span_of(f.coeffs), t, xhat);
  if (f.kind == FieldKind::NodalP1Vector) {
    const auto& tri = f.mesh().triangle(t);
    const double lam[3] = {1.0 - xhat(0) - xhat(1), xhat(0), xhat(1)};
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 3; ++i) v += lam[i] * f.coeffs.segment<2>(2 * tri.v[static_cast<std::size_t>(i)]);
    return v;
  }
  throw Error(ErrorCategory::InvalidInput, "eval_vector: " + to_string(f.kind) + " is not a vector field");
}

double eval_scalar(const DiscreteField& f, int t, const Vec2& xhat) {
  require_kind(f, FieldKind::Pressure, "eval_scalar");
  return -0.5 * tensor::contract(eval_stress(*f.disc, span_of(f.coeffs), t, xhat), tensor::J());
}

DiscreteField theta_postprocess(const DiscreteField& u, const Patches& patches) {
  require_kind(u, FieldKind::Velocity, "theta_postprocess");
  const auto& mesh = u.mesh();
  if (patches.vertex.size() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw Error(ErrorCategory::InvalidInput, "theta_postprocess: patches belong to another mesh");
  }
  // Elementwise integrals of u.
  const auto& rule = triangle_quadrature(std::max(1, u.disc->desc.velocity_order()));
  std::vector<Vec2> integral(static_cast<std::size_t>(mesh.num_triangles()), Vec2::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = 2.0 * mesh.area(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      integral[static_cast<std::size_t>(t)] += rule.weights[q] * jac * eval_vector(u, t, rule.points[q]);
    }
  }
  Eigen::VectorXd nodal(2 * mesh.num_vertices());
  for (const auto& patch : patches.vertex) {
    Vec2 s = Vec2::Zero();
    for (int t : patch.triangles) s += integral[static_cast<std::size_t>(t)];
    nodal.segment<2>(2 * patch.id) = s / patch.measure;
  }
  return {u.disc, FieldKind::NodalP1Vector, std::move(nodal), 1.0, "theta_velocity"};
}

std::optional<std::pair<int, Vec2>> locate(const Mesh& mesh, const Vec2& x, double tol) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = mesh.affine_map(t);
    const Vec2 xh = map.to_reference(x);
    if (xh(0) >= -tol && xh(1) >= -tol && xh(0) + xh(1) <= 1.0 + tol) return std::make_pair(t, xh);
  }
  return std::nullopt;
}

double l2_error(const DiscreteField& f, const VectorField& g, int quad_degree) {
  const auto& mesh = f.mesh();
  const auto& rule = triangle_quadrature(quad_degree);
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = mesh.affine_map(t);
    const double jac = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 diff = eval_vector(f, t, rule.points[q]) - (g ? g(map.to_physical(rule.points[q])) : Vec2::Zero());
      sum += rule.weights[q] * jac * diff.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double l2_norm(const DiscreteField& f, int quad_degree) { return l2_error(f, {}, quad_degree); }

void export_vtk(const std::vector<DiscreteField>& fields, const std::filesystem::path& path) {
  if (fields.empty()) throw Error(ErrorCategory::InvalidInput, "export_vtk: no fields to write");
  const Mesh& mesh = fields.front().mesh();
  for (const auto& f : fields) {
    if (&f.mesh() != &mesh) throw Error(ErrorCategory::InvalidInput, "export_vtk: fields live on different meshes");
    check_length(f);
  }
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\nnedstokes fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) os << v(0) << ' ' << v(1) << " 0\n";
  const int nt = mesh.num_triangles();
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& tri : mesh.triangles()) os << "3 " << tri.v[0] << ' ' << tri.v[1] << ' ' << tri.v[2] << '\n';
  os << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) os << "5\n";

  const Vec2 centroid(1.0 / 3.0, 1.0 / 3.0);
  bool cell_header = false;
  for (const auto& f : fields) {
    if (f.kind == FieldKind::NodalP1Vector) continue;
    if (!cell_header) {
      os << "CELL_DATA " << nt << '\n';
      cell_header = true;
    }
    if (f.kind == FieldKind::Pressure) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int t = 0; t < nt; ++t) os << eval_scalar(f, t, centroid) << '\n';
    } else if (f.kind == FieldKind::Velocity) {
      os << "VECTORS " << f.name << " double\n";
      for (int t = 0; t < nt; ++t) {
        const Vec2 v = eval_vector(f, t, centroid);
        os << v(0) << ' ' << v(1) << " 0\n";
      }
    } else {
      os << "TENSORS " << f.name << " double\n";
      for (int t = 0; t < nt; ++t) {
        const Mat2 m = eval_tensor(f, t, centroid);
        os << m(0, 0) << ' ' << m(0, 1) << " 0\n" << m(1, 0) << ' ' << m(1, 1) << " 0\n0 0 0\n";
      }
    }
  }
  bool point_header = false;
  for (const auto& f : fields) {
    if (f.kind != FieldKind::NodalP1Vector) continue;
    if (!point_header) {
      os << "POINT_DATA " << mesh.num_vertices() << '\n';
      point_header = true;
    }
    os << "VECTORS " << f.name << " double\n";
    for (int v = 0; v < mesh.num_vertices(); ++v) os << f.coeffs(2 * v) << ' ' << f.coeffs(2 * v + 1) << " 0\n";
  }
  if (!os) throw Error(ErrorCategory::Io, "write failed for " + path.string());
}

}  // namespace nedstokes
