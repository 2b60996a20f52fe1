#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nedstokes/spaces.hpp"

namespace nedstokes {

enum class FieldKind { StressTensor, Velocity, Pressure, Vorticity, NodalP1Vector };

std::string to_string(FieldKind kind);

/// A field on one discretization. Pressure and vorticity are never assembled: they
/// keep the stress coefficients and are evaluated from them on the fly.
struct DiscreteField {
  std::shared_ptr<const Discretization> disc;
  FieldKind kind = FieldKind::Velocity;
  /// StressTensor, Pressure, Vorticity: n_sigma. Velocity: n_u.
  /// NodalP1Vector: 2 per vertex, (x, y) interleaved.
  Eigen::VectorXd coeffs;
  /// Viscosity, used by Vorticity only.
  double mu = 1.0;
  std::string name;

  const Mesh& mesh() const { return *disc->mesh; }
  int components() const;
  /// Value on triangle t at reference point xhat, flattened row-major.
  Eigen::VectorXd value(int t, const Vec2& xhat) const;
};

DiscreteField stress_field(std::shared_ptr<const Discretization> d, Eigen::VectorXd sigma);
DiscreteField velocity_field(std::shared_ptr<const Discretization> d, Eigen::VectorXd u);

/// p_h = -(sigma_h : J) / 2.
DiscreteField pressure_from_stress(const DiscreteField& sigma);
/// (sigma_h + p_h J) / mu, the recovered row-wise curl of the velocity.
DiscreteField vorticity_from_stress(const DiscreteField& sigma, const DiscreteField& pressure,
                                    double mu);

/// Continuous P1 field whose value at vertex z is sum_{T in w_z} int_T v / |w_z|.
DiscreteField theta_postprocess(const DiscreteField& u, const Patches& patches);

Mat2 eval_tensor(const DiscreteField& f, int t, const Vec2& xhat);
Vec2 eval_vector(const DiscreteField& f, int t, const Vec2& xhat);
double eval_scalar(const DiscreteField& f, int t, const Vec2& xhat);

/// Triangle containing x and the reference coordinates of x in it, by linear search.
std::optional<std::pair<int, Vec2>> locate(const Mesh& mesh, const Vec2& x, double tol = 1e-12);

/// ||f - g||_0 for vector-valued f (Velocity or NodalP1Vector).
double l2_error(const DiscreteField& f, const VectorField& g, int quad_degree = 8);
/// ||f||_0 for a vector-valued field.
double l2_norm(const DiscreteField& f, int quad_degree = 8);

/// Legacy ASCII unstructured grid. Stress, velocity, pressure and vorticity become
/// cell data sampled at centroids; nodal fields become point data.
void export_vtk(const std::vector<DiscreteField>& fields, const std::filesystem::path& path);

}  // namespace nedstokes
