#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nedstokes/mesh.hpp"
#include "nedstokes/refelems.hpp"

namespace nedstokes {

enum class BCMode { AllDirichlet, Mixed };

/// Scheme (l, k): velocity P_k^2 paired with stress rows in Ned1_k (l = 1) or
/// Ned2_{k+1} (l = 2).
struct SpaceDescriptor {
  int ell = 1;
  int k = 0;

  /// Throws Configuration for unsupported pairs.
  static SpaceDescriptor scheme(int ell, int k);

  Family stress_family() const { return ell == 1 ? Family::Ned1 : Family::Ned2; }
  int stress_order() const { return ell == 1 ? k : k + 1; }
  int velocity_order() const { return k; }
  std::string name() const;
};

/// Global numbering. The stress vector is [row 0 | row 1], each row a copy of the
/// scalar-valued Nédélec space. Velocity unknowns are discontinuous:
/// index (2 t + c) * local_u_dim + q for triangle t, component c, basis q.
struct DofMap {
  int local_vec_dim = 0;
  int local_u_dim = 0;
  int edge_dofs = 0;
  int interior_dofs = 0;
  int n_vec = 0;
  int n_sigma = 0;
  int n_u = 0;
  /// Per triangle, local_vec_dim global vector indices and matching signs.
  std::vector<int> vec_index;
  std::vector<double> vec_sign;
  /// Stress indices (both rows) pinned to zero, ascending.
  std::vector<int> constrained;

  std::span<const int> vec_dofs(int t) const {
    return {vec_index.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(local_vec_dim),
            static_cast<std::size_t>(local_vec_dim)};
  }
  std::span<const double> signs(int t) const {
    return {vec_sign.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(local_vec_dim),
            static_cast<std::size_t>(local_vec_dim)};
  }
  int sigma_index(int row, int vec) const { return row * n_vec + vec; }
  int u_index(int t, int comp, int q) const { return (2 * t + comp) * local_u_dim + q; }
};

DofMap build_dofmap(const Mesh& mesh, const SpaceDescriptor& desc, BCMode bc);

/// Everything needed to assemble and evaluate discrete fields on one mesh.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  SpaceDescriptor desc;
  BCMode bc = BCMode::AllDirichlet;
  ReferenceBasis stress_basis;
  ReferenceBasis velocity_basis;
  DofMap dofs;
};

Discretization make_discretization(std::shared_ptr<const Mesh> mesh, SpaceDescriptor desc,
                                   BCMode bc = BCMode::AllDirichlet);

/// Physical vector basis on triangle t at reference point xhat, orientation signs
/// applied. Any output span may be empty to skip it.
void eval_vector_basis(const Discretization& d, int t, const AffineMap& map, const Vec2& xhat,
                       std::span<Vec2> values, std::span<double> curls,
                       std::span<Mat2> jacobians = {});

/// sigma (length n_sigma) at F_t(xhat); rows of the result are the two vector rows.
Mat2 eval_stress(const Discretization& d, std::span<const double> sigma, int t, const Vec2& xhat);
/// Row-wise curl of sigma: (curl row0, curl row1).
Vec2 eval_stress_curl(const Discretization& d, std::span<const double> sigma, int t,
                      const Vec2& xhat);
/// Derivatives d sigma_ij / d x_l, returned as grad[i](j, l).
std::array<Mat2, 2> eval_stress_gradient(const Discretization& d, std::span<const double> sigma,
                                         int t, const Vec2& xhat);
/// u (length n_u) at F_t(xhat).
Vec2 eval_velocity(const Discretization& d, std::span<const double> u, int t, const Vec2& xhat);
/// Jacobian d u_i / d x_j.
Mat2 eval_velocity_gradient(const Discretization& d, std::span<const double> u, int t,
                            const Vec2& xhat);

using TensorField = std::function<Mat2(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Nédélec interpolant of a smooth tensor field, applied row by row.
Eigen::VectorXd interpolate_ned(const Discretization& d, const TensorField& tau);

/// Elementwise L2 projection onto P_k^2.
Eigen::VectorXd l2_project_velocity(const Discretization& d, const VectorField& v);

}  // namespace nedstokes
