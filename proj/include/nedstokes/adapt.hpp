#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <vector>

#include "nedstokes/estimator.hpp"

namespace nedstokes {

/// Triangles with eta_T >= fraction * max eta; never empty for nonempty input.
std::vector<int> mark(const LocalIndicators& ind, double fraction = 0.5);

/// Index of the value in `lambdas` nearest to `previous`. Throws Tracking when
/// none lies within window * |previous|, or when the runner-up is within twice
/// the nearest distance.
int track_eigenvalue(const std::vector<double>& lambdas, double previous, double window = 0.2);

enum class RefinementStrategy { Maximum, Uniform };

struct AfemConfig {
  SpaceDescriptor desc{1, 0};
  BCMode bc = BCMode::AllDirichlet;
  double mu = 1.0;
  /// Zero-based position of the tracked eigenvalue on the first mesh.
  int target = 0;
  int max_iterations = 10;
  /// No solve is attempted on a mesh with more unknowns than this.
  long dof_cap = 50000;
  double fraction = 0.5;
  RefinementStrategy strategy = RefinementStrategy::Maximum;
  /// Relative window around the previous value that a tracked eigenvalue must stay in.
  double window = 0.2;
  /// Reference value for errors and effectivity; NaN when unknown.
  double lambda_ref = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 1;
};

struct AdaptIteration {
  int iteration = 0;
  long dofs = 0;
  int triangles = 0;
  int vertices = 0;
  double lambda = 0.0;
  /// All eigenvalues computed on this mesh, ascending.
  std::vector<double> lambdas;
  double eta_sq = 0.0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  int marked = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  double min_angle = 0.0;
  /// Centroid of the triangle with the smallest diameter.
  Vec2 finest_centroid = Vec2::Zero();
};

struct AdaptReport {
  AfemConfig config;
  std::vector<AdaptIteration> iterations;
  /// Slope of log |lambda - lambda_ref| against log dofs; NaN without reference
  /// or with fewer than two iterations.
  double decay_order = std::numeric_limits<double>::quiet_NaN();
  std::shared_ptr<const Mesh> final_mesh;
};

/// solve -> estimate -> mark -> refine. Only k = 0 schemes are supported. The
/// tracked eigenvalue follows track_eigenvalue from mesh to mesh.
AdaptReport afem_loop(const Mesh& initial, const AfemConfig& cfg);

void write_adapt_csv(const AdaptReport& report, const std::filesystem::path& path);
void write_adapt_json(const AdaptReport& report, const std::filesystem::path& path);

}  // namespace nedstokes
