#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "nedstokes/adapt.hpp"
#include "nedstokes/fit.hpp"
#include "nedstokes/speig.hpp"

namespace nedstokes {

enum class Domain { Square, BiUnitSquare, Circle, LShape };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

/// Everything a run needs. JSON keys match the field names; see README.
struct ExperimentConfig {
  Domain domain = Domain::BiUnitSquare;
  SpaceDescriptor scheme{1, 0};
  double mu = 1.0;
  std::vector<int> N{20, 30, 40, 50};
  int nev = 5;
  BCMode bc = BCMode::AllDirichlet;
  std::filesystem::path out = "out";
  std::uint64_t seed = 1;
  DiagonalPattern pattern = DiagonalPattern::Inward;
  double shift = 0.0;
  // Adaptive runs.
  int max_iterations = 10;
  long dof_cap = 50000;
  double fraction = 0.5;
  int target = 0;
  double lambda_ref = std::numeric_limits<double>::quiet_NaN();
  RefinementStrategy strategy = RefinementStrategy::Maximum;
  // Extra output.
  bool write_vtk = false;
  bool write_coo = false;

  /// Throws Configuration on unsupported values.
  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Structured mesh of the configured domain; Mixed tags the bottom side
/// Dirichlet and the rest Neumann.
Mesh build_domain_mesh(const ExperimentConfig& cfg, int n);
/// Mesh size used in fits: side / N (1/N for the unit square, the L-shape blocks
/// and the disk radius, 2/N for the bi-unit square).
double mesh_size(Domain d, int n);

struct SolveResult {
  int n = 0;
  double h = 0.0;
  long dofs = 0;
  std::shared_ptr<const Discretization> disc;
  Forms forms;
  SpectralSolution solution;
};

SolveResult solve_on_mesh(const ExperimentConfig& cfg, int n);

struct EigenSeries {
  std::vector<double> lambdas;  // one per N
  Extrapolation extrapolation;
  /// Order of |lambda_h - lambda_extr| against h; NaN when undefined.
  double order = std::numeric_limits<double>::quiet_NaN();
  double order_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> relative_errors;
};

struct ConvergenceReport {
  ExperimentConfig config;
  std::vector<int> N;
  std::vector<double> h;
  std::vector<long> dofs;
  std::vector<EigenSeries> eigen;  // one per eigenvalue
};

/// Solves on every N, then fits and extrapolates each eigenvalue (three or more N).
/// Writes study_table.csv, study_errors.csv and study.json into cfg.out.
ConvergenceReport run_study(const ExperimentConfig& cfg);

/// Adaptive loop from the mesh of cfg.N.front(). Writes adapt.csv and adapt.json.
AdaptReport run_adapt(const ExperimentConfig& cfg);

/// Writes the first nev eigenpairs of one solve as VTK files mode_<i>.vtk, and the
/// estimator CSV (k = 0) for the lowest mode.
void write_solution_fields(const ExperimentConfig& cfg, const SolveResult& r,
                           const std::filesystem::path& dir);

}  // namespace nedstokes
