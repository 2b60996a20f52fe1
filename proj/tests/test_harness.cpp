#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nedstokes/error.hpp"
#include "nedstokes/harness.hpp"

using namespace nedstokes;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nedstokes_harness_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCategory::Assembly;
}

}  // namespace

TEST(Harness, ConfigRoundTrip) {
  const auto c = config_from_json(R"({"domain": "LShape", "scheme": [2, 1], "mu": 2.5, "N": [3, 4],
    "nev": 2, "bc": "dirichlet", "seed": 7, "pattern": "uniform", "strategy": "uniform", "vtk": true})");
  EXPECT_EQ(c.domain, Domain::LShape);
  EXPECT_EQ(c.scheme.ell, 2);
  EXPECT_EQ(c.scheme.k, 1);
  EXPECT_EQ(c.mu, 2.5);
  EXPECT_EQ(c.N, (std::vector<int>{3, 4}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.pattern, DiagonalPattern::Uniform);
  EXPECT_EQ(c.strategy, RefinementStrategy::Uniform);
  EXPECT_TRUE(c.write_vtk);
  const auto again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Harness, ConfigRejections) {
  EXPECT_EQ(category_of([] { config_from_json(R"({"colour": 1})"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { config_from_json(R"({"scheme": [3, 0]})"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { config_from_json(R"({"domain": "Torus"})"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { config_from_json(R"({"mu": -1})"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { config_from_json(R"({"N": []})"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { config_from_json("{"); }), ErrorCategory::Configuration);
  EXPECT_EQ(category_of([] { load_config("/nonexistent/config.json"); }), ErrorCategory::Io);
}

TEST(Harness, MeshSizes) {
  EXPECT_DOUBLE_EQ(mesh_size(Domain::BiUnitSquare, 20), 0.1);
  EXPECT_DOUBLE_EQ(mesh_size(Domain::Square, 20), 0.05);
  ExperimentConfig c;
  c.domain = Domain::Square;
  c.bc = BCMode::Mixed;
  const auto m = build_domain_mesh(c, 2);
  int dirichlet = 0;
  for (const auto& e : m.edges()) dirichlet += e.tag == BoundaryTag::Dirichlet ? 1 : 0;
  EXPECT_EQ(dirichlet, 2);
}

TEST(Harness, StudyTablesAreDeterministic) {
  ExperimentConfig c;
  c.N = {4, 6, 8};
  c.nev = 3;
  const auto a = scratch("study_a");
  c.out = a;
  const auto rep = run_study(c);
  ASSERT_EQ(rep.eigen.size(), 3u);
  EXPECT_EQ(rep.N, c.N);
  EXPECT_DOUBLE_EQ(rep.h[0], 0.5);
  for (const auto& s : rep.eigen) {
    EXPECT_EQ(s.lambdas.size(), 3u);
    // Lowest-order eigenvalues approach the limit from below.
    EXPECT_LT(s.lambdas[0], s.lambdas[2]);
    EXPECT_GT(s.extrapolation.lambda, s.lambdas[2]);
  }
  EXPECT_NEAR(rep.eigen[1].lambdas[2], rep.eigen[2].lambdas[2], 1e-9 * rep.eigen[1].lambdas[2]);
  const auto b = scratch("study_b");
  c.out = b;
  run_study(c);
  for (const char* f : {"study_table.csv", "study_errors.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto ja = nlohmann::json::parse(slurp(a / "study.json"));
  auto j = nlohmann::json::parse(slurp(b / "study.json"));
  ja["config"].erase("out");
  j["config"].erase("out");
  EXPECT_EQ(ja, j);
  EXPECT_TRUE(j.contains("h_definition"));
  const auto header = slurp(b / "study_table.csv").substr(0, 40);
  EXPECT_EQ(header.rfind("eigenvalue,N=4,N=6,N=8,order,lambda_extr", 0), 0u);
}

TEST(Harness, StudyWithTwoMeshesSkipsExtrapolation) {
  ExperimentConfig c;
  c.N = {4, 6};
  c.nev = 2;
  c.out = scratch("study_two");
  const auto rep = run_study(c);
  EXPECT_TRUE(std::isnan(rep.eigen[0].extrapolation.lambda));
}

TEST(Harness, AdaptNeedsLowestOrder) {
  ExperimentConfig c;
  c.domain = Domain::LShape;
  c.scheme = SpaceDescriptor::scheme(1, 1);
  c.N = {2};
  c.out = scratch("adapt_k1");
  EXPECT_EQ(category_of([&] { run_adapt(c); }), ErrorCategory::Configuration);
}

TEST(Harness, AdaptWritesReports) {
  ExperimentConfig c;
  c.domain = Domain::LShape;
  c.N = {2};
  c.nev = 3;
  c.max_iterations = 2;
  c.lambda_ref = 32.13183;
  c.out = scratch("adapt");
  const auto rep = run_adapt(c);
  EXPECT_EQ(rep.iterations.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(c.out / "adapt.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.out / "adapt.json"));
}

TEST(Harness, NevClampedToSpectrumSize) {
  // Two triangles, piecewise constant velocity: four finite eigenvalues.
  ExperimentConfig c;
  c.domain = Domain::Square;
  c.N = {1};
  c.nev = 10;
  c.out = scratch("clamp");
  EXPECT_EQ(solve_on_mesh(c, 1).solution.eigenvalues.size(), 4u);
}

TEST(Harness, SolutionFieldsWritten) {
  ExperimentConfig c;
  c.domain = Domain::Square;
  c.N = {3};
  c.nev = 2;
  c.out = scratch("fields");
  const auto r = solve_on_mesh(c, 3);
  write_solution_fields(c, r, c.out);
  EXPECT_TRUE(std::filesystem::exists(c.out / "mode_0.vtk"));
  EXPECT_TRUE(std::filesystem::exists(c.out / "mode_1.vtk"));
  EXPECT_TRUE(std::filesystem::exists(c.out / "indicators_mode_0.csv"));
}
