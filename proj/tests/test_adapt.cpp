#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "nedstokes/adapt.hpp"
#include "nedstokes/error.hpp"

using namespace nedstokes;

namespace {

LocalIndicators from_eta(const std::vector<double>& eta) {
  LocalIndicators ind;
  ind.addends = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eta.size()), 5);
  for (std::size_t i = 0; i < eta.size(); ++i) ind.addends(static_cast<Eigen::Index>(i), 0) = eta[i] * eta[i];
  ind.eta_sq = ind.addends.rowwise().sum();
  return ind;
}

}  // namespace

TEST(Adapt, MaximumMarking) {
  EXPECT_EQ(mark(from_eta({1.0, 0.6, 0.4})), (std::vector<int>{0, 1}));
  EXPECT_EQ(mark(from_eta({0.3, 0.3, 0.3})), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(mark(from_eta({0.2, 0.9, 0.5, 0.9}), 1.0), (std::vector<int>{1, 3}));
  EXPECT_EQ(mark(from_eta({0.0, 0.0})).size(), 2u);
  EXPECT_TRUE(mark(from_eta({})).empty());
}

TEST(Adapt, ZeroIterationsGiveOneSolve) {
  AfemConfig cfg;
  cfg.max_iterations = 0;
  cfg.lambda_ref = 32.13183;
  const auto r = afem_loop(build_lshape_mesh(2), cfg);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.iterations[0].marked, 0);
  EXPECT_TRUE(std::isnan(r.decay_order));
  EXPECT_GT(r.iterations[0].effectivity, 0.0);
}

TEST(Adapt, DofCapBelowTheInitialMesh) {
  AfemConfig cfg;
  cfg.dof_cap = 10;
  const auto r = afem_loop(build_lshape_mesh(2), cfg);
  EXPECT_EQ(r.iterations.size(), 1u);
}

TEST(Adapt, LShapeRefinesTowardsTheReentrantCorner) {
  AfemConfig cfg;
  cfg.max_iterations = 8;
  cfg.lambda_ref = 32.13183;
  const auto r = afem_loop(build_lshape_mesh(4), cfg);
  ASSERT_EQ(r.iterations.size(), 9u);
  for (std::size_t i = 1; i < r.iterations.size(); ++i) {
    EXPECT_GT(r.iterations[i].dofs, r.iterations[i - 1].dofs);
    EXPECT_GE(r.iterations[i - 1].marked, 1);
    EXPECT_GT(r.iterations[i].lambda, r.iterations[i - 1].lambda);
  }
  EXPECT_LT(r.iterations.back().finest_centroid.norm(), 0.1);
  for (std::size_t i = 4; i < r.iterations.size(); ++i) {
    EXPECT_LE(r.iterations[i].eta_sq, 1.05 * r.iterations[i - 1].eta_sq);
  }
  // Newest-vertex bisection keeps the initial angles.
  EXPECT_NEAR(r.iterations.back().min_angle, r.iterations.front().min_angle, 1e-12);
  EXPECT_LT(r.decay_order, -0.7);
  EXPECT_FALSE(has_hanging_vertices(*r.final_mesh));
}

TEST(Adapt, EigenvalueTracking) {
  EXPECT_EQ(track_eigenvalue({13.0, 23.0, 23.5, 32.0}, 31.0), 3);
  EXPECT_EQ(track_eigenvalue({13.0, 23.0, 32.0}, 22.0), 1);
  auto category = [](const std::vector<double>& l, double prev) {
    try {
      track_eigenvalue(l, prev);
    } catch (const Error& e) {
      return e.category();
    }
    return ErrorCategory::Configuration;
  };
  // Two copies of a double eigenvalue.
  EXPECT_EQ(category({13.0, 23.01, 23.02, 32.0}, 23.0), ErrorCategory::Tracking);
  // Nothing within 20%.
  EXPECT_EQ(category({13.0, 40.0}, 25.0), ErrorCategory::Tracking);
}

TEST(Adapt, RejectsHigherOrderAndBadConfig) {
  AfemConfig cfg;
  cfg.desc = SpaceDescriptor{1, 1};
  EXPECT_THROW(afem_loop(build_lshape_mesh(2), cfg), Error);
  cfg.desc = SpaceDescriptor{1, 0};
  cfg.fraction = 0.0;
  EXPECT_THROW(afem_loop(build_lshape_mesh(2), cfg), Error);
}

TEST(Adapt, ReportFiles) {
  AfemConfig cfg;
  cfg.max_iterations = 2;
  cfg.lambda_ref = 32.13183;
  const auto r = afem_loop(build_lshape_mesh(2), cfg);
  const auto dir = std::filesystem::temp_directory_path() / "nedstokes_adapt";
  write_adapt_csv(r, dir / "adapt.csv");
  write_adapt_json(r, dir / "adapt.json");
  std::ifstream csv(dir / "adapt.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("iteration,dofs,", 0), 0u);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::ifstream js(dir / "adapt.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["iterations"].size(), 3u);
  EXPECT_EQ(j["iterations"][1]["dofs"].get<long>(), r.iterations[1].dofs);
  EXPECT_DOUBLE_EQ(j["decay_order"].get<double>(), r.decay_order);
  std::filesystem::remove_all(dir);
}
