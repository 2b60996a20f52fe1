#include "nedstokes/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "nedstokes/error.hpp"
#include "nedstokes/fit.hpp"
#include "nedstokes/speig.hpp"

namespace nedstokes {

std::vector<int> mark(const LocalIndicators& ind, double fraction) {
  const Eigen::VectorXd eta = ind.eta_local();
  std::vector<int> marked;
  if (eta.size() == 0) return marked;
  Eigen::Index imax = 0;
  const double emax = eta.maxCoeff(&imax);
  for (Eigen::Index t = 0; t < eta.size(); ++t) {
    if (eta(t) >= fraction * emax) marked.push_back(static_cast<int>(t));
  }
  if (marked.empty()) marked.push_back(static_cast<int>(imax));
  return marked;
}

int track_eigenvalue(const std::vector<double>& lambdas, double previous, double window) {
  std::vector<std::pair<double, int>> cands;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double dist = std::abs(lambdas[i] - previous);
    if (dist <= window * std::abs(previous)) cands.emplace_back(dist, static_cast<int>(i));
  }
  std::sort(cands.begin(), cands.end());
  if (cands.empty()) {
    throw Error(ErrorCategory::Tracking, "no eigenvalue within " + std::to_string(100.0 * window) +
                                             "% of the tracked value " + std::to_string(previous));
  }
  if (cands.size() > 1 && cands[1].first <= 2.0 * cands[0].first) {
    std::ostringstream os;
    os << std::setprecision(10) << "ambiguous eigenvalue tracking near " << previous << ": candidates "
       << lambdas[static_cast<std::size_t>(cands[0].second)] << " and "
       << lambdas[static_cast<std::size_t>(cands[1].second)];
    throw Error(ErrorCategory::Tracking, os.str());
  }
  return cands[0].second;
}

AdaptReport afem_loop(const Mesh& initial, const AfemConfig& cfg) {
  if (cfg.desc.k != 0) throw Error(ErrorCategory::Unsupported, "adaptive refinement needs a k = 0 scheme");
  if (cfg.target < 0) throw Error(ErrorCategory::Configuration, "target eigenvalue index must be >= 0");
  if (cfg.max_iterations < 0) throw Error(ErrorCategory::Configuration, "max_iterations must be >= 0");
  if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0)) {
    throw Error(ErrorCategory::Configuration, "marking fraction must lie in (0, 1]");
  }
  AdaptReport report;
  report.config = cfg;
  auto mesh = std::make_shared<const Mesh>(initial);
  double previous = 0.0;
  EigConfig eig;
  eig.nev = cfg.target + 3;
  eig.seed = cfg.seed;

  for (int it = 0; it <= cfg.max_iterations; ++it) {
    auto d = std::make_shared<const Discretization>(make_discretization(mesh, cfg.desc, cfg.bc));
    const auto forms = assemble_forms(*d, cfg.mu);
    const auto pencil = build_pencil(forms, *d);
    if (it > 0 && pencil.size() > cfg.dof_cap) break;

    const auto sol = solve_eig(pencil, eig);
    int idx = cfg.target;
    if (it == 0) {
      if (idx >= static_cast<int>(sol.eigenvalues.size())) {
        throw Error(ErrorCategory::Configuration, "target eigenvalue index exceeds the computed spectrum");
      }
    } else {
      idx = track_eigenvalue(sol.eigenvalues, previous, cfg.window);
    }
    previous = sol.eigenvalues[static_cast<std::size_t>(idx)];

    const auto s = stress_field(d, sol.sigma[static_cast<std::size_t>(idx)]);
    const auto u = velocity_field(d, sol.u[static_cast<std::size_t>(idx)]);
    const auto ind = compute_indicators(s, u, theta_postprocess(u, patches(*mesh)), cfg.mu);

    AdaptIteration row;
    row.iteration = it;
    row.dofs = pencil.size();
    row.triangles = mesh->num_triangles();
    row.vertices = mesh->num_vertices();
    row.lambda = previous;
    row.lambdas = sol.eigenvalues;
    row.eta_sq = ind.total_sq();
    if (std::isfinite(cfg.lambda_ref)) {
      row.error = std::abs(cfg.lambda_ref - previous);
      row.effectivity = effectivity(cfg.lambda_ref, previous, ind.eta());
    }
    row.h_min = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh->num_triangles(); ++t) {
      const double h = mesh->diameter(t);
      row.h_max = std::max(row.h_max, h);
      if (h < row.h_min) {
        row.h_min = h;
        row.finest_centroid = mesh->centroid(t);
      }
    }
    row.min_angle = min_angle(*mesh);

    if (it < cfg.max_iterations) {
      std::vector<int> marked;
      if (cfg.strategy == RefinementStrategy::Uniform) {
        marked.resize(static_cast<std::size_t>(mesh->num_triangles()));
        for (int t = 0; t < mesh->num_triangles(); ++t) marked[static_cast<std::size_t>(t)] = t;
      } else {
        marked = mark(ind, cfg.fraction);
      }
      row.marked = static_cast<int>(marked.size());
      report.iterations.push_back(row);
      mesh = std::make_shared<const Mesh>(refine(*mesh, marked));
    } else {
      report.iterations.push_back(row);
    }
  }
  report.final_mesh = mesh;

  if (std::isfinite(cfg.lambda_ref) && report.iterations.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : report.iterations) {
      if (r.error > 0.0) pts.emplace_back(static_cast<double>(r.dofs), r.error);
    }
    if (pts.size() >= 2) report.decay_order = fit_order(pts).slope;
  }
  return report;
}

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  return os;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_adapt_csv(const AdaptReport& report, const std::filesystem::path& path) {
  auto os = open_for_writing(path);
  os << "iteration,dofs,triangles,vertices,lambda,error,eta_sq,effectivity,marked,h_min,h_max,min_angle\n";
  for (const auto& r : report.iterations) {
    os << r.iteration << ',' << r.dofs << ',' << r.triangles << ',' << r.vertices << ',' << r.lambda << ','
       << r.error << ',' << r.eta_sq << ',' << r.effectivity << ',' << r.marked << ',' << r.h_min << ','
       << r.h_max << ',' << r.min_angle << '\n';
  }
  if (!os) throw Error(ErrorCategory::Io, "write failed for " + path.string());
}

void write_adapt_json(const AdaptReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  const auto& c = report.config;
  j["scheme"] = {{"l", c.desc.ell}, {"k", c.desc.k}, {"name", c.desc.name()}};
  j["mu"] = c.mu;
  j["target"] = c.target;
  j["max_iterations"] = c.max_iterations;
  j["dof_cap"] = c.dof_cap;
  j["fraction"] = c.fraction;
  j["strategy"] = c.strategy == RefinementStrategy::Uniform ? "uniform" : "maximum";
  j["lambda_ref"] = number_or_null(c.lambda_ref);
  j["seed"] = c.seed;
  j["decay_order"] = number_or_null(report.decay_order);
  j["iterations"] = nlohmann::json::array();
  for (const auto& r : report.iterations) {
    j["iterations"].push_back({{"iteration", r.iteration},
                               {"dofs", r.dofs},
                               {"triangles", r.triangles},
                               {"vertices", r.vertices},
                               {"lambda", r.lambda},
                               {"lambdas", r.lambdas},
                               {"error", number_or_null(r.error)},
                               {"eta_sq", r.eta_sq},
                               {"effectivity", number_or_null(r.effectivity)},
                               {"marked", r.marked},
                               {"h_min", r.h_min},
                               {"h_max", r.h_max},
                               {"min_angle", r.min_angle},
                               {"finest_centroid", {r.finest_centroid(0), r.finest_centroid(1)}}});
  }
  auto os = open_for_writing(path);
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorCategory::Io, "write failed for " + path.string());
}

}  // namespace nedstokes
