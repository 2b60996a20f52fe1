#include "nedstokes/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "nedstokes/error.hpp"
#include "nedstokes/estimator.hpp"

namespace nedstokes {

std::string to_string(Domain d) {
  switch (d) {
    case Domain::Square: return "Square";
    case Domain::BiUnitSquare: return "BiUnitSquare";
    case Domain::Circle: return "Circle";
    case Domain::LShape: return "LShape";
  }
  return "unknown";
}

Domain domain_from_string(const std::string& s) {
  if (s == "Square") return Domain::Square;
  if (s == "BiUnitSquare") return Domain::BiUnitSquare;
  if (s == "Circle") return Domain::Circle;
  if (s == "LShape") return Domain::LShape;
  throw Error(ErrorCategory::Configuration,
              "unknown domain '" + s + "' (Square, BiUnitSquare, Circle, LShape)");
}

namespace {

std::string pattern_name(DiagonalPattern p) {
  switch (p) {
    case DiagonalPattern::Uniform: return "uniform";
    case DiagonalPattern::Outward: return "outward";
    case DiagonalPattern::Inward: return "inward";
  }
  return "inward";
}

DiagonalPattern pattern_from_string(const std::string& s) {
  if (s == "uniform") return DiagonalPattern::Uniform;
  if (s == "outward") return DiagonalPattern::Outward;
  if (s == "inward") return DiagonalPattern::Inward;
  throw Error(ErrorCategory::Configuration, "unknown diagonal pattern '" + s + "' (uniform, outward, inward)");
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  return os;
}

}  // namespace

void ExperimentConfig::validate() const {
  SpaceDescriptor::scheme(scheme.ell, scheme.k);
  if (!(mu > 0.0)) throw Error(ErrorCategory::Configuration, "mu must be positive");
  if (N.empty()) throw Error(ErrorCategory::Configuration, "N list is empty");
  for (int n : N) {
    if (n < 1) throw Error(ErrorCategory::Configuration, "N values must be positive");
  }
  if (nev < 1) throw Error(ErrorCategory::Configuration, "nev must be at least 1");
  if (bc == BCMode::Mixed && domain != Domain::Square && domain != Domain::BiUnitSquare) {
    throw Error(ErrorCategory::Configuration, "mixed boundary conditions need a square domain");
  }
  if (max_iterations < 0) throw Error(ErrorCategory::Configuration, "max_iterations must be >= 0");
  if (dof_cap < 1) throw Error(ErrorCategory::Configuration, "dof_cap must be positive");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCategory::Configuration, "fraction must lie in (0, 1]");
  if (target < 0) throw Error(ErrorCategory::Configuration, "target must be >= 0");
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCategory::Configuration, "config must be a JSON object");
  static const char* known[] = {"domain", "scheme", "mu", "N", "nev", "bc", "out", "seed", "pattern", "shift",
                                "max_iterations", "dof_cap", "fraction", "target", "lambda_ref", "strategy",
                                "vtk", "coo"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(ErrorCategory::Configuration, "unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    if (j.contains("domain")) c.domain = domain_from_string(j["domain"].get<std::string>());
    if (j.contains("scheme")) {
      const auto& s = j["scheme"];
      if (!s.is_array() || s.size() != 2) throw Error(ErrorCategory::Configuration, "scheme must be [l, k]");
      c.scheme = SpaceDescriptor{s[0].get<int>(), s[1].get<int>()};
    }
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("N")) c.N = j["N"].get<std::vector<int>>();
    if (j.contains("nev")) c.nev = j["nev"].get<int>();
    if (j.contains("bc")) {
      const auto bc = j["bc"].get<std::string>();
      if (bc == "dirichlet") c.bc = BCMode::AllDirichlet;
      else if (bc == "mixed") c.bc = BCMode::Mixed;
      else throw Error(ErrorCategory::Configuration, "bc must be 'dirichlet' or 'mixed'");
    }
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("pattern")) c.pattern = pattern_from_string(j["pattern"].get<std::string>());
    if (j.contains("shift")) c.shift = j["shift"].get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("dof_cap")) c.dof_cap = j["dof_cap"].get<long>();
    if (j.contains("fraction")) c.fraction = j["fraction"].get<double>();
    if (j.contains("target")) c.target = j["target"].get<int>();
    if (j.contains("lambda_ref") && !j["lambda_ref"].is_null()) c.lambda_ref = j["lambda_ref"].get<double>();
    if (j.contains("strategy")) {
      const auto s = j["strategy"].get<std::string>();
      if (s == "maximum") c.strategy = RefinementStrategy::Maximum;
      else if (s == "uniform") c.strategy = RefinementStrategy::Uniform;
      else throw Error(ErrorCategory::Configuration, "strategy must be 'maximum' or 'uniform'");
    }
    if (j.contains("vtk")) c.write_vtk = j["vtk"].get<bool>();
    if (j.contains("coo")) c.write_coo = j["coo"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Configuration, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["domain"] = to_string(c.domain);
  j["scheme"] = {c.scheme.ell, c.scheme.k};
  j["mu"] = c.mu;
  j["N"] = c.N;
  j["nev"] = c.nev;
  j["bc"] = c.bc == BCMode::Mixed ? "mixed" : "dirichlet";
  j["out"] = c.out.string();
  j["seed"] = c.seed;
  j["pattern"] = pattern_name(c.pattern);
  j["shift"] = c.shift;
  j["max_iterations"] = c.max_iterations;
  j["dof_cap"] = c.dof_cap;
  j["fraction"] = c.fraction;
  j["target"] = c.target;
  j["lambda_ref"] = number_or_null(c.lambda_ref);
  j["strategy"] = c.strategy == RefinementStrategy::Uniform ? "uniform" : "maximum";
  j["vtk"] = c.write_vtk;
  j["coo"] = c.write_coo;
  return j.dump(2);
}

Mesh build_domain_mesh(const ExperimentConfig& cfg, int n) {
  Mesh m;
  switch (cfg.domain) {
    case Domain::Square: m = build_square_mesh(n, SquareDomain::UnitSquare, cfg.pattern); break;
    case Domain::BiUnitSquare: m = build_square_mesh(n, SquareDomain::BiUnitSquare, cfg.pattern); break;
    case Domain::Circle: m = build_circle_mesh(n); break;
    case Domain::LShape: m = build_lshape_mesh(n); break;
  }
  if (cfg.bc == BCMode::Mixed) m = tag_bottom_dirichlet(m);
  return m;
}

double mesh_size(Domain d, int n) { return (d == Domain::BiUnitSquare ? 2.0 : 1.0) / n; }

SolveResult solve_on_mesh(const ExperimentConfig& cfg, int n) {
  SolveResult r;
  r.n = n;
  r.h = mesh_size(cfg.domain, n);
  r.disc = std::make_shared<const Discretization>(
      make_discretization(std::make_shared<const Mesh>(build_domain_mesh(cfg, n)), cfg.scheme, cfg.bc));
  r.forms = assemble_forms(*r.disc, cfg.mu);
  const auto pencil = build_pencil(r.forms, *r.disc);
  r.dofs = pencil.size();
  if (cfg.write_coo) export_pencil_coo(pencil, cfg.out / ("coo_N" + std::to_string(n)));
  EigConfig eig;
  eig.nev = cfg.nev;
  eig.shift = cfg.shift;
  eig.seed = cfg.seed;
  r.solution = solve_eig(pencil, eig);
  return r;
}

void write_solution_fields(const ExperimentConfig& cfg, const SolveResult& r, const std::filesystem::path& dir) {
  const auto pt = patches(*r.disc->mesh);
  for (std::size_t i = 0; i < r.solution.eigenvalues.size(); ++i) {
    const auto s = stress_field(r.disc, r.solution.sigma[i]);
    const auto u = velocity_field(r.disc, r.solution.u[i]);
    const auto p = pressure_from_stress(s);
    const auto th = theta_postprocess(u, pt);
    export_vtk({s, u, p, vorticity_from_stress(s, p, cfg.mu), th}, dir / ("mode_" + std::to_string(i) + ".vtk"));
    if (i == 0 && r.disc->desc.k == 0) {
      write_indicators_csv(compute_indicators(s, u, th, cfg.mu), dir / "indicators_mode_0.csv");
    }
  }
}

ConvergenceReport run_study(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceReport rep;
  rep.config = cfg;
  std::vector<std::vector<double>> by_n;
  for (int n : cfg.N) {
    SolveResult r;
    try {
      r = solve_on_mesh(cfg, n);
    } catch (const UnconvergedError& e) {
      throw UnconvergedError("N = " + std::to_string(n) + ": " + e.what(), e.partial());
    } catch (const Error& e) {
      throw Error(e.category(), "N = " + std::to_string(n) + ": " + e.what());
    }
    if (cfg.write_vtk) write_solution_fields(cfg, r, cfg.out / ("fields_N" + std::to_string(n)));
    rep.N.push_back(n);
    rep.h.push_back(r.h);
    rep.dofs.push_back(r.dofs);
    by_n.push_back(r.solution.eigenvalues);
  }
  std::size_t nev = by_n.front().size();
  for (const auto& v : by_n) nev = std::min(nev, v.size());
  for (std::size_t i = 0; i < nev; ++i) {
    EigenSeries s;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < by_n.size(); ++j) {
      s.lambdas.push_back(by_n[j][i]);
      pts.emplace_back(rep.h[j], by_n[j][i]);
    }
    if (pts.size() >= 3) {
      s.extrapolation = extrapolate(pts);
      std::vector<std::pair<double, double>> err;
      for (const auto& [h, l] : pts) {
        const double e = std::abs(l - s.extrapolation.lambda);
        s.relative_errors.push_back(e / std::abs(s.extrapolation.lambda));
        if (e > 0.0) err.emplace_back(h, e);
      }
      if (err.size() >= 2 && s.extrapolation.t_defined) {
        const auto f = fit_order(err);
        s.order = f.slope;
        s.order_residual = f.residual;
      }
    } else {
      s.extrapolation = {std::numeric_limits<double>::quiet_NaN(), 0.0, std::numeric_limits<double>::quiet_NaN(),
                         false, 0.0};
    }
    rep.eigen.push_back(std::move(s));
  }

  {
    auto os = open_for_writing(cfg.out / "study_table.csv");
    os << "eigenvalue";
    for (int n : rep.N) os << ",N=" << n;
    os << ",order,lambda_extr\n";
    for (std::size_t i = 0; i < rep.eigen.size(); ++i) {
      os << i + 1;
      for (double l : rep.eigen[i].lambdas) os << ',' << l;
      os << ',' << rep.eigen[i].order << ',' << rep.eigen[i].extrapolation.lambda << '\n';
    }
  }
  {
    auto os = open_for_writing(cfg.out / "study_errors.csv");
    os << "N,h,dofs,eigenvalue,lambda_h,relative_error\n";
    for (std::size_t j = 0; j < rep.N.size(); ++j) {
      for (std::size_t i = 0; i < rep.eigen.size(); ++i) {
        const auto& s = rep.eigen[i];
        os << rep.N[j] << ',' << rep.h[j] << ',' << rep.dofs[j] << ',' << i + 1 << ',' << s.lambdas[j] << ','
           << (s.relative_errors.empty() ? std::numeric_limits<double>::quiet_NaN() : s.relative_errors[j]) << '\n';
      }
    }
  }
  {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    j["scheme"] = cfg.scheme.name();
    j["h_definition"] = cfg.domain == Domain::BiUnitSquare ? "h = 2/N" : "h = 1/N";
    j["N"] = rep.N;
    j["h"] = rep.h;
    j["dofs"] = rep.dofs;
    j["eigenvalues"] = nlohmann::json::array();
    for (const auto& s : rep.eigen) {
      j["eigenvalues"].push_back({{"lambda_h", s.lambdas},
                                  {"lambda_extr", number_or_null(s.extrapolation.lambda)},
                                  {"extrapolation_c", s.extrapolation.c},
                                  {"extrapolation_t", number_or_null(s.extrapolation.t)},
                                  {"extrapolation_residual", s.extrapolation.residual},
                                  {"order", number_or_null(s.order)},
                                  {"order_fit_residual", number_or_null(s.order_residual)},
                                  {"relative_errors", s.relative_errors}});
    }
    auto os = open_for_writing(cfg.out / "study.json");
    os << j.dump(2) << '\n';
  }
  return rep;
}

AdaptReport run_adapt(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scheme.k != 0) throw Error(ErrorCategory::Configuration, "adaptive runs need k = 0");
  AfemConfig a;
  a.desc = cfg.scheme;
  a.bc = cfg.bc;
  a.mu = cfg.mu;
  a.target = cfg.target;
  a.max_iterations = cfg.max_iterations;
  a.dof_cap = cfg.dof_cap;
  a.fraction = cfg.fraction;
  a.strategy = cfg.strategy;
  a.lambda_ref = cfg.lambda_ref;
  a.seed = cfg.seed;
  auto report = afem_loop(build_domain_mesh(cfg, cfg.N.front()), a);
  write_adapt_csv(report, cfg.out / "adapt.csv");
  write_adapt_json(report, cfg.out / "adapt.json");
  return report;
}

}  // namespace nedstokes
