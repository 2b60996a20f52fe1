// Command-line front end. Errors go to stderr as one JSON object; the exit code
// encodes the category.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nedstokes/error.hpp"
#include "nedstokes/harness.hpp"

using namespace nedstokes;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> domain;
  std::optional<std::string> scheme;
  std::optional<std::string> N;
  std::optional<int> nev;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> mu;
  std::optional<std::string> bc;
  bool vtk = false;
  bool coo = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON configuration file");
  sub->add_option("--domain", o.domain, "Square, BiUnitSquare, Circle or LShape");
  sub->add_option("--scheme", o.scheme, "l,k");
  sub->add_option("--N", o.N, "comma separated mesh parameters");
  sub->add_option("--nev", o.nev, "number of eigenvalues");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "start vector seed");
  sub->add_option("--mu", o.mu, "viscosity");
  sub->add_option("--bc", o.bc, "dirichlet or mixed");
  sub->add_flag("--vtk", o.vtk, "write VTK fields for every solve");
  sub->add_flag("--coo", o.coo, "debug: dump the pencil blocks as i j value text");
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::Configuration, std::string(what) + ": cannot parse '" + s + "'");
    }
  }
  if (v.empty()) throw Error(ErrorCategory::Configuration, std::string(what) + ": empty list");
  return v;
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.domain) c.domain = domain_from_string(*o.domain);
  if (o.scheme) {
    const auto lk = parse_ints(*o.scheme, "--scheme");
    if (lk.size() != 2) throw Error(ErrorCategory::Configuration, "--scheme expects l,k");
    c.scheme = SpaceDescriptor::scheme(lk[0], lk[1]);
  }
  if (o.N) c.N = parse_ints(*o.N, "--N");
  if (o.nev) c.nev = *o.nev;
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.mu) c.mu = *o.mu;
  if (o.bc) {
    if (*o.bc == "dirichlet") c.bc = BCMode::AllDirichlet;
    else if (*o.bc == "mixed") c.bc = BCMode::Mixed;
    else throw Error(ErrorCategory::Configuration, "--bc must be dirichlet or mixed");
  }
  c.write_vtk = c.write_vtk || o.vtk;
  c.write_coo = c.write_coo || o.coo;
  c.validate();
  return c;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  if (!os) throw Error(ErrorCategory::Io, "cannot write " + path.string());
}

void cmd_mesh(const ExperimentConfig& c) {
  ensure_dir(c.out);
  for (int n : c.N) {
    const auto m = build_domain_mesh(c, n);
    const auto path = c.out / ("mesh_N" + std::to_string(n) + ".txt");
    write_mesh(m, path);
    std::cout << path.string() << ": " << m.num_vertices() << " vertices, " << m.num_edges() << " edges, "
              << m.num_triangles() << " triangles\n";
  }
}

void cmd_solve(const ExperimentConfig& c, bool fields) {
  ensure_dir(c.out);
  nlohmann::json report;
  report["config"] = nlohmann::json::parse(config_to_json(c));
  for (int n : c.N) {
    const auto r = solve_on_mesh(c, n);
    const auto tag = "N" + std::to_string(n);
    std::ostringstream csv;
    csv.precision(17);
    csv << "index,lambda,residual\n";
    nlohmann::json run{{"N", n}, {"h", r.h}, {"dofs", r.dofs}, {"restarts", r.solution.restarts}};
    for (std::size_t i = 0; i < r.solution.eigenvalues.size(); ++i) {
      csv << i + 1 << ',' << r.solution.eigenvalues[i] << ',' << r.solution.residuals[i] << '\n';
      run["eigenvalues"].push_back(r.solution.eigenvalues[i]);
      run["residuals"].push_back(r.solution.residuals[i]);
      std::cout << tag << " lambda_" << i + 1 << " = " << std::setprecision(10) << r.solution.eigenvalues[i] << '\n';
    }
    write_text(c.out / ("eigenvalues_" + tag + ".csv"), csv.str());
    report["runs"].push_back(run);
    if (fields || c.write_vtk) write_solution_fields(c, r, c.out / ("fields_" + tag));
  }
  write_text(c.out / (fields ? "export.json" : "solve.json"), report.dump(2) + "\n");
}

void cmd_study(const ExperimentConfig& c) {
  const auto rep = run_study(c);
  for (std::size_t i = 0; i < rep.eigen.size(); ++i) {
    const auto& s = rep.eigen[i];
    std::cout << "lambda_" << i + 1 << ": extrapolated " << std::setprecision(10) << s.extrapolation.lambda
              << ", order " << std::setprecision(4) << s.order << '\n';
  }
  std::cout << "tables written to " << c.out.string() << '\n';
}

void cmd_adapt(const ExperimentConfig& c) {
  const auto rep = run_adapt(c);
  const auto& last = rep.iterations.back();
  std::cout << rep.iterations.size() << " iterations, final dofs " << last.dofs << ", lambda "
            << std::setprecision(10) << last.lambda;
  if (std::isfinite(rep.decay_order)) std::cout << ", error decay order " << std::setprecision(4) << rep.decay_order;
  std::cout << "\nreport written to " << c.out.string() << '\n';
}

int exit_code(ErrorCategory cat) { return 10 + static_cast<int>(cat); }

int fail(std::string_view category, const std::string& message, int code) {
  nlohmann::json j{{"error", category}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element Stokes eigensolver"};
  app.require_subcommand(1);
  Overrides o;
  auto* mesh = app.add_subcommand("mesh", "write the meshes of every N");
  auto* solve = app.add_subcommand("solve", "solve the eigenproblem on every N");
  auto* study = app.add_subcommand("study", "convergence study with order fits and extrapolation");
  auto* adapt = app.add_subcommand("adapt", "adaptive refinement loop (k = 0)");
  auto* exp = app.add_subcommand("export", "solve and write VTK fields and estimator indicators");
  for (auto* s : {mesh, solve, study, adapt, exp}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(to_string(ErrorCategory::Configuration), e.what(), exit_code(ErrorCategory::Configuration));
  }

  try {
    const auto cfg = resolve(o);
    if (mesh->parsed()) cmd_mesh(cfg);
    else if (solve->parsed()) cmd_solve(cfg, false);
    else if (study->parsed()) cmd_study(cfg);
    else if (adapt->parsed()) cmd_adapt(cfg);
    else cmd_solve(cfg, true);
  } catch (const Error& e) {
    return fail(to_string(e.category()), e.what(), exit_code(e.category()));
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
  return 0;
}
