// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "nedstokes/harness.hpp"
#include "nedstokes/quadrature.hpp"

using namespace nedstokes;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("criterion %d %s %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig study(Domain domain, int ell, int k, BCMode bc = BCMode::AllDirichlet) {
  ExperimentConfig c;
  c.domain = domain;
  c.scheme = SpaceDescriptor::scheme(ell, k);
  c.bc = bc;
  c.N = {20, 30, 40, 50};
  c.nev = 5;
  c.out = std::filesystem::temp_directory_path() / "nedstokes_acceptance";
  return c;
}

// Largest relative gap between the double pair lambda_2, lambda_3 over all meshes.
double double_gap(const ConvergenceReport& r) {
  double g = 0.0;
  for (std::size_t j = 0; j < r.N.size(); ++j) g = std::max(g, rel(r.eigen[2].lambdas[j], r.eigen[1].lambdas[j]));
  return g;
}

void criterion1(const ConvergenceReport& r) {
  const double reference[5][4] = {{13.07172, 13.07948, 13.08235, 13.08371},
                              {22.92407, 22.98365, 23.00442, 23.01402},
                              {22.92407, 22.98365, 23.00442, 23.01402},
                              {31.92158, 31.99380, 32.01930, 32.03116},
                              {38.18216, 38.37946, 38.44657, 38.47729}};
  const double extr[5] = {13.08617, 23.03109, 23.03109, 32.05239, 38.53136};
  double worst_n = 0.0, worst_e = 0.0, omin = 1e9, omax = -1e9;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) worst_n = std::max(worst_n, rel(r.eigen[static_cast<std::size_t>(i)].lambdas[static_cast<std::size_t>(j)], reference[i][j]));
    worst_e = std::max(worst_e, rel(r.eigen[static_cast<std::size_t>(i)].extrapolation.lambda, extr[i]));
    omin = std::min(omin, r.eigen[static_cast<std::size_t>(i)].order);
    omax = std::max(omax, r.eigen[static_cast<std::size_t>(i)].order);
  }
  report(1, worst_n <= 5e-3 && worst_e <= 5e-4 && omin >= 1.7 && omax <= 2.3,
         "square Ned1 k=0: max per-N rel dev " + fmt(worst_n, 3) + " (tol 5e-3), max extr rel dev " + fmt(worst_e, 3) +
             " (tol 5e-4), orders [" + fmt(omin, 3) + ", " + fmt(omax, 3) + "] (need [1.7, 2.3]), lambda_extr1 " +
             fmt(r.eigen[0].extrapolation.lambda, 8));
}

void criterion2(const ConvergenceReport& r) {
  const double extr[5] = {13.08617, 23.03109, 23.03109, 32.05239, 38.53136};
  double worst = 0.0, omin = 1e9, omax = -1e9;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, rel(r.eigen[static_cast<std::size_t>(i)].extrapolation.lambda, extr[i]));
    omin = std::min(omin, r.eigen[static_cast<std::size_t>(i)].order);
    omax = std::max(omax, r.eigen[static_cast<std::size_t>(i)].order);
  }
  report(2, worst <= 1e-5 && omin >= 3.6 && omax <= 4.4,
         "square Ned2 k=1: orders [" + fmt(omin, 3) + ", " + fmt(omax, 3) + "] (need [3.6, 4.4]), max extr rel dev " +
             fmt(worst, 3) + " (tol 1e-5)");
}

void criterion4(const ConvergenceReport& r) {
  const double o = r.eigen[0].order;
  const double e = rel(r.eigen[0].extrapolation.lambda, 14.682);
  report(4, o >= 1.7 && o <= 2.3 && e <= 2e-3,
         "circle Ned1 k=1: order " + fmt(o, 3) + " (need [1.7, 2.3]), lambda_extr1 " +
             fmt(r.eigen[0].extrapolation.lambda, 8) + " rel dev " + fmt(e, 3) + " (tol 2e-3)");
}

void criterion5(const ConvergenceReport& a, const ConvergenceReport& b) {
  const double ref[5] = {2.4674, 6.2799, 15.2090, 22.2065, 26.9479};
  double l1 = 0.0, worst = 0.0;
  for (const auto* r : {&a, &b}) {
    l1 = std::max(l1, rel(r->eigen[0].extrapolation.lambda, 2.46740));
    for (int i = 0; i < 5; ++i) worst = std::max(worst, rel(r->eigen[static_cast<std::size_t>(i)].extrapolation.lambda, ref[i]));
  }
  report(5, l1 <= 5e-4 && worst <= 2e-3,
         "mixed BC Ned1 k=0 and Ned2 k=0: lambda1 rel dev " + fmt(l1, 3) + " (tol 5e-4), five-value max rel dev " +
             fmt(worst, 3) + " (tol 2e-3)");
}

void criteria6and7() {
  const auto t0 = std::chrono::steady_clock::now();
  AfemConfig cfg;
  cfg.lambda_ref = 32.13183;
  cfg.dof_cap = 50000;
  cfg.max_iterations = 100;
  const auto adaptive = afem_loop(build_lshape_mesh(4), cfg);
  cfg.strategy = RefinementStrategy::Uniform;
  const auto uniform = afem_loop(build_lshape_mesh(4), cfg);
  const double secs = seconds_since(t0);
  const double s = adaptive.decay_order;
  const double su = uniform.decay_order;
  report(6, s >= -1.25 && s <= -0.85 && std::abs(su) <= 0.75 && secs <= 900.0,
         "L-shape AFEM: slope " + fmt(s, 3) + " over " + std::to_string(adaptive.iterations.size()) +
             " solves up to " + std::to_string(adaptive.iterations.back().dofs) + " dofs (need [-1.25, -0.85]), uniform slope " +
             fmt(su, 3) + " (need |s| <= 0.75), " + fmt(secs, 3) + " s");

  double emin = 1e300, emax = 0.0;
  for (std::size_t i = 3; i < adaptive.iterations.size(); ++i) {
    emin = std::min(emin, adaptive.iterations[i].effectivity);
    emax = std::max(emax, adaptive.iterations[i].effectivity);
  }
  report(7, emin >= 5e-3 && emax <= 1.0 && emax / emin <= 25.0,
         "effectivity over iterations 3..end in [" + fmt(emin, 3) + ", " + fmt(emax, 3) + "] (need within [5e-3, 1] and ratio <= 25, ratio " +
             fmt(emax / emin, 3) + ")");
}

// Property suite.

Mat2 smooth_tau(const Vec2& x) {
  Mat2 m;
  m << std::sin(x(0)) * std::cos(x(1)), x(0) * x(0) * x(1), std::exp(x(0) - x(1)), std::cos(x(0) * x(1));
  return m;
}

Vec2 smooth_tau_curl(const Vec2& x) {
  return Vec2(2.0 * x(0) * x(1) + std::sin(x(0)) * std::sin(x(1)), -x(1) * std::sin(x(0) * x(1)) + std::exp(x(0) - x(1)));
}

std::vector<double> eigenvalues_of(const Mesh& m, int ell, int k, double mu, int nev) {
  const auto d = make_discretization(std::make_shared<const Mesh>(m), SpaceDescriptor::scheme(ell, k));
  EigConfig cfg;
  cfg.nev = nev;
  return solve_eig(build_pencil(assemble_forms(d, mu), d), cfg).eigenvalues;
}

void criterion8() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& name) {
    if (!ok) failed.push_back(name);
  };
  const SpaceDescriptor schemes[] = {{1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};

  // Commuting diagram: curl of the interpolant equals the projection of the curl.
  double cd = 0.0;
  for (const auto& s : schemes) {
    const auto d = make_discretization(std::make_shared<const Mesh>(build_square_mesh(4, SquareDomain::UnitSquare)), s);
    const auto sigma = interpolate_ned(d, smooth_tau);
    const auto rc = l2_project_velocity(d, smooth_tau_curl);
    for (int t = 0; t < d.mesh->num_triangles(); ++t) {
      for (const auto& xh : triangle_quadrature(6).points) {
        cd = std::max(cd, (eval_stress_curl(d, {sigma.data(), static_cast<std::size_t>(sigma.size())}, t, xh) -
                           eval_velocity(d, {rc.data(), static_cast<std::size_t>(rc.size())}, t, xh))
                              .norm());
      }
    }
  }
  check(cd <= 1e-10, "commuting diagram " + fmt(cd, 3));

  // Unisolvence.
  double un = 0.0;
  for (auto [fam, lo, hi] : {std::tuple{Family::Ned1, 0, 2}, std::tuple{Family::Ned2, 1, 3}}) {
    for (int o = lo; o <= hi; ++o) {
      const auto rb = ned_basis(fam, o);
      un = std::max(un, (rb.dof_matrix() - Eigen::MatrixXd::Identity(rb.dim(), rb.dim())).cwiseAbs().maxCoeff());
    }
  }
  check(un <= 1e-12, "unisolvence " + fmt(un, 3));

  // Dense pencil oracle and K symmetry on the two-triangle mesh.
  double dense = 0.0;
  bool sym = true;
  for (const auto& s : schemes) {
    const auto d = make_discretization(std::make_shared<const Mesh>(build_square_mesh(1, SquareDomain::UnitSquare)), s);
    const auto p = build_pencil(assemble_forms(d, 1.0), d);
    sym = sym && p.K.is_symmetric(1e-12);
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(p.N.to_dense(), p.K.to_dense());
    std::vector<double> ref;
    for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
      const std::complex<double> nu = ges.alphas()(i) / ges.betas()(i);
      if (std::abs(nu) > 1e-10) ref.push_back(1.0 / nu.real());
    }
    std::sort(ref.begin(), ref.end());
    EigConfig cfg;
    cfg.nev = std::min<int>(3, static_cast<int>(ref.size()));
    const auto sol = solve_eig(p, cfg);
    for (std::size_t i = 0; i < sol.eigenvalues.size(); ++i) dense = std::max(dense, rel(sol.eigenvalues[i], ref[i]));
  }
  check(dense <= 1e-9, "dense oracle " + fmt(dense, 3));
  check(sym, "K symmetry");

  // mu scaling and edge renumbering.
  const Mesh lshape = build_lshape_mesh(3);
  const auto l1 = eigenvalues_of(lshape, 1, 1, 1.0, 5);
  const auto l2 = eigenvalues_of(lshape, 1, 1, 2.5, 5);
  double mus = 0.0;
  for (std::size_t i = 0; i < l1.size(); ++i) mus = std::max(mus, rel(l2[i], 2.5 * l1[i]));
  check(mus <= 1e-9, "mu scaling " + fmt(mus, 3));
  std::vector<int> perm(static_cast<std::size_t>(lshape.num_edges()));
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 5, perm.end());
  const auto lr = eigenvalues_of(renumber_edges(lshape, perm), 1, 1, 1.0, 5);
  double ren = 0.0;
  for (std::size_t i = 0; i < l1.size(); ++i) ren = std::max(ren, rel(lr[i], l1[i]));
  check(ren <= 1e-9, "renumbering " + fmt(ren, 3));

  // Theta reproduces constants; eta vanishes on a zero-residual input.
  auto d = std::make_shared<const Discretization>(
      make_discretization(std::make_shared<const Mesh>(lshape), SpaceDescriptor::scheme(1, 0)));
  const auto u = velocity_field(d, l2_project_velocity(*d, [](const Vec2&) { return Vec2(1.5, -0.25); }));
  const auto th = theta_postprocess(u, patches(lshape));
  double thc = 0.0;
  for (int v = 0; v < lshape.num_vertices(); ++v) {
    thc = std::max(thc, std::abs(th.coeffs(2 * v) - 1.5) + std::abs(th.coeffs(2 * v + 1) + 0.25));
  }
  check(thc <= 1e-14, "theta constants " + fmt(thc, 3));
  const auto s = stress_field(d, interpolate_ned(*d, [](const Vec2&) -> Mat2 { return 3.0 * tensor::J(); }));
  const double eta = compute_indicators(s, u, th, 1.0).eta();
  check(eta <= 1e-13, "eta zero " + fmt(eta, 3));

  // Quadrature exactness.
  double qe = 0.0;
  for (int deg = 0; deg <= kMaxTriangleDegree; ++deg) {
    const auto& r = triangle_quadrature(deg);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        double sum = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) sum += r.weights[q] * std::pow(r.points[q](0), a) * std::pow(r.points[q](1), b);
        const double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
        qe = std::max(qe, std::abs(sum - exact) / exact);
      }
    }
  }
  check(qe <= 1e-13, "quadrature " + fmt(qe, 3));

  std::string detail = "commuting " + fmt(cd, 2) + ", unisolvence " + fmt(un, 2) + ", dense oracle " + fmt(dense, 2) +
                       ", mu scaling " + fmt(mus, 2) + ", renumbering " + fmt(ren, 2) + ", theta " + fmt(thc, 2) +
                       ", eta " + fmt(eta, 2) + ", quadrature " + fmt(qe, 2);
  if (!failed.empty()) {
    detail += "; failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
  }
  report(8, failed.empty(), "property suite: " + detail);
}

void guarded(int id, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  ConvergenceReport sq1, sq2;
  bool have1 = false, have2 = false;
  guarded(1, [&] {
    sq1 = run_study(study(Domain::BiUnitSquare, 1, 0));
    have1 = true;
    criterion1(sq1);
  });
  guarded(2, [&] {
    sq2 = run_study(study(Domain::BiUnitSquare, 2, 1));
    have2 = true;
    criterion2(sq2);
  });
  guarded(3, [&] {
    if (!have1 || !have2) throw std::runtime_error("square studies did not run");
    const double g = std::max(double_gap(sq1), double_gap(sq2));
    report(3, g <= 1e-6, "double eigenvalue: max |lambda3 - lambda2| / lambda2 = " + fmt(g, 3) + " over 8 square meshes (tol 1e-6)");
  });
  guarded(4, [&] { criterion4(run_study(study(Domain::Circle, 1, 1))); });
  guarded(5, [&] {
    criterion5(run_study(study(Domain::Square, 1, 0, BCMode::Mixed)),
               run_study(study(Domain::Square, 2, 0, BCMode::Mixed)));
  });
  guarded(6, criteria6and7);
  guarded(8, criterion8);
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "nedstokes_acceptance");
  return failures;
}
