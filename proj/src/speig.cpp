#include "nedstokes/speig.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace nedstokes {

namespace {

// Orthogonalizes w against the first k columns of W twice (classical Gram-Schmidt
// with reorthogonalization). Returns the remaining norm.
double orthogonalize(const Eigen::MatrixXd& w_basis, int k, Eigen::VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (k == 0) break;
    const Eigen::VectorXd h = w_basis.leftCols(k).transpose() * w;
    w.noalias() -= w_basis.leftCols(k) * h;
  }
  return w.norm();
}

struct Ritz {
  double nu;
  Eigen::VectorXd y;
  double residual;
};

}  // namespace

double eigen_residual(const Pencil& pencil, double lambda, const Eigen::VectorXd& x) {
  const double nx = x.norm();
  if (!(nx > 0.0)) throw Error(ErrorCategory::InvalidInput, "eigen_residual: zero vector");
  return (matvec(pencil.K, x) - lambda * matvec(pencil.N, x)).norm() / nx;
}

std::vector<double> eigen_residuals(const Pencil& pencil, const SpectralSolution& sol) {
  std::vector<double> r;
  for (std::size_t i = 0; i < sol.eigenvalues.size(); ++i) {
    if (sol.vectors[i].size() != pencil.size()) {
      throw Error(ErrorCategory::InvalidInput, "eigen_residuals: vector length does not match pencil");
    }
    r.push_back(eigen_residual(pencil, sol.eigenvalues[i], sol.vectors[i]));
  }
  return r;
}

SpectralSolution solve_eig(const Pencil& pencil, const EigConfig& cfg) {
  if (cfg.nev < 1) throw Error(ErrorCategory::Configuration, "nev must be at least 1");
  const int n = pencil.size();
  int m = cfg.krylov_dim > 0 ? cfg.krylov_dim : std::max(40, 4 * cfg.nev);
  if (m <= cfg.nev + 5) throw Error(ErrorCategory::Configuration, "krylov dimension must exceed nev + 5");
  // Finite eigenvalues number at most the velocity dimension.
  m = std::min(m, n);
  const int nev = std::min(cfg.nev, pencil.n_u);

  std::optional<PencilFactorization> fact;
  try {
    fact.emplace(pencil, cfg.shift);
  } catch (const SingularMatrixError& e) {
    throw Error(ErrorCategory::ShiftAtEigenvalue,
                "K - theta N is singular at theta = " + std::to_string(cfg.shift) + ": " + e.what());
  }
  auto apply_s = [&](const Eigen::VectorXd& x) { return fact->solve(matvec(pencil.N, x)); };

  std::minstd_rand rng(static_cast<std::minstd_rand::result_type>(cfg.seed % 2147483646 + 1));
  auto random_vector = [&] {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      r(i) = static_cast<double>(rng() - std::minstd_rand::min()) /
                 static_cast<double>(std::minstd_rand::max() - std::minstd_rand::min()) - 0.5;
    }
    return r;
  };

  Eigen::MatrixXd w(n, m);   // orthonormal basis
  Eigen::MatrixXd sw(n, m);  // S applied to each basis vector
  int kept = 0;
  std::vector<Ritz> wanted;
  Eigen::VectorXd start = apply_s(apply_s(random_vector()));
  int restart = 0;
  int nconv = 0;
  for (;; ++restart) {
    // Extend the kept Ritz basis by a Krylov sequence from `start`.
    int k = kept;
    Eigen::VectorXd v = start;
    while (k < m) {
      double n0 = v.norm();
      double nv = orthogonalize(w, k, v);
      if (!(nv > 1e-10 * n0) || !std::isfinite(nv)) {
        // Invariant subspace reached: continue from a fresh direction, or stop when
        // the range of S is exhausted.
        v = apply_s(random_vector());
        n0 = v.norm();
        nv = orthogonalize(w, k, v);
        if (!(nv > 1e-10 * n0)) break;
      }
      w.col(k) = v / nv;
      sw.col(k) = apply_s(w.col(k));
      v = sw.col(k);
      ++k;
    }

    const Eigen::MatrixXd r = w.leftCols(k).transpose() * sw.leftCols(k);
    Eigen::EigenSolver<Eigen::MatrixXd> es(r);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const Eigen::MatrixXcd evec = es.eigenvectors();
    double numax = 0.0;
    for (int i = 0; i < k; ++i) numax = std::max(numax, std::abs(ev(i)));
    std::vector<int> order;
    for (int i = 0; i < k; ++i) {
      if (std::abs(ev(i)) > cfg.drop_tol * numax) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(ev(a)) > std::abs(ev(b)); });

    wanted.clear();
    std::vector<Eigen::VectorXd> residual_dirs;
    const int keep_target = std::min<int>(static_cast<int>(order.size()), nev + std::max(3, nev / 2));
    for (int j = 0; j < keep_target; ++j) {
      const int i = order[static_cast<std::size_t>(j)];
      Eigen::VectorXd y = evec.col(i).real();
      if (y.norm() < 1e-8) y = evec.col(i).imag();
      y.normalize();
      const double nu = ev(i).real();
      const Eigen::VectorXd res = sw.leftCols(k) * y - nu * (w.leftCols(k) * y);
      const double rn = res.norm();
      wanted.push_back({nu, y, rn});
      if (j < nev && rn > cfg.tol * std::abs(nu)) residual_dirs.push_back(res / rn);
    }
    nconv = 0;
    for (int j = 0; j < std::min<int>(nev, static_cast<int>(wanted.size())); ++j) {
      nconv += wanted[static_cast<std::size_t>(j)].residual <= cfg.tol * std::abs(wanted[static_cast<std::size_t>(j)].nu);
    }
    if ((nconv >= nev && static_cast<int>(wanted.size()) >= nev) || restart >= cfg.max_restarts || k < m) break;

    // Restart: keep the leading Ritz vectors, continue from their residuals plus a
    // fresh direction so that missing copies of repeated eigenvalues can appear.
    Eigen::MatrixXd y_keep(k, static_cast<Eigen::Index>(wanted.size()));
    for (std::size_t j = 0; j < wanted.size(); ++j) y_keep.col(static_cast<Eigen::Index>(j)) = wanted[j].y;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y_keep);
    const Eigen::MatrixXd yq = qr.householderQ() * Eigen::MatrixXd::Identity(k, y_keep.cols());
    const Eigen::MatrixXd wk = w.leftCols(k) * yq;
    const Eigen::MatrixXd swk = sw.leftCols(k) * yq;
    kept = static_cast<int>(y_keep.cols());
    w.leftCols(kept) = wk;
    sw.leftCols(kept) = swk;
    start = apply_s(random_vector());
    start *= 1e-3 / start.norm();
    for (const auto& d : residual_dirs) start += d;
  }

  // Assemble the pairs: Rayleigh quotient for lambda, ||u||_0 = 1 normalization.
  SpectralSolution sol;
  sol.restarts = restart;
  struct Pair {
    double lambda;
    Eigen::VectorXd x;
    bool conv;
  };
  std::vector<Pair> pairs;
  for (const auto& rz : wanted) {
    Eigen::VectorXd x = w.leftCols(static_cast<Eigen::Index>(rz.y.size())) * rz.y;
    const Eigen::VectorXd nx = matvec(pencil.N, x);
    const double unorm2 = -x.dot(nx);
    if (!(unorm2 > 1e-14 * x.squaredNorm())) continue;  // no velocity component
    x /= std::sqrt(unorm2);
    const double lambda = -x.dot(matvec(pencil.K, x));  // x^T N x = -1
    if (!(lambda > 0.0)) continue;
    // Deterministic sign: largest velocity entry positive.
    Eigen::Index imax = 0;
    x.segment(pencil.u_offset(), pencil.n_u).cwiseAbs().maxCoeff(&imax);
    if (x(pencil.u_offset() + imax) < 0.0) x = -x;
    const bool conv = rz.residual <= cfg.tol * std::abs(rz.nu);
    pairs.push_back({lambda, std::move(x), conv});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    return std::abs(a.lambda - cfg.shift) < std::abs(b.lambda - cfg.shift);
  });
  if (static_cast<int>(pairs.size()) > nev) pairs.resize(static_cast<std::size_t>(nev));
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });
  bool all_conv = static_cast<int>(pairs.size()) == nev;
  for (auto& p : pairs) {
    sol.eigenvalues.push_back(p.lambda);
    sol.sigma.push_back(pencil.expand_sigma(p.x.head(pencil.n_sigma())));
    sol.u.push_back(p.x.segment(pencil.u_offset(), pencil.n_u));
    sol.multiplier.push_back(pencil.n_c ? p.x(n - 1) : 0.0);
    sol.residuals.push_back(eigen_residual(pencil, p.lambda, p.x));
    sol.converged.push_back(p.conv);
    all_conv = all_conv && p.conv;
    sol.vectors.push_back(std::move(p.x));
  }
  if (!all_conv) {
    throw UnconvergedError("only " + std::to_string(nconv) + " of " + std::to_string(nev) +
                               " eigenpairs converged after " + std::to_string(restart) + " restarts",
                           std::move(sol));
  }
  return sol;
}

}  // namespace nedstokes
