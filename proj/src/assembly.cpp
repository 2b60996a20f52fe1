#include "nedstokes/assembly.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <fstream>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

namespace nedstokes {

Forms assemble_forms(const Discretization& d, double mu, int quad_degree) {
  if (!(mu > 0.0)) throw Error(ErrorCategory::Configuration, "viscosity must be positive");
  const auto& mesh = *d.mesh;
  const auto& dm = d.dofs;
  if (quad_degree < 0) quad_degree = std::min(kMaxTriangleDegree, 2 * d.stress_basis.poly_degree() + 2);
  const auto& rule = triangle_quadrature(quad_degree);
  const auto nq = rule.size();
  const int nv = dm.local_vec_dim;
  const int nu = dm.local_u_dim;

  // Reference tables, shared by every triangle.
  std::vector<Vec2> ref_vals(nq * static_cast<std::size_t>(nv));
  std::vector<double> ref_curls(nq * static_cast<std::size_t>(nv));
  std::vector<double> ref_phi(nq * static_cast<std::size_t>(nu));
  for (std::size_t q = 0; q < nq; ++q) {
    d.stress_basis.eval(rule.points[q], {ref_vals.data() + q * nv, static_cast<std::size_t>(nv)});
    d.stress_basis.eval_curl(rule.points[q], {ref_curls.data() + q * nv, static_cast<std::size_t>(nv)});
    d.velocity_basis.eval_scalar(rule.points[q], {ref_phi.data() + q * nu, static_cast<std::size_t>(nu)});
  }
  Eigen::MatrixXd mref = Eigen::MatrixXd::Zero(nu, nu);
  for (std::size_t q = 0; q < nq; ++q) {
    const Eigen::Map<const Eigen::VectorXd> phi(ref_phi.data() + q * nu, nu);
    mref += rule.weights[q] * phi * phi.transpose();
  }

  std::vector<Triplet> ta, tb, tm;
  const auto nt = static_cast<std::size_t>(mesh.num_triangles());
  ta.reserve(nt * 4 * nv * nv);
  tb.reserve(nt * 2 * nu * nv);
  tm.reserve(nt * 2 * nu * nu);
  Eigen::VectorXd jvec = Eigen::VectorXd::Zero(dm.n_sigma);

  Eigen::MatrixXd gram(nv, nv);    // int psi_i . psi_j
  Eigen::MatrixXd jj(2 * nv, 2 * nv);  // int (phi:J)(phi:J)
  Eigen::MatrixXd bl(nu, nv);      // int phi_q curl psi_i
  Eigen::VectorXd jl(2 * nv);
  Eigen::VectorXd jc(2 * nv);
  std::vector<Vec2> vals(static_cast<std::size_t>(nv));

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto map = mesh.affine_map(t);
    const double jac = std::abs(map.det);
    const Mat2 binv_t = map.Binv.transpose();
    const auto idx = dm.vec_dofs(t);
    const auto sgn = dm.signs(t);
    gram.setZero();
    jj.setZero();
    bl.setZero();
    jl.setZero();
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = rule.weights[q] * jac;
      for (int i = 0; i < nv; ++i) {
        vals[static_cast<std::size_t>(i)] = sgn[static_cast<std::size_t>(i)] * (binv_t * ref_vals[q * nv + i]);
        // phi:J for the tensor with psi_i in row 0, then in row 1.
        jc(i) = vals[static_cast<std::size_t>(i)](1);
        jc(nv + i) = -vals[static_cast<std::size_t>(i)](0);
      }
      for (int i = 0; i < nv; ++i) {
        for (int k = 0; k <= i; ++k) {
          gram(i, k) += w * vals[static_cast<std::size_t>(i)].dot(vals[static_cast<std::size_t>(k)]);
        }
      }
      jj.noalias() += w * jc * jc.transpose();
      jl += w * jc;
      for (int i = 0; i < nv; ++i) {
        const double c = sgn[static_cast<std::size_t>(i)] * ref_curls[q * nv + i] / map.det;
        for (int p = 0; p < nu; ++p) bl(p, i) += w * ref_phi[q * nu + p] * c;
      }
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    for (int r = 0; r < 2; ++r) {
      for (int rr = 0; rr < 2; ++rr) {
        for (int i = 0; i < nv; ++i) {
          const int gi = dm.sigma_index(r, idx[static_cast<std::size_t>(i)]);
          for (int k = 0; k < nv; ++k) {
            const int gk = dm.sigma_index(rr, idx[static_cast<std::size_t>(k)]);
            const double g = r == rr ? gram(i, k) : 0.0;
            ta.push_back({gi, gk, (g - 0.5 * jj(r * nv + i, rr * nv + k)) / mu});
          }
        }
      }
      for (int i = 0; i < nv; ++i) jvec(dm.sigma_index(r, idx[static_cast<std::size_t>(i)])) += jl(r * nv + i);
    }
    for (int c = 0; c < 2; ++c) {
      for (int p = 0; p < nu; ++p) {
        const int row = dm.u_index(t, c, p);
        for (int i = 0; i < nv; ++i) {
          tb.push_back({row, dm.sigma_index(c, idx[static_cast<std::size_t>(i)]), bl(p, i)});
        }
        for (int p2 = 0; p2 < nu; ++p2) tm.push_back({row, dm.u_index(t, c, p2), jac * mref(p, p2)});
      }
    }
  }

  Forms f;
  f.A = CsrMatrix(dm.n_sigma, dm.n_sigma, std::move(ta));
  f.B = CsrMatrix(dm.n_u, dm.n_sigma, std::move(tb));
  f.M = CsrMatrix(dm.n_u, dm.n_u, std::move(tm));
  f.j = std::move(jvec);
  f.mu = mu;
  return f;
}

Eigen::VectorXd Pencil::expand_sigma(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n_sigma_full);
  for (std::size_t i = 0; i < sigma_free.size(); ++i) s(sigma_free[i]) = x(static_cast<Eigen::Index>(i));
  return s;
}

Pencil build_pencil(const Forms& forms, const Discretization& d, bool verify) {
  const auto& dm = d.dofs;
  Pencil p;
  p.n_sigma_full = dm.n_sigma;
  p.n_u = dm.n_u;
  p.n_c = d.bc == BCMode::AllDirichlet ? 1 : 0;
  std::vector<int> local(static_cast<std::size_t>(dm.n_sigma), -1);
  {
    std::size_t c = 0;
    for (int i = 0; i < dm.n_sigma; ++i) {
      if (c < dm.constrained.size() && dm.constrained[c] == i) {
        ++c;
        continue;
      }
      local[static_cast<std::size_t>(i)] = static_cast<int>(p.sigma_free.size());
      p.sigma_free.push_back(i);
    }
  }
  const int ns = p.n_sigma();
  const int n = ns + p.n_u + p.n_c;

  std::vector<Triplet> tk;
  tk.reserve(static_cast<std::size_t>(forms.A.nnz() + 2 * forms.B.nnz() + 2 * ns));
  auto each = [](const CsrMatrix& m, auto&& fn) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int q = m.row_ptr()[static_cast<std::size_t>(r)]; q < m.row_ptr()[static_cast<std::size_t>(r) + 1]; ++q) {
        fn(r, m.col_idx()[static_cast<std::size_t>(q)], m.values()[static_cast<std::size_t>(q)]);
      }
    }
  };
  each(forms.A, [&](int r, int c, double v) {
    const int lr = local[static_cast<std::size_t>(r)], lc = local[static_cast<std::size_t>(c)];
    if (lr >= 0 && lc >= 0) tk.push_back({lr, lc, v});
  });
  each(forms.B, [&](int r, int c, double v) {
    const int lc = local[static_cast<std::size_t>(c)];
    if (lc < 0) return;
    tk.push_back({ns + r, lc, v});
    tk.push_back({lc, ns + r, v});
  });
  if (p.n_c == 1) {
    for (int i = 0; i < ns; ++i) {
      const double v = forms.j(p.sigma_free[static_cast<std::size_t>(i)]);
      if (v == 0.0) continue;
      tk.push_back({i, n - 1, v});
      tk.push_back({n - 1, i, v});
    }
  }
  std::vector<Triplet> tn;
  tn.reserve(static_cast<std::size_t>(forms.M.nnz()));
  each(forms.M, [&](int r, int c, double v) { tn.push_back({ns + r, ns + c, -v}); });

  p.K = CsrMatrix(n, n, std::move(tk));
  p.N = CsrMatrix(n, n, std::move(tn));
  if (p.n_c == 1) {
    Mat2 jt = tensor::J();
    const Eigen::VectorXd kernel = interpolate_ned(d, [&](const Vec2&) { return jt; });
    double best = 0.0;
    for (int i = 0; i < ns; ++i) {
      const double v = std::abs(kernel(p.sigma_free[static_cast<std::size_t>(i)]));
      if (v > best) {
        best = v;
        p.pin = i;
      }
    }
  }
  if (verify) {
    try {
      PencilFactorization f(p, 0.0);
    } catch (const SingularMatrixError& e) {
      throw Error(ErrorCategory::Assembly, std::string("saddle-point matrix is singular: ") + e.what());
    }
  }
  return p;
}

PencilFactorization::PencilFactorization(const Pencil& p, double theta) {
  const int n = p.size();
  bordered_ = p.n_c == 1 && p.pin >= 0;
  const int last = n - 1;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(p.K.nnz() + p.N.nnz()));
  Eigen::VectorXd border = Eigen::VectorXd::Zero(n);
  for (const auto* m : {&p.K, &p.N}) {
    const double s = m == &p.K ? 1.0 : -theta;
    if (s == 0.0) continue;
    for (int r = 0; r < m->rows(); ++r) {
      for (int q = m->row_ptr()[static_cast<std::size_t>(r)]; q < m->row_ptr()[static_cast<std::size_t>(r) + 1]; ++q) {
        const int c = m->col_idx()[static_cast<std::size_t>(q)];
        const double v = s * m->values()[static_cast<std::size_t>(q)];
        if (bordered_ && (r == last || c == last)) {
          if (c == last && r != last) border(r) += v;
          continue;
        }
        t.push_back({r, c, v});
      }
    }
  }
  if (!bordered_) {
    lu_ = std::make_unique<Factorization>(CsrMatrix(n, n, std::move(t)));
    return;
  }
  // K - theta N = C + w e_last^T + e_last w^T with C carrying the pin entry.
  const double scale = std::max(border.cwiseAbs().maxCoeff(), 1e-300);
  t.push_back({p.pin, last, scale});
  t.push_back({last, p.pin, scale});
  lu_ = std::make_unique<Factorization>(CsrMatrix(n, n, std::move(t)));
  Eigen::VectorXd w = border;
  w(p.pin) -= scale;
  u_.resize(n, 2);
  u_.col(0) = w;
  u_.col(1) = Eigen::VectorXd::Unit(n, last);
  z_.resize(n, 2);
  z_.col(0) = lu_->solve(u_.col(0));
  z_.col(1) = lu_->solve(u_.col(1));
  // V^T z with V = [e_last, w].
  Mat2 cap = Mat2::Identity();
  cap(0, 0) += z_(last, 0);
  cap(0, 1) += z_(last, 1);
  cap(1, 0) += w.dot(z_.col(0));
  cap(1, 1) += w.dot(z_.col(1));
  if (!(std::abs(cap.determinant()) > 1e-14 * cap.cwiseAbs().maxCoeff() * cap.cwiseAbs().maxCoeff())) {
    throw SingularMatrixError(ErrorCategory::NumericallySingular, last,
                              "multiplier correction is singular");
  }
  capinv_ = cap.inverse();
}

Eigen::VectorXd PencilFactorization::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = lu_->solve(b);
  if (!bordered_) return y;
  const Eigen::Index last = y.size() - 1;
  const Eigen::Vector2d vty(y(last), u_.col(0).dot(y));
  y.noalias() -= z_ * (capinv_ * vty);
  return y;
}

void export_pencil_coo(const Pencil& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, m] : {std::pair{"K.coo", &p.K}, std::pair{"N.coo", &p.N}}) {
    const auto path = dir / name;
    std::ofstream os(path);
    if (!os) throw Error(ErrorCategory::Io, "cannot open " + path.string());
    m->write_coo(os);
    if (!os) throw Error(ErrorCategory::Io, "write failed: " + path.string());
  }
}

}  // namespace nedstokes
