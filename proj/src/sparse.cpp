#include "nedstokes/sparse.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "nedstokes/error.hpp"

namespace nedstokes {

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<Triplet> triplets) : rows_(rows), cols_(cols) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error(ErrorCategory::Assembly, "triplet (" + std::to_string(t.row) + "," +
                                               std::to_string(t.col) + ") outside matrix");
    }
  }
  // Stable sort keeps the summation order of duplicates reproducible.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  col_idx_.reserve(triplets.size());
  values_.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const int r = triplets[i].row, c = triplets[i].col;
    double sum = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) sum += triplets[i].value;
    if (sum == 0.0) continue;
    col_idx_.push_back(c);
    values_.push_back(sum);
    ++row_ptr_[static_cast<std::size_t>(r) + 1];
  }
  for (int r = 0; r < rows; ++r) row_ptr_[static_cast<std::size_t>(r) + 1] += row_ptr_[static_cast<std::size_t>(r)];
}

CsrMatrix CsrMatrix::identity(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return {n, n, std::move(t)};
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& a) {
  std::vector<Triplet> t;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    }
  }
  return {static_cast<int>(a.rows()), static_cast<int>(a.cols()), std::move(t)};
}

double CsrMatrix::coeff(int i, int j) const {
  const auto b = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
  const auto e = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
  const auto it = std::lower_bound(b, e, j);
  return it != e && *it == j ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : 0.0;
}

double CsrMatrix::norm_inf() const {
  double m = 0.0;
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      s += std::abs(values_[static_cast<std::size_t>(p)]);
    }
    m = std::max(m, s);
  }
  return m;
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      t.push_back({col_idx_[static_cast<std::size_t>(p)], r, values_[static_cast<std::size_t>(p)]});
    }
  }
  return {cols_, rows_, std::move(t)};
}

bool CsrMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double tol = rel_tol * max_abs();
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      const int c = col_idx_[static_cast<std::size_t>(p)];
      if (std::abs(values_[static_cast<std::size_t>(p)] - coeff(c, r)) > tol) return false;
    }
  }
  return true;
}

CsrMatrix CsrMatrix::submatrix(std::span<const int> keep) const {
  std::vector<int> map(static_cast<std::size_t>(std::max(rows_, cols_)), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) map[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  std::vector<Triplet> t;
  for (int r : keep) {
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      const int c = map[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(p)])];
      if (c >= 0) t.push_back({map[static_cast<std::size_t>(r)], c, values_[static_cast<std::size_t>(p)]});
    }
  }
  const int n = static_cast<int>(keep.size());
  return {n, n, std::move(t)};
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      d(r, col_idx_[static_cast<std::size_t>(p)]) = values_[static_cast<std::size_t>(p)];
    }
  }
  return d;
}

void CsrMatrix::write_coo(std::ostream& os) const {
  os << std::setprecision(17);
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[static_cast<std::size_t>(r)]; p < row_ptr_[static_cast<std::size_t>(r) + 1]; ++p) {
      os << r << ' ' << col_idx_[static_cast<std::size_t>(p)] << ' ' << values_[static_cast<std::size_t>(p)] << '\n';
    }
  }
}

Eigen::VectorXd matvec(const CsrMatrix& a, const Eigen::VectorXd& x) {
  if (x.size() != a.cols()) {
    throw Error(ErrorCategory::InvalidInput, "matvec: vector length " + std::to_string(x.size()) +
                                                 " does not match " + std::to_string(a.cols()) + " columns");
  }
  Eigen::VectorXd y(a.rows());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (int r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (int p = rp[static_cast<std::size_t>(r)]; p < rp[static_cast<std::size_t>(r) + 1]; ++p) {
      s += v[static_cast<std::size_t>(p)] * x(ci[static_cast<std::size_t>(p)]);
    }
    y(r) = s;
  }
  return y;
}

Factorization::Factorization(const CsrMatrix& a, double pivot_tol) : n_(a.rows()), pivot_tol_(pivot_tol) {
  if (a.rows() != a.cols()) throw Error(ErrorCategory::InvalidInput, "factorize: matrix not square");
  ptr_.assign(a.row_ptr().begin(), a.row_ptr().end());
  idx_.assign(a.col_idx().begin(), a.col_idx().end());
  val_.assign(a.values().begin(), a.values().end());

  std::vector<char> col_used(static_cast<std::size_t>(n_), 0);
  for (int c : idx_) col_used[static_cast<std::size_t>(c)] = 1;
  for (int i = 0; i < n_; ++i) {
    if (ptr_[static_cast<std::size_t>(i)] == ptr_[static_cast<std::size_t>(i) + 1]) {
      throw SingularMatrixError(ErrorCategory::StructurallySingular, i, "row " + std::to_string(i) + " is empty");
    }
    if (!col_used[static_cast<std::size_t>(i)]) {
      throw SingularMatrixError(ErrorCategory::StructurallySingular, i, "column " + std::to_string(i) + " is empty");
    }
  }

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n_, n_, ptr_.data(), idx_.data(), val_.data(), &symbolic, control, info);
  if (status != UMFPACK_OK) {
    umfpack_di_free_symbolic(&symbolic);
    throw SingularMatrixError(ErrorCategory::StructurallySingular, -1,
                              "symbolic factorization failed (status " + std::to_string(status) + ")");
  }
  status = umfpack_di_numeric(ptr_.data(), idx_.data(), val_.data(), symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_ERROR_out_of_memory) {
    umfpack_di_free_numeric(&numeric_);
    throw Error(ErrorCategory::Assembly, "factorization ran out of memory");
  }
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
    umfpack_di_free_numeric(&numeric_);
    throw SingularMatrixError(ErrorCategory::NumericallySingular, -1,
                              "numeric factorization failed (status " + std::to_string(status) + ")");
  }
  pivot_ratio_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || !(pivot_ratio_ >= pivot_tol_)) {
    // Locate the offending pivot in the original numbering.
    std::vector<double> diag(static_cast<std::size_t>(n_));
    std::vector<int> q(static_cast<std::size_t>(n_));
    int do_recip = 0;
    umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(),
                           diag.data(), &do_recip, nullptr, numeric_);
    std::size_t worst = 0;
    for (std::size_t k = 1; k < diag.size(); ++k) {
      if (std::abs(diag[k]) < std::abs(diag[worst])) worst = k;
    }
    umfpack_di_free_numeric(&numeric_);
    const long pivot = q.empty() ? -1 : q[worst];
    throw SingularMatrixError(ErrorCategory::NumericallySingular, pivot,
                              "pivot ratio " + std::to_string(pivot_ratio_) + " below tolerance at index " +
                                  std::to_string(pivot));
  }
}

Factorization::~Factorization() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

Factorization::Factorization(Factorization&& o) noexcept
    : n_(o.n_),
      pivot_tol_(o.pivot_tol_),
      pivot_ratio_(o.pivot_ratio_),
      ptr_(std::move(o.ptr_)),
      idx_(std::move(o.idx_)),
      val_(std::move(o.val_)),
      numeric_(o.numeric_) {
  o.numeric_ = nullptr;
}

Factorization& Factorization::operator=(Factorization&& o) noexcept {
  if (this != &o) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    n_ = o.n_;
    pivot_tol_ = o.pivot_tol_;
    pivot_ratio_ = o.pivot_ratio_;
    ptr_ = std::move(o.ptr_);
    idx_ = std::move(o.idx_);
    val_ = std::move(o.val_);
    numeric_ = o.numeric_;
    o.numeric_ = nullptr;
  }
  return *this;
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw Error(ErrorCategory::InvalidInput, "solve: right-hand side has wrong length");
  Eigen::VectorXd x(n_);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // A^T stored as CSC; solving its transpose gives A x = b. One step of
  // iterative refinement is UMFPACK's default.
  const int status = umfpack_di_solve(UMFPACK_At, ptr_.data(), idx_.data(), val_.data(), x.data(), b.data(),
                                      numeric_, control, info);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
    throw Error(ErrorCategory::NumericallySingular, "solve failed (status " + std::to_string(status) + ")");
  }
  return x;
}

}  // namespace nedstokes
