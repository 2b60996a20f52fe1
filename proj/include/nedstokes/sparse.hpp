#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace nedstokes {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row storage. Column indices are strictly increasing per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Sums duplicate entries in a fixed (row, col) order, so the result does not
  /// depend on the order the triplets were produced in. Exact zeros are dropped.
  CsrMatrix(int rows, int cols, std::vector<Triplet> triplets);

  static CsrMatrix identity(int n);
  static CsrMatrix from_dense(const Eigen::MatrixXd& a);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  double coeff(int i, int j) const;
  double norm_inf() const;
  double max_abs() const;
  CsrMatrix transpose() const;
  /// max |A - A^T| <= rel_tol * max |A|.
  bool is_symmetric(double rel_tol) const;
  /// Rows and columns restricted to `keep` (ascending), renumbered consecutively.
  CsrMatrix submatrix(std::span<const int> keep) const;
  Eigen::MatrixXd to_dense() const;

  /// `i j value` lines, 0-based, 17 significant digits.
  void write_coo(std::ostream& os) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// y = A x. Throws InvalidInput on dimension mismatch.
Eigen::VectorXd matvec(const CsrMatrix& a, const Eigen::VectorXd& x);

/// Sparse LU (UMFPACK) with a fill-reducing ordering. Immutable after
/// construction; concurrent solves are safe.
class Factorization {
 public:
  /// Throws SingularMatrixError (StructurallySingular or NumericallySingular) when
  /// a row or column is empty, or the ratio of smallest to largest |U_ii| falls
  /// below pivot_tol.
  explicit Factorization(const CsrMatrix& a, double pivot_tol = 1e-12);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  int size() const { return n_; }
  double pivot_tol() const { return pivot_tol_; }
  /// Smallest over largest |U_ii| after scaling.
  double pivot_ratio() const { return pivot_ratio_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  int n_ = 0;
  double pivot_tol_ = 0.0;
  double pivot_ratio_ = 0.0;
  // The CSR arrays read as CSC describe A^T; solves use the transposed system.
  std::vector<int> ptr_;
  std::vector<int> idx_;
  std::vector<double> val_;
  void* numeric_ = nullptr;
};

}  // namespace nedstokes
