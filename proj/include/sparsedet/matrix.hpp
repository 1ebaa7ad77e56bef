#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsedet {

// Raised when an iterative routine fails to converge within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const { return last_value_; }

 private:
  double last_value_;
};

// Raised when an exhaustive enumeration would exceed its configured cap.
class BudgetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense p x q matrix of doubles, row-major. The single carrier type for
/// signals, noise realizations and sample covariances.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  const double* row(std::size_t i) const { return entries_.data() + i * cols_; }
  double* row(std::size_t i) { return entries_.data() + i * cols_; }

  bool all_finite() const;
  void require_finite(const char* op) const;

  DenseMatrix transposed() const;

  static DenseMatrix identity(std::size_t p);

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// Sorted distinct indices into [p].
using IndexSet = std::vector<std::size_t>;

// Throws std::invalid_argument unless strictly increasing and bounded by p.
void validate_index_set(const IndexSet& ix, std::size_t p, const char* what);

struct SparsityBudget {
  std::size_t k;
};

// Largest singular value. Matrices whose smaller dimension is at most
// `kFullDecompositionCap` are handled by a full Jacobi eigendecomposition of
// the Gram matrix; larger ones by power iteration on M^T M with a
// deterministic all-ones start vector (perturbed on stagnation).
inline constexpr std::size_t kFullDecompositionCap = 64;
double spectral_norm(const DenseMatrix& m, double tol = 1e-10, int max_iter = 10'000);

double frobenius_norm_sq(const DenseMatrix& m);
double stable_rank(const DenseMatrix& m);

struct InducedNorms {
  double one_norm;  // max column absolute sum
  double inf_norm;  // max row absolute sum
};
InducedNorms induced_norms(const DenseMatrix& m);

// True iff every row and column has at most budget.k entries with
// |entry| > zero_tol. Generated signals carry exact zeros, so the default
// tolerance is 0.
bool is_k_sparse(const DenseMatrix& m, SparsityBudget budget, double zero_tol = 0.0);

std::size_t max_row_col_nonzeros(const DenseMatrix& m, double zero_tol = 0.0);

DenseMatrix submatrix(const DenseMatrix& m, const IndexSet& is, const IndexSet& js);

double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// log(det(M)) of a general square matrix via LU with partial pivoting.
// Throws std::domain_error if the determinant is not strictly positive.
double log_det(const DenseMatrix& m);

// Cholesky factor L (lower) with pivot tolerance for positive semidefinite
// inputs; throws std::invalid_argument naming the offending pivot otherwise.
DenseMatrix cholesky_psd(const DenseMatrix& sigma, double pivot_tol = 1e-12);

// Fixture text format: first line "rows cols", then rows of
// whitespace-separated decimals at 17 significant digits.
void write_matrix_text(const DenseMatrix& m, std::ostream& os);
DenseMatrix read_matrix_text(std::istream& is);
void save_matrix(const DenseMatrix& m, const std::string& path);
DenseMatrix load_matrix(const std::string& path);

namespace detail {
// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending).
std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol = 1e-14);
// Top singular value and right singular vector (power iteration path).
std::pair<double, std::vector<double>> top_singular_pair(const DenseMatrix& m,
                                                         double tol, int max_iter);
}  // namespace detail

}  // namespace sparsedet
