#include "sparsedet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sparsedet/kernels.hpp"

namespace sparsedet {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    rows_ = rows;
    cols_ = cols;
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols)
    throw std::invalid_argument("DenseMatrix: entry count does not match rows*cols");
}

bool DenseMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double v) { return std::isfinite(v); });
}

void DenseMatrix::require_finite(const char* op) const {
  if (!all_finite())
    throw std::invalid_argument(std::string(op) + ": matrix has non-finite entries");
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::identity(std::size_t p) {
  DenseMatrix m(p, p);
  for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
  return m;
}

void validate_index_set(const IndexSet& ix, std::size_t p, const char* what) {
  for (std::size_t i = 0; i < ix.size(); ++i) {
    if (ix[i] >= p)
      throw std::invalid_argument(std::string(what) + ": index out of range");
    if (i > 0 && ix[i] <= ix[i - 1])
      throw std::invalid_argument(std::string(what) + ": indices not strictly increasing");
  }
}

namespace detail {

std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("jacobi_eigenvalues: not square");
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) off += 2 * a(i, j) * a(i, j);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a(i, j)));
  if (scale == 0.0) return std::vector<double>(n, 0.0);
  const double stop = tol * tol * scale * scale * static_cast<double>(n * n);
  for (int sweep = 0; sweep < 100 && off > stop; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::fabs(apq) <= tol * scale) continue;
        double theta = (a(q, q) - a(p, p)) / (2 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
      }
    }
    off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2 * a(i, j) * a(i, j);
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::pair<double, std::vector<double>> top_singular_pair(const DenseMatrix& m,
                                                         double tol, int max_iter) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<double> v(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
  std::vector<double> w(rows), z(cols);
  double sigma = 0.0;
  double prev = -1.0;
  int perturb = 0;
  for (int it = 0; it < max_iter; ++it) {
    kern::matvec(m.data(), rows, cols, v.data(), w.data());
    sigma = std::sqrt(kern::sum_sq(w.data(), rows));
    if (sigma == 0.0) {
      // v landed in the null space; restart from a coordinate vector.
      if (perturb >= static_cast<int>(cols)) return {0.0, v};
      std::fill(v.begin(), v.end(), 0.0);
      v[perturb++] = 1.0;
      prev = -1.0;
      continue;
    }
    if (prev >= 0.0 && std::fabs(sigma - prev) <= tol * sigma) return {sigma, v};
    prev = sigma;
    kern::matvec_t(m.data(), rows, cols, w.data(), z.data());
    double nz = std::sqrt(kern::sum_sq(z.data(), cols));
    if (nz == 0.0) return {sigma, v};
    for (std::size_t j = 0; j < cols; ++j) v[j] = z[j] / nz;
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge", sigma);
}

}  // namespace detail

double spectral_norm(const DenseMatrix& m, double tol, int max_iter) {
  if (tol <= 0) throw std::invalid_argument("spectral_norm: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("spectral_norm: max_iter must be >= 1");
  m.require_finite("spectral_norm");
  if (m.size() == 0) return 0.0;
  const std::size_t small = std::min(m.rows(), m.cols());
  if (small <= kFullDecompositionCap) {
    // Gram matrix of the thinner side, then full Jacobi eigendecomposition.
    const bool use_rows = m.rows() <= m.cols();
    DenseMatrix g(small, small);
    for (std::size_t i = 0; i < small; ++i) {
      for (std::size_t j = i; j < small; ++j) {
        double s;
        if (use_rows) {
          s = kern::dot(m.row(i), m.row(j), m.cols());
        } else {
          s = 0.0;
          for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
        }
        g(i, j) = s;
        g(j, i) = s;
      }
    }
    auto ev = detail::jacobi_eigenvalues(std::move(g));
    return std::sqrt(std::max(0.0, ev.back()));
  }
  return detail::top_singular_pair(m, tol, max_iter).first;
}

double frobenius_norm_sq(const DenseMatrix& m) {
  m.require_finite("frobenius_norm_sq");
  return kern::sum_sq(m.data(), m.size());
}

double stable_rank(const DenseMatrix& m) {
  double f = frobenius_norm_sq(m);
  if (f == 0.0) throw std::domain_error("stable_rank: undefined for the zero matrix");
  double s = spectral_norm(m);
  return f / (s * s);
}

InducedNorms induced_norms(const DenseMatrix& m) {
  m.require_finite("induced_norms");
  double inf_norm = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    inf_norm = std::max(inf_norm, kern::abs_sum(m.row(i), m.cols()));
  double one_norm = 0.0;
  std::vector<double> colsum(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) colsum[j] += std::fabs(m(i, j));
  for (double c : colsum) one_norm = std::max(one_norm, c);
  return {one_norm, inf_norm};
}

bool is_k_sparse(const DenseMatrix& m, SparsityBudget budget, double zero_tol) {
  return max_row_col_nonzeros(m, zero_tol) <= budget.k;
}

std::size_t max_row_col_nonzeros(const DenseMatrix& m, double zero_tol) {
  std::size_t worst = 0;
  std::vector<std::size_t> colnz(m.cols(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::size_t rownz = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (std::fabs(m(i, j)) > zero_tol) {
        ++rownz;
        ++colnz[j];
      }
    }
    worst = std::max(worst, rownz);
  }
  for (std::size_t c : colnz) worst = std::max(worst, c);
  return worst;
}

DenseMatrix submatrix(const DenseMatrix& m, const IndexSet& is, const IndexSet& js) {
  validate_index_set(is, m.rows(), "submatrix rows");
  validate_index_set(js, m.cols(), "submatrix cols");
  DenseMatrix out(is.size(), js.size());
  for (std::size_t a = 0; a < is.size(); ++a)
    for (std::size_t b = 0; b < js.size(); ++b) out(a, b) = m(is[a], js[b]);
  return out;
}

double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frobenius_inner: shape mismatch");
  return kern::dot(a.data(), b.data(), a.size());
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      kern::axpy(aik, b.row(k), out.row(i), b.cols());
    }
  return out;
}

double log_det(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw std::invalid_argument("log_det: not square");
  DenseMatrix a = m;
  double logdet = 0.0;
  int sign = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::domain_error("log_det: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      sign = -sign;
    }
    double d = a(col, col);
    if (d < 0) sign = -sign;
    logdet += std::log(std::fabs(d));
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a(r, col) / d;
      if (f == 0.0) continue;
      kern::axpy(-f, a.row(col) + col, a.row(r) + col, n - col);
    }
  }
  if (sign < 0) throw std::domain_error("log_det: determinant is negative");
  return logdet;
}

DenseMatrix cholesky_psd(const DenseMatrix& sigma, double pivot_tol) {
  const std::size_t n = sigma.rows();
  if (n != sigma.cols()) throw std::invalid_argument("cholesky_psd: not square");
  sigma.require_finite("cholesky_psd");
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = sigma(j, j) - kern::sum_sq(l.row(j), j);
    if (d < -pivot_tol)
      throw std::invalid_argument("cholesky_psd: matrix not PSD, pivot " +
                                  std::to_string(j) + " = " + std::to_string(d));
    double ljj = d > pivot_tol ? std::sqrt(d) : 0.0;
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = sigma(i, j) - kern::dot(l.row(i), l.row(j), j);
      l(i, j) = ljj > 0.0 ? s / ljj : 0.0;
    }
  }
  return l;
}

void write_matrix_text(const DenseMatrix& m, std::ostream& os) {
  os << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      os << buf << (j + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

DenseMatrix read_matrix_text(std::istream& is) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols))
    throw std::invalid_argument("matrix text: missing 'rows cols' header");
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    if (!(is >> m.data()[i]))
      throw std::invalid_argument("matrix text: too few entries");
  }
  return m;
}

void save_matrix(const DenseMatrix& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix_text(m, f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

DenseMatrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_matrix_text(f);
}

}  // namespace sparsedet
