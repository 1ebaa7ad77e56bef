#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "sparsedet/matrix.hpp"
#include "sparsedet/rng.hpp"

using namespace sparsedet;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_normal();
  return m;
}

}  // namespace

TEST_CASE("spectral norm agrees with the one-sided Jacobi oracle") {
  Rng rng({21});
  // Shapes on both sides of the full-decomposition cap.
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{5, 5},
                      {12, 3},
                      {3, 12},
                      {40, 40},
                      {64, 64},
                      {70, 70},
                      {90, 80}}) {
    DenseMatrix m = random_matrix(r, c, rng);
    CHECK(spectral_norm(m) == doctest::Approx(oracle::spectral_norm(m)).epsilon(1e-8));
  }
}

TEST_CASE("spectral norm closed forms") {
  DenseMatrix ones(6, 6, 1.0);
  CHECK(spectral_norm(ones) == doctest::Approx(6.0));
  DenseMatrix zero(4, 7);
  CHECK(spectral_norm(zero) == doctest::Approx(0.0));
  DenseMatrix diag(3, 3);
  diag(0, 0) = -5;
  diag(1, 1) = 2;
  diag(2, 2) = 1;
  CHECK(spectral_norm(diag) == doctest::Approx(5.0));
  CHECK(spectral_norm(DenseMatrix::identity(80)) == doctest::Approx(1.0));
}

TEST_CASE("transpose invariance and scaling") {
  Rng rng({22});
  DenseMatrix m = random_matrix(8, 5, rng);
  const double n = spectral_norm(m);
  CHECK(spectral_norm(m.transposed()) == doctest::Approx(n));
  DenseMatrix scaled = m;
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled.data()[i] *= -3.0;
  CHECK(spectral_norm(scaled) == doctest::Approx(3.0 * n));
}

TEST_CASE("duality bound: opnorm^2 <= one_norm * inf_norm") {
  Rng rng({23});
  for (int rep = 0; rep < 20; ++rep) {
    DenseMatrix m = random_matrix(7, 9, rng);
    auto [one, inf] = induced_norms(m);
    const double op = spectral_norm(m);
    CHECK(op * op <= one * inf * (1 + 1e-12));
  }
}

TEST_CASE("stable rank") {
  DenseMatrix ones(5, 5, 1.0);
  CHECK(stable_rank(ones) == doctest::Approx(1.0));
  CHECK(stable_rank(DenseMatrix::identity(9)) == doctest::Approx(9.0));
  Rng rng({24});
  DenseMatrix m = random_matrix(6, 6, rng);
  DenseMatrix half = m;
  for (std::size_t i = 0; i < half.size(); ++i) half.data()[i] *= 0.5;
  CHECK(stable_rank(half) == doctest::Approx(stable_rank(m)));
  CHECK_THROWS_AS(stable_rank(DenseMatrix(3, 3)), std::domain_error);
}

TEST_CASE("frobenius norm vs singular values") {
  Rng rng({25});
  DenseMatrix m = random_matrix(6, 4, rng);
  auto sv = oracle::singular_values(m);
  double ss = 0;
  for (double s : sv) ss += s * s;
  CHECK(frobenius_norm_sq(m) == doctest::Approx(ss));
}

TEST_CASE("sparsity counting") {
  DenseMatrix m(4, 4);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 1) = 3;
  m(2, 1) = 1e-13;
  CHECK(max_row_col_nonzeros(m) == 3);  // column 1 has three nonzeros
  CHECK(is_k_sparse(m, {3}));
  CHECK_FALSE(is_k_sparse(m, {2}));
  CHECK(is_k_sparse(m, {2}, 1e-12));
  CHECK(is_k_sparse(DenseMatrix(5, 5), {0}));
}

TEST_CASE("submatrix composition and validation") {
  Rng rng({26});
  DenseMatrix m = random_matrix(8, 8, rng);
  IndexSet outer = {1, 3, 4, 6};
  IndexSet inner = {0, 2};
  DenseMatrix once = submatrix(m, outer, outer);
  DenseMatrix twice = submatrix(once, inner, inner);
  IndexSet direct = {outer[inner[0]], outer[inner[1]]};
  CHECK(twice == submatrix(m, direct, direct));
  CHECK_THROWS_AS(submatrix(m, IndexSet{3, 1}, outer), std::invalid_argument);
  CHECK_THROWS_AS(submatrix(m, IndexSet{1, 9}, outer), std::invalid_argument);
  // Interlacing: a submatrix never beats the full norm.
  CHECK(spectral_norm(once) <= spectral_norm(m) + 1e-12);
}

TEST_CASE("matmul and frobenius inner") {
  DenseMatrix a(2, 3, {1, 2, 3, 4, 5, 6});
  DenseMatrix b(3, 2, {7, 8, 9, 10, 11, 12});
  DenseMatrix c = matmul(a, b);
  CHECK(c(0, 0) == 58);
  CHECK(c(0, 1) == 64);
  CHECK(c(1, 0) == 139);
  CHECK(c(1, 1) == 154);
  CHECK(frobenius_inner(a, a) == doctest::Approx(frobenius_norm_sq(a)));
}

TEST_CASE("log_det") {
  DenseMatrix d(3, 3);
  d(0, 0) = 2;
  d(1, 1) = 3;
  d(2, 2) = 4;
  CHECK(log_det(d) == doctest::Approx(std::log(24.0)));
  DenseMatrix perm(2, 2, {0, 1, 1, 0});  // det = -1
  CHECK_THROWS_AS(log_det(perm), std::domain_error);
  Rng rng({27});
  DenseMatrix g = random_matrix(5, 5, rng);
  DenseMatrix gram = matmul(g.transposed(), g);
  auto sv = oracle::singular_values(g);
  double expected = 0;
  for (double s : sv) expected += 2.0 * std::log(s);
  CHECK(log_det(gram) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("cholesky_psd") {
  Rng rng({28});
  DenseMatrix g = random_matrix(6, 6, rng);
  DenseMatrix gram = matmul(g.transposed(), g);
  DenseMatrix l = cholesky_psd(gram);
  DenseMatrix back = matmul(l, l.transposed());
  for (std::size_t i = 0; i < gram.size(); ++i)
    CHECK(back.data()[i] == doctest::Approx(gram.data()[i]).epsilon(1e-9));
  DenseMatrix neg = DenseMatrix::identity(3);
  neg(2, 2) = -1.0;
  CHECK_THROWS_AS(cholesky_psd(neg), std::invalid_argument);
}

TEST_CASE("matrix text round trip") {
  Rng rng({29});
  DenseMatrix m = random_matrix(4, 3, rng);
  std::stringstream ss;
  write_matrix_text(m, ss);
  DenseMatrix back = read_matrix_text(ss);
  CHECK(back == m);
}

TEST_CASE("require_finite") {
  DenseMatrix m(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(m.all_finite());
  CHECK_THROWS_AS(m.require_finite("test"), std::invalid_argument);
}
