#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sparsedet/kernels.hpp"
#include "sparsedet/rng.hpp"

using namespace sparsedet;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_normal();
  return v;
}

}  // namespace

TEST_CASE("scalar kernels match naive sums") {
  Rng rng({11});
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{7},
                        std::size_t{64}, std::size_t{129}}) {
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    double dot = 0, ss = 0, as = 0, am = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      ss += a[i] * a[i];
      as += std::fabs(a[i]);
      am = std::max(am, std::fabs(a[i]));
    }
    CHECK(kern::detail::dot_scalar(a.data(), b.data(), n) == doctest::Approx(dot));
    CHECK(kern::detail::sum_sq_scalar(a.data(), n) == doctest::Approx(ss));
    CHECK(kern::detail::abs_sum_scalar(a.data(), n) == doctest::Approx(as));
    CHECK(kern::detail::abs_max_scalar(a.data(), n) == am);
  }
}

TEST_CASE("avx2 kernels agree with scalar reference") {
  if (!kern::detail::avx2_available()) {
    MESSAGE("AVX2 not available on this host, equivalence pair skipped");
    return;
  }
  Rng rng({12});
  for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4},
                        std::size_t{8}, std::size_t{31}, std::size_t{1024},
                        std::size_t{1029}}) {
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    const double tol = 1e-12 * static_cast<double>(n + 1);
    CHECK(kern::detail::dot_avx2(a.data(), b.data(), n) ==
          doctest::Approx(kern::detail::dot_scalar(a.data(), b.data(), n))
              .epsilon(tol));
    CHECK(kern::detail::sum_sq_avx2(a.data(), n) ==
          doctest::Approx(kern::detail::sum_sq_scalar(a.data(), n)).epsilon(tol));
    CHECK(kern::detail::abs_sum_avx2(a.data(), n) ==
          doctest::Approx(kern::detail::abs_sum_scalar(a.data(), n)).epsilon(tol));
    CHECK(kern::detail::abs_max_avx2(a.data(), n) ==
          kern::detail::abs_max_scalar(a.data(), n));

    std::vector<double> y1 = random_vec(n, rng), y2 = y1;
    kern::detail::axpy_scalar(0.7, a.data(), y1.data(), n);
    kern::detail::axpy_avx2(0.7, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]));

    std::vector<double> t1(n), t2(n);
    kern::detail::hard_threshold_scalar(a.data(), t1.data(), n, 0.5);
    kern::detail::hard_threshold_avx2(a.data(), t2.data(), n, 0.5);
    CHECK(t1 == t2);
  }
}

TEST_CASE("backend selection is observable and reversible") {
  kern::select_backend("scalar");
  CHECK(kern::active_backend() == kern::Backend::scalar);
  kern::select_backend("avx2");
  if (kern::detail::avx2_available())
    CHECK(kern::active_backend() == kern::Backend::avx2);
  else
    CHECK(kern::active_backend() == kern::Backend::scalar);
  kern::select_backend("auto");
  double a[3] = {1, 2, 3};
  CHECK(kern::sum_sq(a, 3) == doctest::Approx(14.0));
}

TEST_CASE("hard_threshold keeps entries at the boundary") {
  const double in[4] = {0.5, -0.5, 0.49, -2.0};
  double out[4];
  kern::hard_threshold(in, out, 4, 0.5);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == -0.5);
  CHECK(out[2] == 0.0);
  CHECK(out[3] == -2.0);
}

TEST_CASE("matvec and matvec_t match naive loops") {
  Rng rng({13});
  const std::size_t rows = 9, cols = 5;
  auto a = random_vec(rows * cols, rng);
  auto x = random_vec(cols, rng);
  auto xt = random_vec(rows, rng);
  std::vector<double> y(rows), yt(cols);
  kern::matvec(a.data(), rows, cols, x.data(), y.data());
  kern::matvec_t(a.data(), rows, cols, xt.data(), yt.data());
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * x[j];
    CHECK(y[i] == doctest::Approx(s));
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += a[i * cols + j] * xt[i];
    CHECK(yt[j] == doctest::Approx(s));
  }
}
