#include "sparsedet/kernels.hpp"

#include <cmath>
#include <cstring>

namespace sparsedet::kern {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double abs_sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double abs_max_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::fabs(a[i]));
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hard_threshold_scalar(const double* in, double* out, std::size_t n, double tau) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::fabs(in[i]) >= tau ? in[i] : 0.0;
}

}  // namespace detail

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*abs_sum)(const double*, std::size_t);
  double (*abs_max)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*hard_threshold)(const double*, double*, std::size_t, double);
  Backend which;
};

constexpr Dispatch kScalar{
    detail::dot_scalar,    detail::sum_sq_scalar,
    detail::abs_sum_scalar, detail::abs_max_scalar,
    detail::axpy_scalar,   detail::hard_threshold_scalar,
    Backend::scalar};

constexpr Dispatch kAvx2{
    detail::dot_avx2,    detail::sum_sq_avx2,
    detail::abs_sum_avx2, detail::abs_max_avx2,
    detail::axpy_avx2,   detail::hard_threshold_avx2,
    Backend::avx2};

Dispatch pick_auto() { return detail::avx2_available() ? kAvx2 : kScalar; }

Dispatch g_active = pick_auto();

}  // namespace

Backend active_backend() { return g_active.which; }

void select_backend(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    g_active = kScalar;
  } else if (std::strcmp(name, "avx2") == 0 && detail::avx2_available()) {
    g_active = kAvx2;
  } else {
    g_active = pick_auto();
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_active.dot(a, b, n);
}
double sum_sq(const double* a, std::size_t n) { return g_active.sum_sq(a, n); }
double abs_sum(const double* a, std::size_t n) { return g_active.abs_sum(a, n); }
double abs_max(const double* a, std::size_t n) { return g_active.abs_max(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  g_active.axpy(alpha, x, y, n);
}
void scale(double* x, std::size_t n, double alpha) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}
void hard_threshold(const double* in, double* out, std::size_t n, double tau) {
  g_active.hard_threshold(in, out, n, tau);
}

void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = g_active.dot(a + i * cols, x, cols);
}

void matvec_t(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) g_active.axpy(x[i], a + i * cols, y, cols);
}

}  // namespace sparsedet::kern
