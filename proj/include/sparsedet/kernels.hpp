#pragma once

#include <cstddef>

// Data-parallel inner loops used by the matrix routines. Every kernel has a
// scalar reference implementation and, where the hardware supports it, an
// AVX2 variant; the active set is chosen once at load time via cpuid and can
// be overridden for equivalence testing.

namespace sparsedet::kern {

double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double abs_sum(const double* a, std::size_t n);
double abs_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, std::size_t n, double alpha);

// out[i] = in[i] * 1{|in[i]| >= tau}
void hard_threshold(const double* in, double* out, std::size_t n, double tau);

// Row-major A (rows x cols): y = A x and y = A^T x.
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
void matvec_t(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y);

enum class Backend { scalar, avx2 };

Backend active_backend();
// "scalar", "avx2" or "auto"; unsupported requests fall back to scalar.
void select_backend(const char* name);

namespace detail {
// Scalar reference kernels, always available; the equivalence tests compare
// the dispatched kernels against these.
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_sq_scalar(const double* a, std::size_t n);
double abs_sum_scalar(const double* a, std::size_t n);
double abs_max_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void hard_threshold_scalar(const double* in, double* out, std::size_t n, double tau);

bool avx2_available();
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_sq_avx2(const double* a, std::size_t n);
double abs_sum_avx2(const double* a, std::size_t n);
double abs_max_avx2(const double* a, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void hard_threshold_avx2(const double* in, double* out, std::size_t n, double tau);
}  // namespace detail

}  // namespace sparsedet::kern
