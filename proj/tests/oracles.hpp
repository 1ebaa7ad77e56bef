#pragma once

// Independent reference implementations used only by the tests. These are
// deliberately written with different algorithms than the library so that a
// shared bug cannot make both sides agree.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sparsedet/matrix.hpp"

namespace oracle {

// Largest singular value by one-sided Jacobi orthogonalization of the
// columns; completely separate from the library's Gram/power-iteration path.
inline double spectral_norm(const sparsedet::DenseMatrix& m) {
  std::size_t rows = m.rows(), cols = m.cols();
  sparsedet::DenseMatrix a = rows >= cols ? m : m.transposed();
  rows = a.rows();
  cols = a.cols();
  const double tol = 1e-14;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < cols; ++i) {
      for (std::size_t j = i + 1; j < cols; ++j) {
        double aii = 0, ajj = 0, aij = 0;
        for (std::size_t r = 0; r < rows; ++r) {
          aii += a(r, i) * a(r, i);
          ajj += a(r, j) * a(r, j);
          aij += a(r, i) * a(r, j);
        }
        if (std::fabs(aij) <= tol * std::sqrt(aii * ajj)) continue;
        rotated = true;
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double vi = a(r, i), vj = a(r, j);
          a(r, i) = c * vi - s * vj;
          a(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
  double best = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double norm_sq = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm_sq += a(r, j) * a(r, j);
    best = std::max(best, norm_sq);
  }
  return std::sqrt(best);
}

// All singular values, same method.
inline std::vector<double> singular_values(const sparsedet::DenseMatrix& m) {
  std::size_t rows = m.rows(), cols = m.cols();
  sparsedet::DenseMatrix a = rows >= cols ? m : m.transposed();
  rows = a.rows();
  cols = a.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < cols; ++i)
      for (std::size_t j = i + 1; j < cols; ++j) {
        double aii = 0, ajj = 0, aij = 0;
        for (std::size_t r = 0; r < rows; ++r) {
          aii += a(r, i) * a(r, i);
          ajj += a(r, j) * a(r, j);
          aij += a(r, i) * a(r, j);
        }
        if (std::fabs(aij) <= 1e-14 * std::sqrt(aii * ajj)) continue;
        rotated = true;
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double vi = a(r, i), vj = a(r, j);
          a(r, i) = c * vi - s * vj;
          a(r, j) = s * vi + c * vj;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double norm_sq = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm_sq += a(r, j) * a(r, j);
    sv[j] = std::sqrt(norm_sq);
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

// E[exp(t G_H^2)] and E[exp(lam H^2)] by joint enumeration: every m-subset S
// of [p] against the fixed reference subset [m], and every sign path of
// length |S cap [m]|.
namespace detail {

template <typename Visit>
void for_each_subset(std::size_t p, std::size_t m, Visit visit) {
  std::vector<std::size_t> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = i;
  while (true) {
    visit(s);
    std::size_t i = m;
    while (i > 0) {
      --i;
      if (s[i] != i + p - m) break;
      if (i == 0) return;
    }
    if (s[i] == i + p - m) return;
    ++s[i];
    for (std::size_t j = i + 1; j < m; ++j) s[j] = s[j - 1] + 1;
  }
}

inline std::size_t overlap_with_prefix(const std::vector<std::size_t>& s,
                                       std::size_t m) {
  std::size_t h = 0;
  for (std::size_t v : s)
    if (v < m) ++h;
  return h;
}

}  // namespace detail

inline double mgf_gh_brute(std::size_t p, std::size_t m, double t) {
  double total = 0.0;
  std::size_t subsets = 0;
  detail::for_each_subset(p, m, [&](const std::vector<std::size_t>& s) {
    ++subsets;
    const std::size_t h = detail::overlap_with_prefix(s, m);
    double walk_sum = 0.0;
    const std::size_t paths = std::size_t{1} << h;
    for (std::size_t mask = 0; mask < paths; ++mask) {
      long g = 0;
      for (std::size_t b = 0; b < h; ++b) g += (mask >> b) & 1 ? 1 : -1;
      walk_sum += std::exp(t * static_cast<double>(g) * static_cast<double>(g));
    }
    total += walk_sum / static_cast<double>(paths);
  });
  return total / static_cast<double>(subsets);
}

inline double mgf_h_brute(std::size_t p, std::size_t m, double lam) {
  double total = 0.0;
  std::size_t subsets = 0;
  detail::for_each_subset(p, m, [&](const std::vector<std::size_t>& s) {
    ++subsets;
    const double h = static_cast<double>(detail::overlap_with_prefix(s, m));
    total += std::exp(lam * h * h);
  });
  return total / static_cast<double>(subsets);
}

// Exact chi^2 of the sign-randomized Bernoulli-block prior with amplitude t:
// conditioning on the overlap H and the split of the product signs into
// h_plus positives gives a closed form over the Bernoulli products.
inline double chi2_prior_exact(std::size_t p, std::size_t m, std::size_t k,
                               double t) {
  const double q = static_cast<double>(k) / static_cast<double>(m);
  const double q2 = q * q;
  const double up = 1.0 - q2 + q2 * std::exp(t * t);
  const double down = 1.0 - q2 + q2 * std::exp(-t * t);
  // Hypergeometric(p, m, m) pmf by direct products.
  auto log_choose = [](std::size_t n, std::size_t r) {
    return std::lgamma(static_cast<double>(n) + 1) -
           std::lgamma(static_cast<double>(r) + 1) -
           std::lgamma(static_cast<double>(n - r) + 1);
  };
  double total = 0.0;
  const std::size_t h_min = 2 * m > p ? 2 * m - p : 0;
  for (std::size_t h = h_min; h <= m; ++h) {
    const double ph = std::exp(log_choose(m, h) + log_choose(p - m, m - h) -
                               log_choose(p, m));
    double inner = 0.0;
    for (std::size_t hp = 0; hp <= h; ++hp) {
      const double hm = static_cast<double>(h - hp);
      const double hpd = static_cast<double>(hp);
      inner += std::exp(log_choose(h, hp) - static_cast<double>(h) * std::log(2.0) +
                        (hpd * hpd + hm * hm) * std::log(up) +
                        2.0 * hpd * hm * std::log(down));
    }
    total += ph * inner;
  }
  return total - 1.0;
}

}  // namespace oracle
