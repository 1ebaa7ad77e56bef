#pragma once

#include <vector>

#include "sparsedet/matrix.hpp"
#include "sparsedet/rng.hpp"
#include "sparsedet/signals.hpp"

namespace sparsedet {

struct Chi2Estimate {
  double value = 0.0;      // +infinity flags the divergent regime
  double std_error = 0.0;  // 0 for exact methods
  bool exact = false;
  std::size_t reps = 0;
};

// Monte-Carlo Ingster-Suslina estimate: E[exp(<M, Mt>)] - 1 over independent
// pairs drawn from the prior, with jackknife standard error. Any exponent
// beyond the representable range makes the estimate +infinity.
Chi2Estimate chi2_gaussian_mixture_mc(const SignalSpec& spec, std::size_t reps,
                                      RngSeed seed);

// Enumeration cap for the exact hypergeometric MGFs.
inline constexpr std::size_t kMgfEnumerationCap = 64;

// log E[exp(t G_H^2)], H ~ Hypergeometric(p, m, m), G_h a symmetric
// h-step random walk. Exact enumeration over (H, walk endpoint).
double log_mgf_gh_exact(std::size_t p, std::size_t m, double t);
double mgf_gh_exact(std::size_t p, std::size_t m, double t);

// log E[exp(lam H^2)].
double log_mgf_h_exact(std::size_t p, std::size_t m, double lam);
double mgf_h_exact(std::size_t p, std::size_t m, double lam);

// Cauchy-Schwarz bound sqrt(A(m,s) B(m,s)) - 1 with the walk-rate
// 2 k^2 sinh(s)/m^2 and the overlap-rate 2 k^2 (cosh(s)-1)/m^2.
double chi2_upper_bound_cs(std::size_t p, std::size_t m, std::size_t k, double s);

// Grid maximization of min{acosh(1 + c m/k^2 ln(ep/m) ^ c p^2/(m^2 k^2)),
// asinh(c m/k^2 ln(ep/m))}.
struct SStarResult {
  double s_star = 0.0;
  std::size_t m_star = 0;
};
SStarResult optimize_s_star(std::size_t p, std::size_t k,
                            const std::vector<std::size_t>& m_grid, double c = 0.05);

// Submatrix-size presets from the two optimization regimes.
std::size_t prior_m_preset_ksmall(std::size_t p);
std::size_t prior_m_preset_kbig(std::size_t p, std::size_t k, double c = 0.05);

// Unique v in [0,1) with v ln((1+v)/(1-v)) = chi2, by bisection to 1e-12.
double tv_upper_from_chi2(double chi2);

struct CovPairTerm {
  double determinant_term = 0.0;  // det(I - T Tt)^{-n/2}
  double surrogate = 0.0;         // exp((n/2) <T, Tt>)
};
CovPairTerm cov_chi2_pair_term(const DenseMatrix& t, const DenseMatrix& t_tilde,
                               std::size_t n);

// E[exp(S_p)], S_p the fixed-point count of a uniform permutation; exact
// enumeration via the rencontres distribution for p <= 8, Monte Carlo above.
Chi2Estimate permutation_mgf(std::size_t p, std::size_t reps, RngSeed seed);

struct BoundaryPoint {
  double lambda1 = 0.0;
  double lambda0 = 0.0;
  bool lambda0_clamped = false;  // log argument fell below 1
};
BoundaryPoint boundary_curves(std::size_t p, std::size_t k);

// Piecewise-linear critical exponent: alpha below 1/3, (1+alpha)/4 above.
double beta_star(double alpha);

}  // namespace sparsedet
