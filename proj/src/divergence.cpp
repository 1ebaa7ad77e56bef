#include "sparsedet/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparsedet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpCap = 700.0;  // exp() overflows just above this

double log_choose(std::size_t n, std::size_t k) {
  if (k > n) return -kInf;
  return std::lgamma(static_cast<double>(n) + 1) -
         std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

// log(sum exp(terms)) with the usual max shift.
double log_sum_exp(const std::vector<double>& terms) {
  double mx = -kInf;
  for (double t : terms) mx = std::max(mx, t);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

// log P(H = h) for H ~ Hypergeometric(p, m, m).
double log_hyper_pmf(std::size_t p, std::size_t m, std::size_t h) {
  return log_choose(m, h) + log_choose(p - m, m - h) - log_choose(p, m);
}

std::size_t hyper_support_min(std::size_t p, std::size_t m) {
  return 2 * m > p ? 2 * m - p : 0;
}

struct MeanSe {
  double mean;
  double se;
  bool overflow;
};

MeanSe exp_mean_se(const std::vector<double>& exponents) {
  for (double e : exponents)
    if (e > kExpCap) return {kInf, 0.0, true};
  double mean = 0.0;
  for (double e : exponents) mean += std::exp(e);
  mean /= static_cast<double>(exponents.size());
  double var = 0.0;
  for (double e : exponents) {
    double d = std::exp(e) - mean;
    var += d * d;
  }
  var /= static_cast<double>(exponents.size() - 1);
  double se = std::sqrt(var / static_cast<double>(exponents.size()));
  return {mean, se, false};
}

}  // namespace

Chi2Estimate chi2_gaussian_mixture_mc(const SignalSpec& spec, std::size_t reps,
                                      RngSeed seed) {
  if (reps < 2) throw std::invalid_argument("chi2_gaussian_mixture_mc: reps must be >= 2");
  Chi2Estimate est;
  est.reps = reps;
  if (spec.kind == SignalSpec::Kind::zero) {
    est.value = 0.0;
    est.exact = true;
    return est;
  }
  if (spec.kind == SignalSpec::Kind::block) {
    // Point mass: chi^2 = exp(||M0||_F^2) - 1 with zero MC variance.
    double f = spec.theta * spec.theta * static_cast<double>(spec.k) *
               static_cast<double>(spec.k);
    est.value = f > kExpCap ? kInf : std::expm1(f);
    est.exact = true;
    return est;
  }
  Rng seeder(seed);
  std::vector<double> exponents(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = seeder.split(r);
    double inner;
    if (spec.kind == SignalSpec::Kind::permutation) {
      auto a = rng.sample_permutation(spec.p);
      auto b = rng.sample_permutation(spec.p);
      std::size_t coincide = 0;
      for (std::size_t i = 0; i < spec.p; ++i)
        if (a[i] == b[i]) ++coincide;
      inner = static_cast<double>(coincide);
    } else {
      PriorSample m1 = gen_prior_sample(spec.p, spec.m, spec.k, spec.t, rng);
      PriorSample m2 = gen_prior_sample(spec.p, spec.m, spec.k, spec.t, rng);
      inner = frobenius_inner(m1.matrix, m2.matrix);
    }
    exponents[r] = inner;
  }
  auto [mean, se, overflow] = exp_mean_se(exponents);
  est.value = overflow ? kInf : std::max(mean - 1.0, 0.0);
  est.std_error = se;
  return est;
}

double log_mgf_gh_exact(std::size_t p, std::size_t m, double t) {
  if (m > p) throw std::invalid_argument("log_mgf_gh_exact: m > p");
  if (t < 0) throw std::invalid_argument("log_mgf_gh_exact: t must be >= 0");
  if (m > kMgfEnumerationCap)
    throw BudgetError("log_mgf_gh_exact: m exceeds enumeration cap");
  const double log2 = std::log(2.0);
  std::vector<double> terms;
  for (std::size_t h = hyper_support_min(p, m); h <= m; ++h) {
    const double lp = log_hyper_pmf(p, m, h);
    // Walk endpoint g = 2j - h, j heads out of h steps.
    for (std::size_t j = 0; j <= h; ++j) {
      const double g = 2.0 * static_cast<double>(j) - static_cast<double>(h);
      terms.push_back(lp + log_choose(h, j) - static_cast<double>(h) * log2 +
                      t * g * g);
    }
  }
  return log_sum_exp(terms);
}

double mgf_gh_exact(std::size_t p, std::size_t m, double t) {
  double lv = log_mgf_gh_exact(p, m, t);
  return lv > kExpCap ? kInf : std::exp(lv);
}

double log_mgf_h_exact(std::size_t p, std::size_t m, double lam) {
  if (m > p) throw std::invalid_argument("log_mgf_h_exact: m > p");
  if (lam < 0) throw std::invalid_argument("log_mgf_h_exact: lam must be >= 0");
  if (m > kMgfEnumerationCap)
    throw BudgetError("log_mgf_h_exact: m exceeds enumeration cap");
  std::vector<double> terms;
  for (std::size_t h = hyper_support_min(p, m); h <= m; ++h) {
    const double hd = static_cast<double>(h);
    terms.push_back(log_hyper_pmf(p, m, h) + lam * hd * hd);
  }
  return log_sum_exp(terms);
}

double mgf_h_exact(std::size_t p, std::size_t m, double lam) {
  double lv = log_mgf_h_exact(p, m, lam);
  return lv > kExpCap ? kInf : std::exp(lv);
}

double chi2_upper_bound_cs(std::size_t p, std::size_t m, std::size_t k, double s) {
  if (s < 0) throw std::invalid_argument("chi2_upper_bound_cs: s must be >= 0");
  const double kd = static_cast<double>(k), md = static_cast<double>(m);
  const double rate_walk = 2.0 * kd * kd * std::sinh(s) / (md * md);
  const double rate_overlap = 2.0 * kd * kd * (std::cosh(s) - 1.0) / (md * md);
  const double half_log =
      0.5 * (log_mgf_gh_exact(p, m, rate_walk) + log_mgf_h_exact(p, m, rate_overlap));
  return half_log > kExpCap ? kInf : std::expm1(half_log);
}

SStarResult optimize_s_star(std::size_t p, std::size_t k,
                            const std::vector<std::size_t>& m_grid, double c) {
  if (m_grid.empty()) throw std::invalid_argument("optimize_s_star: empty grid");
  SStarResult best;
  best.s_star = -1.0;
  const double pd = static_cast<double>(p), kd = static_cast<double>(k);
  for (std::size_t m : m_grid) {
    if (m < k || m > p)
      throw std::invalid_argument("optimize_s_star: grid point outside [k, p]");
    const double md = static_cast<double>(m);
    const double y1 = c * md / (kd * kd) * std::log(M_E * pd / md);
    const double y2 = c * pd * pd / (md * md * kd * kd);
    const double s = std::min(std::acosh(1.0 + std::min(y1, y2)), std::asinh(y1));
    if (s > best.s_star) {
      best.s_star = s;
      best.m_star = m;
    }
  }
  return best;
}

std::size_t prior_m_preset_ksmall(std::size_t p) {
  const double pd = static_cast<double>(p);
  double m = std::round(std::cbrt(pd * pd / std::log(pd)));
  return static_cast<std::size_t>(std::clamp(m, 1.0, pd));
}

std::size_t prior_m_preset_kbig(std::size_t p, std::size_t k, double c) {
  const double pd = static_cast<double>(p), kd = static_cast<double>(k);
  double m = std::round(std::sqrt(pd * kd / (4.0 * c * c * std::log(M_E * pd / kd))));
  return static_cast<std::size_t>(std::clamp(m, kd, pd));
}

double tv_upper_from_chi2(double chi2) {
  if (chi2 < 0) throw std::invalid_argument("tv_upper_from_chi2: chi2 must be >= 0");
  if (chi2 == 0.0) return 0.0;
  auto f = [](double v) { return v * std::log((1.0 + v) / (1.0 - v)); };
  double lo = 0.0, hi = 1.0 - 1e-16;
  if (f(hi) <= chi2) return hi;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < chi2 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CovPairTerm cov_chi2_pair_term(const DenseMatrix& t, const DenseMatrix& t_tilde,
                               std::size_t n) {
  if (t.rows() != t.cols() || t_tilde.rows() != t.rows() ||
      t_tilde.cols() != t.cols())
    throw std::invalid_argument("cov_chi2_pair_term: need matching square matrices");
  if (spectral_norm(t) >= 1.0 || spectral_norm(t_tilde) >= 1.0)
    throw std::invalid_argument(
        "cov_chi2_pair_term: spectral radius >= 1, divergent regime");
  const std::size_t p = t.rows();
  DenseMatrix a = matmul(t, t_tilde);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - a(i, j);
  const double nd = static_cast<double>(n);
  CovPairTerm out;
  out.determinant_term = std::exp(-0.5 * nd * log_det(a));
  double inner = 0.5 * nd * frobenius_inner(t, t_tilde);
  out.surrogate = inner > kExpCap ? kInf : std::exp(inner);
  return out;
}

Chi2Estimate permutation_mgf(std::size_t p, std::size_t reps, RngSeed seed) {
  if (reps < 1) throw std::invalid_argument("permutation_mgf: reps must be >= 1");
  Chi2Estimate est;
  est.reps = reps;
  if (p <= 8) {
    // Rencontres distribution: P(S = l) = C(p,l) D_{p-l} / p!.
    std::vector<double> derangements(p + 1);
    derangements[0] = 1.0;
    if (p >= 1) derangements[1] = 0.0;
    for (std::size_t i = 2; i <= p; ++i)
      derangements[i] =
          static_cast<double>(i - 1) * (derangements[i - 1] + derangements[i - 2]);
    double fact = std::tgamma(static_cast<double>(p) + 1);
    double value = 0.0;
    for (std::size_t l = 0; l <= p; ++l) {
      double prob = std::exp(log_choose(p, l)) * derangements[p - l] / fact;
      value += prob * std::exp(static_cast<double>(l));
    }
    est.value = value;
    est.exact = true;
    return est;
  }
  Rng seeder(seed);
  std::vector<double> exponents(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = seeder.split(r);
    auto perm = rng.sample_permutation(p);
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < p; ++i)
      if (perm[i] == i) ++fixed;
    exponents[r] = static_cast<double>(fixed);
  }
  auto [mean, se, overflow] = exp_mean_se(exponents);
  est.value = overflow ? kInf : mean;
  est.std_error = se;
  return est;
}

BoundaryPoint boundary_curves(std::size_t p, std::size_t k) {
  if (k < 1 || k > p) throw std::invalid_argument("boundary_curves: need 1 <= k <= p");
  const double pd = static_cast<double>(p), kd = static_cast<double>(k);
  const double logp = std::log(pd);
  const double fourth_root =
      std::pow(kd * pd * std::log(M_E * pd / kd), 0.25);
  BoundaryPoint out;
  out.lambda1 =
      kd <= std::cbrt(pd / logp) ? kd * std::sqrt(logp) : fourth_root;
  if (kd <= std::cbrt(pd * logp)) {
    const double arg = pd * logp / (kd * kd * kd);
    if (arg <= 1.0) {
      out.lambda0 = 0.0;
      out.lambda0_clamped = true;
    } else {
      out.lambda0 = kd * std::sqrt(std::log(arg));
    }
  } else {
    out.lambda0 = fourth_root;
  }
  return out;
}

double beta_star(double alpha) {
  if (alpha < 0 || alpha > 1)
    throw std::invalid_argument("beta_star: alpha must be in [0,1]");
  return alpha <= 1.0 / 3.0 ? alpha : (1.0 + alpha) / 4.0;
}

}  // namespace sparsedet
