#pragma once

#include <map>
#include <optional>
#include <string>

#include "sparsedet/matrix.hpp"
#include "sparsedet/rng.hpp"

namespace sparsedet {

/// Outcome of one test. The decision is always re-derivable from the
/// recorded statistics and thresholds: reject iff some statistic strictly
/// exceeds its threshold.
struct TestReport {
  bool reject = false;
  std::map<std::string, double> statistics;  // thresholded_spectral, frob_chi2, scan_value, q_stat
  std::map<std::string, double> thresholds;  // tau, lambda_cut, s, t, m
  std::optional<std::string> fired_stage;    // chi2 | scan | threshold
  std::optional<std::pair<IndexSet, IndexSet>> witness;  // scan certificate
  bool scan_approximate = false;   // true when the scan used local search
  bool sample_size_warning = false;

  std::string to_json() const;
};

struct ScanConfig {
  std::size_t m = 1;
  bool exhaustive = true;
  std::size_t restarts = 100;
  std::size_t iters = 50;
  bool principal_only = false;
  RngSeed seed;
  // Exhaustive enumeration is refused above this many candidate submatrices.
  double enumeration_cap = 2e6;

  static ScanConfig exhaustive_scan(std::size_t m);
  static ScanConfig random_restarts(std::size_t m, std::size_t restarts,
                                    std::size_t iters, RngSeed seed = {});
};

struct ScanResult {
  double value = 0.0;
  IndexSet rows;
  IndexSet cols;
  bool approximate = false;
};

// Entrywise X_ij * 1{|X_ij| >= tau}.
DenseMatrix threshold_estimate(const DenseMatrix& x, double tau);

// Spectral-norm test of the thresholded matrix; tau = sqrt(2 ln(4 p^2 / eps)),
// reject iff ||Th(X)||_2 >= 2 k tau.
TestReport mean_threshold_test(const DenseMatrix& x, std::size_t k, double epsilon);

// ||X||_F^2 - p^2.
double frob_chi2_statistic(const DenseMatrix& x);

// Largest spectral norm over m x m submatrices (principal ones when
// cfg.principal_only). Exhaustive under the cap, otherwise seeded greedy
// local search with random restarts.
ScanResult scan_statistic(const DenseMatrix& x, const ScanConfig& cfg);

// Two-stage test: chi^2 stage with s = 2 ln(1/eps) + 2 p sqrt(ln(1/eps)),
// scan stage with t = 2 sqrt(m) + 4 sqrt(m ln(e p / m)).
TestReport mean_chi2_scan_test(const DenseMatrix& x, std::size_t k, double epsilon,
                               ScanConfig cfg);

double chi2_stage_threshold(std::size_t p, double epsilon);
double scan_stage_threshold(std::size_t p, std::size_t m);
// Default submatrix size ceil(c_scan * sqrt(k p / ln(e p / k))), clamped to [1, p].
std::size_t default_scan_size(std::size_t p, std::size_t k, double c_scan = 1.0);

// S = (1/n) sum_i X_i X_i^T (rows of data are the samples; no centering).
DenseMatrix sample_covariance(const DenseMatrix& data);

// Thresholding test on S - I with tau = sqrt(c_tau ln(p/eps) / n).
TestReport cov_threshold_test(const DenseMatrix& data, std::size_t k, double epsilon,
                              double c_tau = 16.0, double c_n = 1.0);

// Unbiased estimator of ||Sigma - I||_F^2.
double q_statistic(const DenseMatrix& data);

// Q(S) + principal scan of S. When t_cov_override is set it replaces the
// Gaussian-scale scan threshold (see calibrate_cov_scan_threshold).
TestReport cov_chi2_scan_test(const DenseMatrix& data, std::size_t k, double epsilon,
                              ScanConfig cfg,
                              std::optional<double> t_cov_override = {});

// Empirical (1 - eps/2)-quantile of the principal scan of S under Sigma = I
// with matched (n, p, m) and per-replicate seeding.
double calibrate_cov_scan_threshold(std::size_t p, std::size_t n, double epsilon,
                                    ScanConfig cfg, std::size_t reps, RngSeed seed);

}  // namespace sparsedet
