#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparsedet/detectors.hpp"
#include "sparsedet/signals.hpp"

using namespace sparsedet;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_normal();
  return m;
}

// Exhaustive scan by a brutally simple recursion, independent of the library
// enumeration order, valued with the test-side SVD.
double brute_scan(const DenseMatrix& x, std::size_t m, bool principal) {
  const std::size_t p = x.rows();
  std::vector<IndexSet> subsets;
  IndexSet cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == m) {
      subsets.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < p; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  double best = -1.0;
  for (const auto& is : subsets) {
    if (principal) {
      best = std::max(best, oracle::spectral_norm(submatrix(x, is, is)));
    } else {
      for (const auto& js : subsets)
        best = std::max(best, oracle::spectral_norm(submatrix(x, is, js)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("threshold_estimate zeroes small entries only") {
  DenseMatrix x(2, 2, {3.0, -0.1, 0.2, -4.0});
  DenseMatrix t = threshold_estimate(x, 1.0);
  CHECK(t(0, 0) == 3.0);
  CHECK(t(0, 1) == 0.0);
  CHECK(t(1, 0) == 0.0);
  CHECK(t(1, 1) == -4.0);
}

TEST_CASE("mean threshold test thresholds and decision rule") {
  Rng rng({31});
  DenseMatrix x = add_gaussian_noise(DenseMatrix(100, 100), rng);
  TestReport rep = mean_threshold_test(x, 2, 0.05);
  CHECK(rep.thresholds.at("tau") == doctest::Approx(5.21394).epsilon(1e-4));
  CHECK(rep.thresholds.at("lambda_cut") ==
        doctest::Approx(4.0 * rep.thresholds.at("tau")));
  CHECK(rep.reject == (rep.statistics.at("thresholded_spectral") >=
                       rep.thresholds.at("lambda_cut")));

  DenseMatrix strong = gen_block_signal(100, 2, 30.0);
  TestReport hit = mean_threshold_test(add_gaussian_noise(strong, rng), 2, 0.05);
  CHECK(hit.reject);
  CHECK(hit.fired_stage == "threshold");
}

TEST_CASE("stage thresholds match their closed forms") {
  CHECK(chi2_stage_threshold(100, 0.1) == doctest::Approx(308.091).epsilon(1e-4));
  CHECK(scan_stage_threshold(100, 10) == doctest::Approx(29.3113).epsilon(1e-4));
  CHECK(frob_chi2_statistic(DenseMatrix(7, 7)) == doctest::Approx(-49.0));
}

TEST_CASE("scan fast paths") {
  Rng rng({32});
  DenseMatrix x = random_matrix(8, 8, rng);
  ScanResult m1 = scan_statistic(x, ScanConfig::exhaustive_scan(1));
  double max_abs = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    max_abs = std::max(max_abs, std::fabs(x.data()[i]));
  CHECK(m1.value == doctest::Approx(max_abs));

  ScanConfig diag = ScanConfig::exhaustive_scan(1);
  diag.principal_only = true;
  double max_diag = 0;
  for (std::size_t i = 0; i < 8; ++i) max_diag = std::max(max_diag, std::fabs(x(i, i)));
  CHECK(scan_statistic(x, diag).value == doctest::Approx(max_diag));

  ScanResult full = scan_statistic(x, ScanConfig::exhaustive_scan(8));
  CHECK(full.value == doctest::Approx(spectral_norm(x)));
}

TEST_CASE("exhaustive scan equals the brute-force oracle") {
  Rng rng({33});
  for (int rep = 0; rep < 5; ++rep) {
    DenseMatrix x = random_matrix(7, 7, rng);
    for (std::size_t m : {std::size_t{2}, std::size_t{3}}) {
      ScanResult got = scan_statistic(x, ScanConfig::exhaustive_scan(m));
      CHECK(got.value == doctest::Approx(brute_scan(x, m, false)).epsilon(1e-9));
      CHECK_FALSE(got.approximate);
      CHECK(got.rows.size() == m);
      CHECK(got.cols.size() == m);
      // The reported witness certifies the reported value.
      CHECK(spectral_norm(submatrix(x, got.rows, got.cols)) ==
            doctest::Approx(got.value));
      ScanConfig pr = ScanConfig::exhaustive_scan(m);
      pr.principal_only = true;
      CHECK(scan_statistic(x, pr).value ==
            doctest::Approx(brute_scan(x, m, true)).epsilon(1e-9));
    }
  }
}

TEST_CASE("local search with restarts recovers the exhaustive value") {
  Rng rng({34});
  for (int rep = 0; rep < 10; ++rep) {
    DenseMatrix x = random_matrix(10, 10, rng);
    ScanResult exact = scan_statistic(x, ScanConfig::exhaustive_scan(2));
    ScanResult approx = scan_statistic(
        x, ScanConfig::random_restarts(2, 200, 50, {std::uint64_t(rep), 5}));
    CHECK(approx.approximate);
    CHECK(approx.value == doctest::Approx(exact.value));
  }
}

TEST_CASE("enumeration cap is enforced") {
  DenseMatrix x(40, 40, 1.0);
  ScanConfig cfg = ScanConfig::exhaustive_scan(10);
  CHECK_THROWS_AS(scan_statistic(x, cfg), BudgetError);
  ScanConfig bad = ScanConfig::exhaustive_scan(0);
  CHECK_THROWS_AS(scan_statistic(x, bad), std::invalid_argument);
}

TEST_CASE("default scan size stays within [1, p]") {
  CHECK(default_scan_size(100, 10) >= 1);
  CHECK(default_scan_size(100, 100) <= 100);
  CHECK(default_scan_size(4, 1) >= 1);
}

TEST_CASE("two-stage test fires the right stage") {
  Rng rng({35});
  const std::size_t p = 30;
  // Huge Frobenius energy: the chi^2 stage must fire.
  DenseMatrix loud(p, p, 3.0);
  TestReport chi = mean_chi2_scan_test(add_gaussian_noise(loud, rng), 2, 0.1,
                                       ScanConfig::exhaustive_scan(2));
  CHECK(chi.reject);
  CHECK(chi.fired_stage == "chi2");
  // Decision is re-derivable from the recorded numbers.
  CHECK(chi.reject == (chi.statistics.at("frob_chi2") >= chi.thresholds.at("s") ||
                       chi.statistics.at("scan_value") >= chi.thresholds.at("t")));

  // Energy concentrated on one 2x2 block: the scan stage sees it.
  DenseMatrix spike = gen_block_signal(p, 2, 20.0);
  TestReport scan = mean_chi2_scan_test(add_gaussian_noise(spike, rng), 2, 0.1,
                                        ScanConfig::exhaustive_scan(2));
  CHECK(scan.reject);
  CHECK(scan.witness.has_value());
}

TEST_CASE("sample covariance equals the naive average of outer products") {
  Rng rng({36});
  DenseMatrix data = random_matrix(13, 4, rng);
  DenseMatrix s = sample_covariance(data);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0;
      for (std::size_t r = 0; r < 13; ++r) acc += data(r, i) * data(r, j);
      CHECK(s(i, j) == doctest::Approx(acc / 13.0));
    }
}

TEST_CASE("q statistic on an explicit two-sample dataset") {
  // n = 2, p = 2: Q = p + <x1,x2>^2 - |x1|^2 - |x2|^2.
  DenseMatrix data(2, 2, {1.0, 2.0, 3.0, -1.0});
  const double inner = 1.0 * 3.0 + 2.0 * -1.0;
  const double expect = 2.0 + inner * inner - 5.0 - 10.0;
  CHECK(q_statistic(data) == doctest::Approx(expect));
  CHECK_THROWS_AS(q_statistic(DenseMatrix(1, 2, 1.0)), std::invalid_argument);
}

TEST_CASE("covariance threshold test rejects a strong planted correlation") {
  Rng rng({37});
  const std::size_t p = 20, n = 5000;
  TestReport null_rep =
      cov_threshold_test(sample_gaussian_data(DenseMatrix::identity(p), n, rng), 2, 0.1);
  CHECK(null_rep.reject == (null_rep.statistics.at("thresholded_spectral") >=
                            null_rep.thresholds.at("lambda_cut")));
  DenseMatrix sigma = DenseMatrix::identity(p);
  sigma(0, 1) = sigma(1, 0) = 0.9;
  TestReport alt_rep =
      cov_threshold_test(sample_gaussian_data(sigma, n, rng), 2, 0.1);
  CHECK(alt_rep.reject);
}

TEST_CASE("covariance two-stage test demands a principal scan") {
  Rng rng({38});
  DenseMatrix data = sample_gaussian_data(DenseMatrix::identity(10), 40, rng);
  CHECK_THROWS_AS(cov_chi2_scan_test(data, 2, 0.1, ScanConfig::exhaustive_scan(2)),
                  std::invalid_argument);
  ScanConfig pr = ScanConfig::exhaustive_scan(2);
  pr.principal_only = true;
  TestReport rep = cov_chi2_scan_test(data, 2, 0.1, pr);
  CHECK(rep.statistics.count("q_stat") == 1);
  CHECK(rep.statistics.count("scan_value") == 1);
  // Override replaces the scan threshold verbatim.
  TestReport forced = cov_chi2_scan_test(data, 2, 0.1, pr, 1e9);
  CHECK(forced.thresholds.at("t") == 1e9);
}

TEST_CASE("calibration quantile is deterministic and ordered in epsilon") {
  ScanConfig pr = ScanConfig::exhaustive_scan(2);
  pr.principal_only = true;
  const double strict = calibrate_cov_scan_threshold(10, 40, 0.05, pr, 100, {9, 0});
  const double loose = calibrate_cov_scan_threshold(10, 40, 0.4, pr, 100, {9, 0});
  const double again = calibrate_cov_scan_threshold(10, 40, 0.05, pr, 100, {9, 0});
  CHECK(strict == again);
  CHECK(strict >= loose);
  CHECK(strict > 1.0);  // diagonal entries of S concentrate near 1
}

TEST_CASE("report serialization carries the decision and both maps") {
  Rng rng({39});
  DenseMatrix x = add_gaussian_noise(DenseMatrix(20, 20), rng);
  std::string json = mean_threshold_test(x, 2, 0.1).to_json();
  CHECK(json.find("decision") != std::string::npos);
  CHECK(json.find("stat.thresholded_spectral") != std::string::npos);
  CHECK(json.find("thr.lambda_cut") != std::string::npos);
}
