#include "sparsedet/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "sparsedet/kernels.hpp"

namespace sparsedet {

namespace {

double binom_count(std::size_t p, std::size_t m) {
  double c = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    c *= static_cast<double>(p - i) / static_cast<double>(i + 1);
    if (c > 1e18) return c;
  }
  return c;
}

bool next_combination(IndexSet& c, std::size_t p) {
  const std::size_t m = c.size();
  std::size_t i = m;
  while (i > 0) {
    --i;
    if (c[i] != i + p - m) {
      ++c[i];
      for (std::size_t j = i + 1; j < m; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

IndexSet first_combination(std::size_t m) {
  IndexSet c(m);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

// Fixed-budget power iteration used only to steer the local search; the
// reported scan value is always recomputed with spectral_norm.
std::vector<double> approx_right_singular_vector(const DenseMatrix& a, int iters) {
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> v(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
  std::vector<double> w(rows), z(cols);
  for (int it = 0; it < iters; ++it) {
    kern::matvec(a.data(), rows, cols, v.data(), w.data());
    kern::matvec_t(a.data(), rows, cols, w.data(), z.data());
    double nz = std::sqrt(kern::sum_sq(z.data(), cols));
    if (nz == 0.0) break;
    for (std::size_t j = 0; j < cols; ++j) v[j] = z[j] / nz;
  }
  return v;
}

IndexSet top_m_by_score(const std::vector<double>& score, std::size_t m) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score[a] > score[b];
  });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

ScanResult scan_max_entry(const DenseMatrix& x) {
  ScanResult best;
  best.value = -1.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (std::fabs(x(i, j)) > best.value) {
        best.value = std::fabs(x(i, j));
        best.rows = {i};
        best.cols = {j};
      }
  return best;
}

ScanResult scan_max_diag_entry(const DenseMatrix& x) {
  ScanResult best;
  best.value = -1.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (std::fabs(x(i, i)) > best.value) {
      best.value = std::fabs(x(i, i));
      best.rows = {i};
      best.cols = {i};
    }
  return best;
}

ScanResult scan_exhaustive(const DenseMatrix& x, const ScanConfig& cfg) {
  const std::size_t p = x.rows();
  const std::size_t m = cfg.m;
  const double candidates = cfg.principal_only
                                ? binom_count(p, m)
                                : binom_count(p, m) * binom_count(p, m);
  if (candidates > cfg.enumeration_cap)
    throw BudgetError("scan_statistic: exhaustive enumeration exceeds cap");
  ScanResult best;
  best.value = -1.0;
  IndexSet is = first_combination(m);
  do {
    if (cfg.principal_only) {
      double v = spectral_norm(submatrix(x, is, is));
      if (v > best.value) best = {v, is, is, false};
    } else {
      IndexSet js = first_combination(m);
      do {
        double v = spectral_norm(submatrix(x, is, js));
        if (v > best.value) best = {v, is, js, false};
      } while (next_combination(js, p));
    }
  } while (next_combination(is, p));
  return best;
}

ScanResult scan_local_search(const DenseMatrix& x, const ScanConfig& cfg) {
  const std::size_t p = x.rows();
  const std::size_t m = cfg.m;
  ScanResult best;
  best.value = -1.0;
  best.approximate = true;
  Rng seeder(cfg.seed);
  std::vector<double> score(p);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng rng = seeder.split(r);
    IndexSet is = rng.sample_subset(p, m);
    IndexSet js = cfg.principal_only ? is : rng.sample_subset(p, m);
    for (std::size_t it = 0; it < cfg.iters; ++it) {
      DenseMatrix a = submatrix(x, is, js);
      std::vector<double> v = approx_right_singular_vector(a, 50);
      // Score every row of X against the current right vector.
      for (std::size_t i = 0; i < p; ++i) {
        double s = 0.0;
        for (std::size_t b = 0; b < m; ++b) s += x(i, js[b]) * v[b];
        score[i] = std::fabs(s);
      }
      IndexSet new_is = top_m_by_score(score, m);
      IndexSet new_js;
      if (cfg.principal_only) {
        new_js = new_is;
      } else {
        // Score columns against the induced left vector.
        std::vector<double> u(m);
        double nu = 0.0;
        for (std::size_t a2 = 0; a2 < m; ++a2) {
          double s = 0.0;
          for (std::size_t b = 0; b < m; ++b) s += x(new_is[a2], js[b]) * v[b];
          u[a2] = s;
          nu += s * s;
        }
        nu = std::sqrt(nu);
        if (nu > 0)
          for (double& ui : u) ui /= nu;
        for (std::size_t j = 0; j < p; ++j) {
          double s = 0.0;
          for (std::size_t a2 = 0; a2 < m; ++a2) s += x(new_is[a2], j) * u[a2];
          score[j] = std::fabs(s);
        }
        new_js = top_m_by_score(score, m);
      }
      if (new_is == is && new_js == js) break;
      is = std::move(new_is);
      js = std::move(new_js);
    }
    double v = spectral_norm(submatrix(x, is, js));
    if (v > best.value) {
      best.value = v;
      best.rows = is;
      best.cols = js;
    }
  }
  return best;
}

void set_decision(TestReport& rep,
                  const std::vector<std::pair<std::string, std::string>>& pairs,
                  const std::vector<std::string>& stage_names) {
  rep.reject = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [stat, thr] = pairs[i];
    if (rep.statistics.at(stat) >= rep.thresholds.at(thr)) {
      rep.reject = true;
      if (!rep.fired_stage) rep.fired_stage = stage_names[i];
    }
  }
}

}  // namespace

ScanConfig ScanConfig::exhaustive_scan(std::size_t m) {
  ScanConfig c;
  c.m = m;
  c.exhaustive = true;
  return c;
}

ScanConfig ScanConfig::random_restarts(std::size_t m, std::size_t restarts,
                                       std::size_t iters, RngSeed seed) {
  ScanConfig c;
  c.m = m;
  c.exhaustive = false;
  c.restarts = restarts;
  c.iters = iters;
  c.seed = seed;
  return c;
}

DenseMatrix threshold_estimate(const DenseMatrix& x, double tau) {
  if (tau < 0) throw std::invalid_argument("threshold_estimate: tau must be >= 0");
  DenseMatrix out(x.rows(), x.cols());
  kern::hard_threshold(x.data(), out.data(), x.size(), tau);
  return out;
}

TestReport mean_threshold_test(const DenseMatrix& x, std::size_t k, double epsilon) {
  if (epsilon <= 0 || epsilon >= 1)
    throw std::invalid_argument("mean_threshold_test: epsilon must be in (0,1)");
  const double p = static_cast<double>(x.rows());
  const double tau = std::sqrt(2.0 * std::log(4.0 * p * p / epsilon));
  const double lambda_cut = 2.0 * static_cast<double>(k) * tau;
  TestReport rep;
  rep.statistics["thresholded_spectral"] = spectral_norm(threshold_estimate(x, tau));
  rep.thresholds["tau"] = tau;
  rep.thresholds["lambda_cut"] = lambda_cut;
  set_decision(rep, {{"thresholded_spectral", "lambda_cut"}}, {"threshold"});
  return rep;
}

double frob_chi2_statistic(const DenseMatrix& x) {
  const double p = static_cast<double>(x.rows());
  return frobenius_norm_sq(x) - p * p;
}

ScanResult scan_statistic(const DenseMatrix& x, const ScanConfig& cfg) {
  const std::size_t p = x.rows();
  if (cfg.principal_only && x.rows() != x.cols())
    throw std::invalid_argument("scan_statistic: principal scan needs a square matrix");
  if (cfg.m < 1 || cfg.m > std::min(x.rows(), x.cols()))
    throw std::invalid_argument("scan_statistic: m out of range");
  if (cfg.m == std::min(x.rows(), x.cols()) && x.rows() == x.cols()) {
    IndexSet all = first_combination(p);
    return {spectral_norm(x), all, all, false};
  }
  if (cfg.m == 1)
    return cfg.principal_only ? scan_max_diag_entry(x) : scan_max_entry(x);
  return cfg.exhaustive ? scan_exhaustive(x, cfg) : scan_local_search(x, cfg);
}

double chi2_stage_threshold(std::size_t p, double epsilon) {
  const double l = std::log(1.0 / epsilon);
  return 2.0 * l + 2.0 * static_cast<double>(p) * std::sqrt(l);
}

double scan_stage_threshold(std::size_t p, std::size_t m) {
  const double md = static_cast<double>(m);
  const double pd = static_cast<double>(p);
  return 2.0 * std::sqrt(md) + 4.0 * std::sqrt(md * std::log(M_E * pd / md));
}

std::size_t default_scan_size(std::size_t p, std::size_t k, double c_scan) {
  const double pd = static_cast<double>(p), kd = static_cast<double>(k);
  double m = std::ceil(c_scan * std::sqrt(kd * pd / std::log(M_E * pd / kd)));
  m = std::clamp(m, 1.0, pd);
  return static_cast<std::size_t>(m);
}

TestReport mean_chi2_scan_test(const DenseMatrix& x, std::size_t k, double epsilon,
                               ScanConfig cfg) {
  if (epsilon <= 0 || epsilon >= 0.5)
    throw std::invalid_argument("mean_chi2_scan_test: epsilon must be in (0,1/2)");
  const std::size_t p = x.rows();
  if (cfg.m == 0) cfg.m = default_scan_size(p, k);
  TestReport rep;
  rep.statistics["frob_chi2"] = frob_chi2_statistic(x);
  rep.thresholds["s"] = chi2_stage_threshold(p, epsilon);
  ScanResult scan = scan_statistic(x, cfg);
  rep.statistics["scan_value"] = scan.value;
  rep.thresholds["t"] = scan_stage_threshold(p, cfg.m);
  rep.thresholds["m"] = static_cast<double>(cfg.m);
  rep.witness = std::make_pair(scan.rows, scan.cols);
  rep.scan_approximate = scan.approximate;
  set_decision(rep, {{"frob_chi2", "s"}, {"scan_value", "t"}}, {"chi2", "scan"});
  return rep;
}

DenseMatrix sample_covariance(const DenseMatrix& data) {
  const std::size_t n = data.rows(), p = data.cols();
  if (n < 1) throw std::invalid_argument("sample_covariance: need n >= 1");
  DenseMatrix s(p, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < p; ++i) {
      double xi = data(r, i);
      if (xi == 0.0) continue;
      kern::axpy(xi, data.row(r), s.row(i), p);
    }
  kern::scale(s.data(), s.size(), 1.0 / static_cast<double>(n));
  return s;
}

TestReport cov_threshold_test(const DenseMatrix& data, std::size_t k, double epsilon,
                              double c_tau, double c_n) {
  if (epsilon <= 0 || epsilon >= 1)
    throw std::invalid_argument("cov_threshold_test: epsilon must be in (0,1)");
  const std::size_t n = data.rows(), p = data.cols();
  if (n < 1) throw std::invalid_argument("cov_threshold_test: need n >= 1");
  const double tau =
      std::sqrt(c_tau * std::log(static_cast<double>(p) / epsilon) / static_cast<double>(n));
  DenseMatrix centered = sample_covariance(data);
  for (std::size_t i = 0; i < p; ++i) centered(i, i) -= 1.0;
  TestReport rep;
  rep.statistics["thresholded_spectral"] = spectral_norm(threshold_estimate(centered, tau));
  rep.thresholds["tau"] = tau;
  rep.thresholds["lambda_cut"] = 2.0 * static_cast<double>(k) * tau;
  rep.sample_size_warning =
      static_cast<double>(n) < c_n * std::log(static_cast<double>(p));
  set_decision(rep, {{"thresholded_spectral", "lambda_cut"}}, {"threshold"});
  return rep;
}

double q_statistic(const DenseMatrix& data) {
  const std::size_t n = data.rows(), p = data.cols();
  if (n < 2) throw std::invalid_argument("q_statistic: need n >= 2");
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = kern::sum_sq(data.row(i), p);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = kern::dot(data.row(i), data.row(j), p);
      acc += d * d - self[i] - self[j];
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(p) + acc / pairs;
}

TestReport cov_chi2_scan_test(const DenseMatrix& data, std::size_t k, double epsilon,
                              ScanConfig cfg, std::optional<double> t_cov_override) {
  if (epsilon <= 0 || epsilon >= 0.5)
    throw std::invalid_argument("cov_chi2_scan_test: epsilon must be in (0,1/2)");
  if (!cfg.principal_only)
    throw std::invalid_argument("cov_chi2_scan_test: cfg.principal_only must be true");
  const std::size_t p = data.cols();
  if (cfg.m == 0) cfg.m = default_scan_size(p, k);
  DenseMatrix s = sample_covariance(data);
  TestReport rep;
  rep.statistics["q_stat"] = q_statistic(data);
  rep.thresholds["s"] = chi2_stage_threshold(p, epsilon);
  ScanResult scan = scan_statistic(s, cfg);
  rep.statistics["scan_value"] = scan.value;
  rep.thresholds["t"] =
      t_cov_override ? *t_cov_override : scan_stage_threshold(p, cfg.m);
  rep.thresholds["m"] = static_cast<double>(cfg.m);
  rep.witness = std::make_pair(scan.rows, scan.cols);
  rep.scan_approximate = scan.approximate;
  set_decision(rep, {{"q_stat", "s"}, {"scan_value", "t"}}, {"chi2", "scan"});
  return rep;
}

double calibrate_cov_scan_threshold(std::size_t p, std::size_t n, double epsilon,
                                    ScanConfig cfg, std::size_t reps, RngSeed seed) {
  if (reps < 1) throw std::invalid_argument("calibrate: need reps >= 1");
  std::vector<double> values(reps);
  Rng seeder(seed);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = seeder.split(r);
    DenseMatrix data(n, p);
    for (std::size_t i = 0; i < data.size(); ++i) data.data()[i] = rng.next_normal();
    values[r] = scan_statistic(sample_covariance(data), cfg).value;
  }
  std::sort(values.begin(), values.end());
  const double q = 1.0 - epsilon / 2.0;
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(reps)));
  idx = std::min(std::max<std::size_t>(idx, 1), reps) - 1;
  return values[idx];
}

std::string TestReport::to_json() const {
  nlohmann::json j;
  j["decision"] = reject ? "reject" : "accept";
  for (const auto& [k, v] : statistics) j["stat." + k] = v;
  for (const auto& [k, v] : thresholds) j["thr." + k] = v;
  if (fired_stage) j["fired_stage"] = *fired_stage;
  if (witness) {
    j["scan.I"] = witness->first;
    j["scan.J"] = witness->second;
  }
  if (scan_approximate) j["scan.approximate"] = true;
  if (sample_size_warning) j["sample_size_warning"] = true;
  return j.dump();
}

}  // namespace sparsedet
