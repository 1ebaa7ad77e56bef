#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparsedet/detectors.hpp"
#include "sparsedet/rng.hpp"
#include "sparsedet/signals.hpp"

namespace sparsedet {

inline constexpr int kConfigSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestSetting {
  std::string name;  // threshold | chi2_scan | cov_threshold | cov_chi2_scan
  std::map<std::string, double> params;  // epsilon, m, restarts, iters, t_cov
};

struct ExperimentConfig {
  std::string model = "mean";  // mean | covariance
  std::size_t p = 0;
  std::size_t k = 0;
  std::size_t n = 0;  // covariance only
  SignalSpec signal;
  std::vector<double> lambda_grid;
  std::vector<TestSetting> tests;
  std::size_t replicates = 1;
  RngSeed seed;
  std::string csv_path;
  std::string plot_path;
  std::size_t threads = 0;  // 0: resolve from SPARSEDET_THREADS, else hardware
};

// Sectioned key = value text with a leading "schema = 1" line. Unknown keys
// and malformed lines abort with a diagnostic naming the field.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string serialize_experiment_config(const ExperimentConfig& cfg);

struct PhaseRow {
  double alpha = 0.0;  // ln k / ln p
  double beta = 0.0;   // ln lambda / ln p
  std::size_t p = 0;
  std::size_t k = 0;
  double lambda = 0.0;
  std::string test;
  double type1_hat = 0.0;
  double type2_hat = 0.0;
  double se = 0.0;  // binomial SE of type2_hat
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

struct PhaseTable {
  std::vector<PhaseRow> rows;
};

// Monte Carlo sweep over (test, lambda): Type-I under the null, Type-II
// against the configured signal rescaled to spectral norm lambda. Replicates
// are seeded individually, so the table is identical for any thread count.
// Rows come out sorted by (test, lambda).
PhaseTable run_experiment(const ExperimentConfig& cfg);

void emit_phase_csv(const PhaseTable& table, const std::string& path);
std::string phase_csv_string(const PhaseTable& table);
PhaseTable parse_phase_csv(const std::string& text);

// Static SVG: empirical total-error markers over (alpha, beta) with the
// beta*(alpha) polyline and the phase-diagram region boundaries overlaid.
void emit_phase_plot(const PhaseTable& table, const std::string& path);

std::size_t resolve_thread_count(std::size_t flag_value);

}  // namespace sparsedet
