#include "sparsedet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "sparsedet/divergence.hpp"

namespace sparsedet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& v, const std::string& field) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: field '" + field + "' is not a number: " + v);
  }
}

std::size_t to_size(const std::string& v, const std::string& field) {
  double d = to_double(v, field);
  if (d < 0 || d != std::floor(d))
    throw ConfigError("config: field '" + field + "' is not a nonnegative integer");
  return static_cast<std::size_t>(d);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

struct GridPoint {
  std::size_t test_idx;
  std::size_t lambda_idx;
};

const char* kKnownTests[] = {"threshold", "chi2_scan", "cov_threshold",
                             "cov_chi2_scan"};

bool test_is_cov(const std::string& name) {
  return name.rfind("cov_", 0) == 0;
}

double param_or(const TestSetting& t, const std::string& key, double fallback) {
  auto it = t.params.find(key);
  return it == t.params.end() ? fallback : it->second;
}

ScanConfig scan_config_for(const TestSetting& t, const ExperimentConfig& cfg,
                           bool principal) {
  const std::size_t m = static_cast<std::size_t>(param_or(t, "m", 0.0));
  const std::size_t restarts =
      static_cast<std::size_t>(param_or(t, "restarts", 0.0));
  ScanConfig sc;
  if (restarts > 0) {
    sc = ScanConfig::random_restarts(
        m == 0 ? default_scan_size(cfg.p, cfg.k) : m, restarts,
        static_cast<std::size_t>(param_or(t, "iters", 50.0)),
        {cfg.seed.seed ^ 0x5ca45ca4u, cfg.seed.stream});
  } else {
    sc = ScanConfig::exhaustive_scan(m);
  }
  sc.m = m;  // 0 lets the test pick its default
  sc.principal_only = principal;
  return sc;
}

// Signal draw rescaled so its spectral norm is exactly lambda. Random kinds
// are rescaled per draw, so the simulated alternative tracks the grid value
// rather than the prior's average strength.
DenseMatrix scaled_signal(const ExperimentConfig& cfg, double lambda, Rng& rng) {
  SignalSpec spec = cfg.signal;
  if (spec.kind == SignalSpec::Kind::zero) return DenseMatrix(cfg.p, cfg.p);
  if (spec.kind == SignalSpec::Kind::block) {
    spec.theta = lambda / static_cast<double>(spec.k);
    return gen_signal(spec, rng);
  }
  DenseMatrix m = gen_signal(spec, rng);
  double norm = spectral_norm(m);
  while (norm == 0.0) {
    m = gen_signal(spec, rng);
    norm = spectral_norm(m);
  }
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= lambda / norm;
  return m;
}

bool run_one_replicate(const ExperimentConfig& cfg, const TestSetting& test,
                       double lambda, bool alternative, Rng& rng) {
  const bool cov = test_is_cov(test.name);
  const double epsilon = param_or(test, "epsilon", 0.1);
  DenseMatrix x(0, 0);
  if (!cov) {
    DenseMatrix signal =
        alternative ? scaled_signal(cfg, lambda, rng) : DenseMatrix(cfg.p, cfg.p);
    x = add_gaussian_noise(signal, rng);
  } else {
    DenseMatrix sigma = DenseMatrix::identity(cfg.p);
    if (alternative) {
      DenseMatrix delta = scaled_signal(cfg, lambda, rng);
      for (std::size_t i = 0; i < sigma.size(); ++i)
        sigma.data()[i] += delta.data()[i];
    }
    x = sample_gaussian_data(sigma, cfg.n, rng);
  }
  TestReport rep;
  if (test.name == "threshold") {
    rep = mean_threshold_test(x, cfg.k, epsilon);
  } else if (test.name == "chi2_scan") {
    rep = mean_chi2_scan_test(x, cfg.k, epsilon, scan_config_for(test, cfg, false));
  } else if (test.name == "cov_threshold") {
    rep = cov_threshold_test(x, cfg.k, epsilon, param_or(test, "c_tau", 16.0));
  } else {
    std::optional<double> t_cov;
    if (test.params.count("t_cov")) t_cov = test.params.at("t_cov");
    rep = cov_chi2_scan_test(x, cfg.k, epsilon, scan_config_for(test, cfg, true),
                             t_cov);
  }
  return rep.reject;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.model != "mean" && cfg.model != "covariance")
    throw ConfigError("config: field 'model' must be mean or covariance");
  if (cfg.p < 2) throw ConfigError("config: field 'p' must be >= 2");
  if (cfg.k < 1 || cfg.k > cfg.p)
    throw ConfigError("config: field 'k' must lie in [1, p]");
  if (cfg.model == "covariance" && cfg.n < 2)
    throw ConfigError("config: field 'n' must be >= 2 for the covariance model");
  if (cfg.replicates < 1)
    throw ConfigError("config: field 'replicates' must be >= 1");
  if (cfg.lambda_grid.empty())
    throw ConfigError("config: field 'grid.lambda' must be nonempty");
  for (double l : cfg.lambda_grid)
    if (!(l > 0))
      throw ConfigError("config: field 'grid.lambda' entries must be positive");
  if (cfg.tests.empty()) throw ConfigError("config: no [test.*] sections");
  for (const auto& t : cfg.tests) {
    bool known = std::any_of(std::begin(kKnownTests), std::end(kKnownTests),
                             [&](const char* n) { return t.name == n; });
    if (!known)
      throw ConfigError("config: unknown test '" + t.name + "'");
    if (test_is_cov(t.name) != (cfg.model == "covariance"))
      throw ConfigError("config: test '" + t.name + "' does not match model '" +
                        cfg.model + "'");
  }
  if (cfg.model == "covariance" &&
      cfg.signal.kind == SignalSpec::Kind::least_favorable)
    throw ConfigError(
        "config: field 'signal.kind': least_favorable draws are not symmetric; "
        "use kind = block for the covariance model");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.signal.kind = SignalSpec::Kind::block;
  std::string section;
  bool schema_seen = false;
  std::string signal_kind = "block";
  std::size_t signal_m = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header: " + line);
      section = line.substr(1, line.size() - 2);
      if (section.rfind("test.", 0) == 0)
        cfg.tests.push_back({section.substr(5), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section.empty() ? key : section + "." + key;
    if (section.empty()) {
      if (key != "schema")
        throw ConfigError("config: unknown top-level field '" + key + "'");
      if (to_size(value, field) != static_cast<std::size_t>(kConfigSchemaVersion))
        throw ConfigError("config: unsupported schema version " + value);
      schema_seen = true;
    } else if (section == "experiment") {
      if (key == "model") cfg.model = value;
      else if (key == "p") cfg.p = to_size(value, field);
      else if (key == "k") cfg.k = to_size(value, field);
      else if (key == "n") cfg.n = to_size(value, field);
      else if (key == "replicates") cfg.replicates = to_size(value, field);
      else if (key == "seed") cfg.seed.seed = to_size(value, field);
      else if (key == "stream") cfg.seed.stream = to_size(value, field);
      else if (key == "threads") cfg.threads = to_size(value, field);
      else throw ConfigError("config: unknown field '" + field + "'");
    } else if (section == "signal") {
      if (key == "kind") signal_kind = value;
      else if (key == "m") signal_m = to_size(value, field);
      else throw ConfigError("config: unknown field '" + field + "'");
    } else if (section == "grid") {
      if (key != "lambda")
        throw ConfigError("config: unknown field '" + field + "'");
      for (const auto& part : split(value, ','))
        cfg.lambda_grid.push_back(to_double(part, field));
    } else if (section == "output") {
      if (key == "csv") cfg.csv_path = value;
      else if (key == "plot") cfg.plot_path = value;
      else throw ConfigError("config: unknown field '" + field + "'");
    } else if (section.rfind("test.", 0) == 0) {
      cfg.tests.back().params[key] = to_double(value, field);
    } else {
      throw ConfigError("config: unknown section '" + section + "'");
    }
  }
  if (!schema_seen) throw ConfigError("config: missing 'schema' field");
  if (signal_kind == "block") {
    cfg.signal = SignalSpec::block(cfg.p, cfg.k, 1.0);
  } else if (signal_kind == "least_favorable") {
    if (signal_m == 0) signal_m = prior_m_preset_kbig(cfg.p, cfg.k);
    cfg.signal = SignalSpec::least_favorable(cfg.p, signal_m, cfg.k, 1.0);
  } else if (signal_kind == "permutation") {
    cfg.signal = SignalSpec::permutation(cfg.p);
  } else if (signal_kind == "zero") {
    cfg.signal = SignalSpec::zero(cfg.p);
  } else {
    throw ConfigError("config: unknown field value 'signal.kind = " +
                      signal_kind + "'");
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "schema = " << kConfigSchemaVersion << "\n\n[experiment]\n";
  out << "model = " << cfg.model << "\n";
  out << "p = " << cfg.p << "\nk = " << cfg.k << "\n";
  if (cfg.model == "covariance") out << "n = " << cfg.n << "\n";
  out << "replicates = " << cfg.replicates << "\n";
  out << "seed = " << cfg.seed.seed << "\nstream = " << cfg.seed.stream << "\n";
  out << "\n[signal]\nkind = ";
  switch (cfg.signal.kind) {
    case SignalSpec::Kind::block: out << "block"; break;
    case SignalSpec::Kind::least_favorable:
      out << "least_favorable\nm = " << cfg.signal.m;
      break;
    case SignalSpec::Kind::permutation: out << "permutation"; break;
    case SignalSpec::Kind::zero: out << "zero"; break;
  }
  out << "\n\n[grid]\nlambda = ";
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i)
    out << (i ? ", " : "") << fmt17(cfg.lambda_grid[i]);
  out << "\n";
  for (const auto& t : cfg.tests) {
    out << "\n[test." << t.name << "]\n";
    for (const auto& [k, v] : t.params) out << k << " = " << fmt17(v) << "\n";
  }
  if (!cfg.csv_path.empty() || !cfg.plot_path.empty()) {
    out << "\n[output]\n";
    if (!cfg.csv_path.empty()) out << "csv = " << cfg.csv_path << "\n";
    if (!cfg.plot_path.empty()) out << "plot = " << cfg.plot_path << "\n";
  }
  return out.str();
}

std::size_t resolve_thread_count(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SPARSEDET_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

PhaseTable run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::size_t threads = resolve_thread_count(cfg.threads);
  const std::size_t n_lambda = cfg.lambda_grid.size();
  const std::size_t reps = cfg.replicates;
  const double logp = std::log(static_cast<double>(cfg.p));
  Rng seeder(cfg.seed);

  PhaseTable table;
  for (std::size_t ti = 0; ti < cfg.tests.size(); ++ti) {
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const TestSetting& test = cfg.tests[ti];
      const double lambda = cfg.lambda_grid[li];
      // Per-replicate counters filled by a static partition of [0, reps);
      // each replicate owns its sub-seed, so the split across threads does
      // not affect the outcome.
      std::vector<std::uint8_t> null_reject(reps), alt_reject(reps);
      auto worker = [&](std::size_t first, std::size_t last) {
        for (std::size_t r = first; r < last; ++r) {
          const std::uint64_t base = ((ti * n_lambda + li) * reps + r) * 2;
          Rng rng0 = seeder.split(base);
          null_reject[r] = run_one_replicate(cfg, test, lambda, false, rng0);
          Rng rng1 = seeder.split(base + 1);
          alt_reject[r] = run_one_replicate(cfg, test, lambda, true, rng1);
        }
      };
      if (threads <= 1 || reps < 2) {
        worker(0, reps);
      } else {
        std::vector<std::thread> pool;
        const std::size_t nt = std::min(threads, reps);
        for (std::size_t t = 0; t < nt; ++t)
          pool.emplace_back(worker, reps * t / nt, reps * (t + 1) / nt);
        for (auto& th : pool) th.join();
      }
      std::size_t false_alarms = 0, misses = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        false_alarms += null_reject[r];
        misses += 1 - alt_reject[r];
      }
      PhaseRow row;
      row.alpha = std::log(static_cast<double>(cfg.k)) / logp;
      row.beta = std::log(lambda) / logp;
      row.p = cfg.p;
      row.k = cfg.k;
      row.lambda = lambda;
      row.test = test.name;
      row.type1_hat = static_cast<double>(false_alarms) / static_cast<double>(reps);
      row.type2_hat = static_cast<double>(misses) / static_cast<double>(reps);
      row.se = std::sqrt(row.type2_hat * (1.0 - row.type2_hat) /
                         static_cast<double>(reps));
      row.replicates = reps;
      row.seed = cfg.seed.seed;
      table.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const PhaseRow& a, const PhaseRow& b) {
                     if (a.test != b.test) return a.test < b.test;
                     return a.lambda < b.lambda;
                   });
  return table;
}

std::string phase_csv_string(const PhaseTable& table) {
  std::ostringstream out;
  out << "alpha,beta,p,k,lambda,test,type1_hat,type2_hat,se,replicates,seed\n";
  for (const auto& r : table.rows) {
    out << fmt17(r.alpha) << ',' << fmt17(r.beta) << ',' << r.p << ',' << r.k
        << ',' << fmt17(r.lambda) << ',' << csv_quote(r.test) << ','
        << fmt17(r.type1_hat) << ',' << fmt17(r.type2_hat) << ',' << fmt17(r.se)
        << ',' << r.replicates << ',' << r.seed << '\n';
  }
  return out.str();
}

void emit_phase_csv(const PhaseTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("emit_phase_csv: cannot open " + path);
  out << phase_csv_string(table);
  if (!out) throw std::runtime_error("emit_phase_csv: write failed: " + path);
}

PhaseTable parse_phase_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("parse_phase_csv: empty input");
  PhaseTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 11)
      throw std::runtime_error("parse_phase_csv: bad row: " + line);
    PhaseRow r;
    r.alpha = std::stod(fields[0]);
    r.beta = std::stod(fields[1]);
    r.p = std::stoull(fields[2]);
    r.k = std::stoull(fields[3]);
    r.lambda = std::stod(fields[4]);
    r.test = fields[5];
    r.type1_hat = std::stod(fields[6]);
    r.type2_hat = std::stod(fields[7]);
    r.se = std::stod(fields[8]);
    r.replicates = std::stoull(fields[9]);
    r.seed = std::stoull(fields[10]);
    table.rows.push_back(std::move(r));
  }
  return table;
}

namespace {

// Plot coordinates: unit square in (alpha, beta) mapped into the SVG frame.
constexpr double kPlotSize = 480.0;
constexpr double kMargin = 60.0;

double px(double alpha) { return kMargin + alpha * kPlotSize; }
double py(double beta) { return kMargin + (1.0 - beta) * kPlotSize; }

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts,
              const std::string& style) {
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto& [a, b] : pts) out << fmt_coord(px(a)) << ',' << fmt_coord(py(b)) << ' ';
  out << "\"/>\n";
}

}  // namespace

void emit_phase_plot(const PhaseTable& table, const std::string& path) {
  if (table.rows.empty())
    throw std::invalid_argument("emit_phase_plot: table is empty");
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("emit_phase_plot: cannot open " + path);
  const double w = kPlotSize + 2 * kMargin;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << w << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kPlotSize << "\" height=\"" << kPlotSize
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  // Region boundaries: detectability polyline with its knee at (1/3, 1/3),
  // the thresholding line beta = alpha, and the spectrum line beta = 1/2.
  polyline(out, {{0, 0}, {1.0 / 3, 1.0 / 3}, {1, 0.5}},
           "stroke=\"black\" stroke-width=\"2.5\"");
  polyline(out, {{0, 0}, {0.5, 0.5}},
           "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"6,4\"");
  polyline(out, {{0, 0.5}, {1, 0.5}},
           "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"6,4\"");
  out << "<text x=\"" << fmt_coord(px(0.5)) << "\" y=\"" << fmt_coord(py(-0.08))
      << "\" text-anchor=\"middle\">alpha = log k / log p</text>\n";
  out << "<text x=\"" << fmt_coord(px(-0.09)) << "\" y=\"" << fmt_coord(py(0.5))
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << fmt_coord(px(-0.09)) << ' ' << fmt_coord(py(0.5))
      << ")\">beta = log lambda / log p</text>\n";
  for (const auto& r : table.rows) {
    const double err = std::clamp(r.type1_hat + r.type2_hat, 0.0, 1.0);
    const int red = static_cast<int>(std::lround(255 * err));
    const int green = 255 - red;
    const double a = std::clamp(r.alpha, 0.0, 1.0);
    const double b = std::clamp(r.beta, 0.0, 1.0);
    out << "<circle cx=\"" << fmt_coord(px(a)) << "\" cy=\"" << fmt_coord(py(b))
        << "\" r=\"5\" fill=\"rgb(" << red << ',' << green
        << ",60)\" stroke=\"black\" stroke-width=\"0.5\"><title>" << r.test
        << " lambda=" << fmt17(r.lambda) << " err=" << fmt17(err)
        << "</title></circle>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("emit_phase_plot: write failed: " + path);
}

}  // namespace sparsedet
