#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsedet/detectors.hpp"
#include "sparsedet/divergence.hpp"
#include "sparsedet/experiment.hpp"
#include "sparsedet/matrix.hpp"
#include "sparsedet/witness.hpp"

namespace {

using namespace sparsedet;

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  std::string out;
};

void print_boundary_row(std::size_t p, std::size_t k) {
  BoundaryPoint b = boundary_curves(p, k);
  const double alpha =
      std::log(static_cast<double>(k)) / std::log(static_cast<double>(p));
  std::printf("p=%zu k=%zu alpha=%.6g lambda1=%.6g lambda0=%.6g beta_star=%.6g%s\n",
              p, k, alpha, b.lambda1, b.lambda0, beta_star(alpha),
              b.lambda0_clamped ? " (lambda0 clamped)" : "");
}

int run(int argc, char** argv) {
  CLI::App app{"sparse matrix detection toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "Base RNG seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--threads", g.threads, "Worker thread count (0 = auto)");
  app.add_option("--out", g.out, "Output path override");

  auto* sim = app.add_subcommand("simulate", "Run a config-driven sweep");
  std::string config_path;
  sim->add_option("config", config_path, "Experiment config file")->required();

  auto* bnd = app.add_subcommand("boundary", "Tabulate boundary curves");
  std::size_t bp = 0, bk = 0;
  bnd->add_option("--p", bp, "Dimension")->required();
  bnd->add_option("--k", bk, "Sparsity")->required();

  auto* wit = app.add_subcommand("witness", "Find a spectral witness submatrix");
  std::string wit_in;
  std::size_t wit_k = 0, wit_restarts = 10;
  double wit_cw = 8.0;
  wit->add_option("--in", wit_in, "Matrix file")->required();
  wit->add_option("--k", wit_k, "Sparsity")->required();
  wit->add_option("--c-w", wit_cw, "Sample-size constant");
  wit->add_option("--restarts", wit_restarts, "Sampling restarts");

  auto* div = app.add_subcommand("divergence", "Chi-square divergence evaluators");
  std::size_t dp = 0, dm = 0, dk = 0, dreps = 0, dsweep = 0;
  double ds = -1.0, dt = 0.0, dsmax = 2.0;
  bool dperm = false;
  div->add_option("--p", dp, "Dimension")->required();
  div->add_option("--m", dm, "Prior submatrix size");
  div->add_option("--k", dk, "Sparsity");
  div->add_option("--s", ds, "Tilt parameter (omit to optimize)");
  div->add_option("--t", dt, "Prior amplitude for the Monte Carlo estimate");
  div->add_option("--mc", dreps, "Monte Carlo replicates (0 = skip)");
  div->add_option("--sweep", dsweep, "Emit a CSV sweep over this many s values");
  div->add_option("--s-max", dsmax, "Upper end of the sweep grid");
  div->add_flag("--permutation", dperm, "Permutation-prior MGF instead");

  auto* cal = app.add_subcommand("calibrate", "Covariance scan threshold");
  std::size_t cp = 0, cn = 0, cm = 0, creps = 200;
  double ceps = 0.1;
  cal->add_option("--p", cp, "Dimension")->required();
  cal->add_option("--n", cn, "Sample size")->required();
  cal->add_option("--m", cm, "Scan size")->required();
  cal->add_option("--epsilon", ceps, "Target level");
  cal->add_option("--reps", creps, "Calibration replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (*sim) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (g.seed_set) cfg.seed.seed = g.seed;
    if (g.threads > 0) cfg.threads = g.threads;
    if (!g.out.empty()) cfg.csv_path = g.out;
    PhaseTable table = run_experiment(cfg);
    if (cfg.csv_path.empty()) {
      std::cout << phase_csv_string(table);
    } else {
      emit_phase_csv(table, cfg.csv_path);
      std::cerr << "wrote " << cfg.csv_path << "\n";
    }
    if (!cfg.plot_path.empty()) {
      emit_phase_plot(table, cfg.plot_path);
      std::cerr << "wrote " << cfg.plot_path << "\n";
    }
    return 0;
  }
  if (*bnd) {
    print_boundary_row(bp, bk);
    return 0;
  }
  if (*wit) {
    DenseMatrix m = load_matrix(wit_in);
    WitnessReport rep = find_witness(m, wit_k, wit_cw, wit_restarts,
                                     {g.seed_set ? g.seed : 0, 0});
    std::cout << rep.to_json() << "\n";
    return 0;
  }
  if (*div) {
    const RngSeed seed{g.seed_set ? g.seed : 0, 0};
    if (dperm) {
      Chi2Estimate est = permutation_mgf(dp, dreps == 0 ? 100000 : dreps, seed);
      std::printf("permutation_mgf=%.10g se=%.3g %s\n", est.value, est.std_error,
                  est.exact ? "(exact)" : "(monte carlo)");
      return 0;
    }
    if (dm == 0 || dk == 0)
      throw ConfigError("divergence: --m and --k are required without --permutation");
    if (dsweep > 0) {
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!g.out.empty()) {
        file.open(g.out, std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open for writing: " + g.out);
        out = &file;
      }
      *out << "p,k,m,s,value,method,se\n";
      char buf[160];
      for (std::size_t i = 0; i < dsweep; ++i) {
        const double s = dsmax * double(i + 1) / double(dsweep);
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g,cs_exact,0\n",
                      dp, dk, dm, s, chi2_upper_bound_cs(dp, dm, dk, s));
        *out << buf;
        if (dreps > 0) {
          Chi2Estimate est = chi2_gaussian_mixture_mc(
              SignalSpec::least_favorable(dp, dm, dk, std::sqrt(s)), dreps,
              {seed.seed + i, seed.stream});
          std::snprintf(buf, sizeof buf,
                        "%zu,%zu,%zu,%.17g,%.17g,monte_carlo,%.17g\n", dp, dk,
                        dm, s, est.value, est.std_error);
          *out << buf;
        }
      }
      return 0;
    }
    double s = ds;
    if (s < 0) {
      std::vector<std::size_t> grid;
      for (std::size_t m2 = dk; m2 <= dp; m2 = std::max(m2 + 1, m2 * 5 / 4))
        grid.push_back(m2);
      SStarResult opt = optimize_s_star(dp, dk, grid);
      s = opt.s_star;
      std::printf("s_star=%.10g m_star=%zu\n", opt.s_star, opt.m_star);
    }
    double cs = chi2_upper_bound_cs(dp, dm, dk, s);
    std::printf("chi2_cs=%.10g tv_upper=%.10g\n", cs, tv_upper_from_chi2(cs));
    if (dreps > 0) {
      Chi2Estimate est = chi2_gaussian_mixture_mc(
          SignalSpec::least_favorable(dp, dm, dk, dt), dreps, seed);
      std::printf("chi2_mc=%.10g se=%.3g\n", est.value, est.std_error);
    }
    return 0;
  }
  ScanConfig sc = ScanConfig::exhaustive_scan(cm);
  sc.principal_only = true;
  double t = calibrate_cov_scan_threshold(cp, cn, ceps, sc, creps,
                                          {g.seed_set ? g.seed : 0, 0});
  std::printf("t_cov=%.10g\n", t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
