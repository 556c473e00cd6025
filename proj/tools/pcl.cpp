// pcl: predictions, single trajectories, ensembles, analysis and the oracle.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "pcl/analytics.hpp"
#include "pcl/config.hpp"
#include "pcl/ensemble.hpp"
#include "pcl/oracle.hpp"
#include "pcl/qt/phase_operator.hpp"
#include "pcl/report.hpp"

namespace {

using namespace pcl;

constexpr int kConfigError = 1;
constexpr int kValidationFailure = 3;

struct ModelOverrides {
  std::string preset;
  std::string config;
  double n_bar = std::nan("");
  double kerr = std::nan("");
  double kappa = std::nan("");
  double m_tot = std::nan("");

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "experiment preset used as the base configuration");
    app->add_option("--config", config, "INI configuration file");
    app->add_option("--n-bar", n_bar, "mean photon number");
    app->add_option("--U", kerr, "Kerr constant in units of B12 M_tot");
    app->add_option("--kappa", kappa, "cavity loss in units of B12 M_tot");
    app->add_option("--mtot", m_tot, "number of dye molecules (B12 M_tot stays the time unit)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config.empty())
      c = load_config(config);
    else if (!preset.empty())
      c = pcl::preset(preset);
    else
      c = pcl::preset("fig1-interacting");
    if (!std::isnan(m_tot)) c.model = with_reservoir(c.model, std::llround(m_tot));
    if (!std::isnan(n_bar)) c.model.n_bar = n_bar;
    if (!std::isnan(kerr)) c.model.kerr = kerr;
    if (!std::isnan(kappa)) c.model.kappa = kappa;
    c.model.validate();
    return c;
  }
};

void print_prediction(const ModelParams& p, double xi) {
  const CoherencePrediction c = predict_coherence(p, xi);
  const ExcitationNumber ex = excitation_number(p, p.n_bar, c.eta);
  nlohmann::json j;
  j["n_bar"] = p.n_bar;
  j["sigma"] = c.sigma;
  j["m_eff"] = c.m_eff;
  j["eta_g2zero"] = c.eta;
  j["eta_thermodynamic"] = thermodynamic_eta(c.sigma);
  j["g2_zero"] = 1.0 + c.eta * c.eta;
  j["gamma2"] = c.gamma2;
  j["tau_c2"] = 1.0 / c.gamma2;
  j["xi"] = xi;
  j["gamma1"] = c.gamma1;
  j["tau_c1"] = 1.0 / c.gamma1;
  j["antibunching_dip"] = c.dip;
  j["tau_x"] = c.tau_x;
  j["excitations"] = ex.x;
  j["m_up"] = ex.m_up;
  if (p.kerr > 0.0) j["henry_time"] = std::sqrt(2.0) / (p.kerr * p.n_bar * c.eta);
  j["tau0_seconds"] = p.tau0_seconds();
  std::cout << j.dump(2) << "\n";
}

int run_configs(const ExperimentConfig& base, double scale, const EnsembleOptions& opt, bool analyze) {
  const ExperimentConfig cfg = scale < 1.0 ? base.scaled(scale) : base;
  int code = 0;
  for (const ExperimentConfig& c : cfg.expand()) {
    const RunManifest m = run_ensemble(c, opt);
    std::cerr << c.name << ": " << m.completed() << "/" << m.trajectories.size() << " trajectories in "
              << m.wall_seconds << " s -> " << c.output_dir << "\n";
    if (m.failures() > 0) code = 2;
    if (analyze && m.completed() > 0) {
      const EnsembleReport r = analyze_ensemble(c, load_trajectories(c.output_dir, m));
      write_report(c.output_dir, r);
      std::cout << r.to_json().dump(2) << "\n";
    }
  }
  return code;
}

int validate_suite() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " = " << value << "\n";
    failures += !ok;
  };
  const ModelParams p = model_preset("rhodamine6g-560nm");
  const double m_eff = effective_reservoir_size(p, 1000.0);
  check("M_eff/7.6e7", std::abs(m_eff / 7.6e7 - 1.0) < 0.02, m_eff / 7.6e7);
  check("sigma", std::abs(p.interaction_parameter() - 0.64) < 0.01, p.interaction_parameter());
  const double eta = thermodynamic_eta(p.interaction_parameter());
  check("eta_thermodynamic", std::abs(eta - 0.75) < 0.01, eta);
  const OracleInstance o = oracle_small_instance();
  const NumberDistribution ss = steady_state(make_birth_death(o.model, o.x, o.n_max));
  const NumberDistribution db = detailed_balance_distribution(o.model, o.x, o.n_max);
  double worst = 0.0;
  for (std::size_t n = 0; n < ss.probabilities.size(); ++n)
    worst = std::max(worst, std::abs(ss.probabilities[n] - (n < db.probabilities.size() ? db.probabilities[n] : 0.0)));
  check("oracle_vs_detailed_balance", worst < 1e-10, worst);
  GaussianMoments g{200.0, 0.3, 60.0, 0.0, 0.5};
  g.close_purity();
  const FockToGaussianResult back = fock_to_gaussian(gaussian_to_fock(g, 400), g.mean_theta);
  check("round_trip_mean_n", std::abs(back.moments.mean_n / g.mean_n - 1.0) < 0.01, back.moments.mean_n);
  return failures == 0 ? 0 : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photon condensate coherence simulator"};
  app.require_subcommand(1);

  // predict
  auto* predict = app.add_subcommand("predict", "closed-form predictions for a configuration");
  ModelOverrides predict_model;
  predict_model.attach(predict);
  double xi = 2.0;
  predict->add_option("--xi", xi, "g1 decay factor in [2, 4]");

  // sim
  auto* sim = app.add_subcommand("sim", "single trajectory to CSV");
  std::string engine_name;
  ModelOverrides sim_model;
  sim_model.attach(sim);
  double duration = std::nan(""), burn_in = std::nan(""), sampling_dt = std::nan("");
  std::uint64_t seed = 1, trajectory = 0;
  std::string sim_out;
  sim->add_option("engine", engine_name, "rate | hpm | qt")->required()->check(CLI::IsMember({"rate", "hpm", "qt"}));
  sim->add_option("--duration", duration, "end time [tau0]");
  sim->add_option("--burn-in", burn_in, "first sample time [tau0]");
  sim->add_option("--dt", sampling_dt, "sampling interval [tau0]");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--trajectory", trajectory, "trajectory index within the seed");
  sim->add_option("-o,--out", sim_out, "output CSV (default stdout)");

  // run-preset
  auto* run = app.add_subcommand("run-preset", "ensemble run of a preset or config file, followed by analysis");
  std::string run_name, run_config, run_out;
  double scale = 1.0;
  unsigned workers = 0;
  bool no_resume = false, no_analysis = false, verbose = false;
  double checkpoint = std::nan("");
  std::uint64_t run_seed = 0;
  run->add_option("preset", run_name, "preset name")->check(CLI::IsMember(preset_names()));
  run->add_option("--config", run_config, "INI configuration file instead of a preset");
  run->add_option("--scale", scale, "shrink durations and sample counts by this factor")->check(CLI::Range(1e-6, 1.0));
  run->add_option("--workers", workers, "worker threads (default: PCL_WORKERS or hardware concurrency)");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--checkpoint-interval", checkpoint, "simulated time between checkpoints");
  run->add_flag("--no-resume", no_resume, "ignore existing checkpoints");
  run->add_flag("--no-analysis", no_analysis, "skip the post-run analysis");
  run->add_flag("-v,--verbose", verbose, "per-trajectory progress");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "re-run the analysis of a finished ensemble directory");
  std::string analyze_dir;
  analyze->add_option("dir", analyze_dir, "ensemble output directory")->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "master-equation reference on a small fixed-X instance");
  int nmax = 30;
  std::int64_t x = 10;
  double mtot = 1e4, tau_max = 100.0, oracle_kerr = 0.0, oracle_kappa = 0.0, detuning_kt = -8.0;
  int points = 101;
  std::string oracle_out;
  oracle->add_option("--nmax", nmax, "Fock truncation");
  oracle->add_option("--X", x, "total excitation number");
  oracle->add_option("--mtot", mtot, "number of dye molecules");
  oracle->add_option("--tau-max", tau_max, "largest correlation lag [tau0]");
  oracle->add_option("--points", points, "lag grid points");
  oracle->add_option("--U", oracle_kerr, "Kerr constant [B12 M_tot]");
  oracle->add_option("--kappa", oracle_kappa, "cavity loss [B12 M_tot]");
  oracle->add_option("--detuning-kt", detuning_kt, "Delta in units of T");
  oracle->add_option("--out", oracle_out, "output prefix (writes <prefix>_pn.csv and <prefix>_corr.csv)");

  auto* validate = app.add_subcommand("validate", "quick analytic and oracle self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*predict) {
      print_prediction(predict_model.resolve().model, xi);
      return 0;
    }
    if (*sim) {
      ExperimentConfig c = sim_model.resolve();
      c.engine = parse_engine(engine_name);
      if (!std::isnan(duration)) c.window.duration = duration;
      if (!std::isnan(burn_in)) c.window.burn_in = burn_in;
      if (!std::isnan(sampling_dt)) c.window.sampling_dt = sampling_dt;
      c.seed = seed;
      c.window.validate();
      auto traj = make_trajectory(c, trajectory);
      const TimeSeries ts = record(*traj, c.window);
      if (sim_out.empty()) {
        ts.write_csv(std::cout);
      } else {
        std::ofstream out(sim_out, std::ios::binary);
        ts.write_csv(out);
      }
      return 0;
    }
    if (*run) {
      if (run_name.empty() == run_config.empty()) throw ConfigError("give exactly one of a preset name or --config");
      ExperimentConfig c = run_config.empty() ? preset(run_name) : load_config(run_config);
      if (!run_out.empty()) c.output_dir = run_out;
      if (run_seed != 0) c.seed = run_seed;
      if (!std::isnan(checkpoint)) c.checkpoint_interval = checkpoint;
      c.validate();
      EnsembleOptions opt;
      opt.workers = workers;
      opt.resume = !no_resume;
      opt.quiet = !verbose;
      return run_configs(c, scale, opt, !no_analysis);
    }
    if (*analyze) {
      const RunManifest m = load_manifest(analyze_dir);
      ExperimentConfig c = parse_config(m.config_ini);
      c.output_dir = analyze_dir;
      const EnsembleReport r = analyze_ensemble(c, load_trajectories(analyze_dir, m));
      write_report(analyze_dir, r);
      std::cout << r.to_json().dump(2) << "\n";
      return m.exit_code();
    }
    if (*oracle) {
      OracleInstance o = oracle_small_instance();
      ModelParams p = with_reservoir(o.model, std::llround(mtot));
      p.kerr = oracle_kerr;
      p.kappa = oracle_kappa;
      p.detuning = detuning_kt * p.temperature;
      p.validate();
      const CoherenceGenerator gen = make_coherence_generator(p, x, nmax);
      const NumberDistribution ss = steady_state(gen.populations());
      std::vector<double> grid(static_cast<std::size_t>(std::max(points, 2)));
      for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = tau_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
      const CorrelationEstimate g2 = g2_correlator(gen.populations(), ss, grid);
      const CorrelationEstimate g1 = g1_correlator(gen, ss, grid);
      std::ofstream pn_file, corr_file;
      std::ostream* pn = &std::cout;
      std::ostream* corr = &std::cout;
      if (!oracle_out.empty()) {
        pn_file.open(oracle_out + "_pn.csv");
        corr_file.open(oracle_out + "_corr.csv");
        pn = &pn_file;
        corr = &corr_file;
      }
      *pn << "n,p\n";
      for (std::size_t n = 0; n < ss.probabilities.size(); ++n) *pn << n << "," << format_double(ss.probabilities[n]) << "\n";
      *corr << "tau,g2,g1_re,g1_im,g1_abs\n";
      for (std::size_t i = 0; i < grid.size(); ++i)
        *corr << format_double(grid[i]) << "," << format_double(g2.values[i].real()) << ","
              << format_double(g1.values[i].real()) << "," << format_double(g1.values[i].imag()) << ","
              << format_double(std::abs(g1.values[i])) << "\n";
      return 0;
    }
    if (*validate) return validate_suite();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnphysicalParameters& e) {
    std::cerr << "unphysical parameters: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
