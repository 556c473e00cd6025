#include "pcl/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace pcl {

std::vector<double> number_series(const TimeSeries& ts, Engine e) {
  return ts.column(e == Engine::qt ? "mean_n" : "n");
}

std::vector<cplx> field_series(const TimeSeries& ts, Engine e) {
  std::vector<cplx> out;
  if (e == Engine::qt) {
    const auto re = ts.column("re_alpha");
    const auto im = ts.column("im_alpha");
    for (std::size_t i = 0; i < re.size(); ++i) out.emplace_back(re[i], im[i]);
  } else if (e == Engine::hpm) {
    const auto n = ts.column("n");
    const auto th = ts.column("theta_unwrapped");
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(std::polar(std::sqrt(std::max(n[i], 0.0)), th[i]));
  } else {
    throw EstimationError("the rate engine carries no phase");
  }
  return out;
}

std::int64_t reference_excitations(const ExperimentConfig& c) {
  if (c.rate.excitations >= 0) return c.rate.excitations;
  const ModelParams& p = c.model;
  return std::llround(excitation_number(p, p.n_bar, std::sqrt(g2zero(p, p.n_bar))).x);
}

double xi_from_tau(const ModelParams& p, double tau_c) {
  return mean_absorption_rate(p, p.n_bar) * tau_c / p.n_bar;
}

EnsembleReport analyze_ensemble(const ExperimentConfig& c, const std::vector<TimeSeries>& runs) {
  if (runs.empty()) throw EstimationError("no completed trajectories to analyze");
  EnsembleReport r;
  r.name = c.name;
  r.trajectories = runs.size();
  const ModelParams& p = c.model;
  const double dt = c.window.sampling_dt;

  std::vector<std::vector<double>> numbers;
  std::vector<double> pooled;
  for (const auto& ts : runs) {
    numbers.push_back(number_series(ts, c.engine));
    pooled.insert(pooled.end(), numbers.back().begin(), numbers.back().end());
  }
  double s = 0.0, s2 = 0.0;
  for (double v : pooled) {
    s += v;
    s2 += v * v;
  }
  r.mean_n = s / static_cast<double>(pooled.size());
  r.eta = std::sqrt(std::max(0.0, s2 / static_cast<double>(pooled.size()) - r.mean_n * r.mean_n)) / r.mean_n;
  if (p.n_bar > 0.0) {
    r.eta_g2zero = std::sqrt(g2zero(p, p.n_bar));
    r.eta_thermodynamic = thermodynamic_eta(p.interaction_parameter());
  }

  if (c.analysis.histogram) {
    try {
      r.reference = detailed_balance_distribution(p, reference_excitations(c));
      r.histogram = compare_histogram(pooled, r.reference, c.analysis.histogram_bins);
    } catch (const std::exception& e) {
      r.errors.push_back(std::string("histogram: ") + e.what());
    }
  }

  if (c.analysis.g2_max_tau > 0.0) {
    try {
      G2Report g;
      g.estimate = g2_estimate(numbers, dt, c.analysis.g2_max_tau);
      g.gamma2_predicted = gamma2(p, p.n_bar);
      CorrelationEstimate shifted = g.estimate;
      for (auto& v : shifted.values) v -= 1.0;
      try {
        g.fit = fit_decay(shifted, DecayModel::exponential, {0.0, 2.0 / g.gamma2_predicted});
      } catch (const EstimationError& e) {
        r.errors.push_back(std::string("g2 fit: ") + e.what());
      }
      if (c.analysis.g2_max_tau >= 5e4) {
        double acc = 0.0;
        int k = 0;
        for (std::size_t i = 0; i < shifted.tau.size(); ++i) {
          if (shifted.tau[i] < 1e4 || shifted.tau[i] > 5e4) continue;
          acc += shifted.values[i].real();
          ++k;
        }
        if (k > 0) g.plateau = acc / k;
      }
      r.g2 = g;
    } catch (const std::exception& e) {
      r.errors.push_back(std::string("g2: ") + e.what());
    }
  }

  if (c.analysis.g1_max_tau > 0.0 && c.engine != Engine::rate) {
    try {
      std::vector<std::vector<cplx>> fields;
      for (const auto& ts : runs) fields.push_back(field_series(ts, c.engine));
      r.g1 = analyze_g1(p, fields, dt, c.analysis.g1_max_tau);
    } catch (const std::exception& e) {
      r.errors.push_back(std::string("g1: ") + e.what());
    }
  }
  return r;
}

FitWindow g1_short_window(const ModelParams& p) {
  if (p.kerr > 0.0) return {0.0, 1.5 * std::sqrt(2.0) / (p.kerr * p.n_bar * std::sqrt(g2zero(p, p.n_bar)))};
  return {0.0, 1.0 / gamma2(p, p.n_bar)};
}

FitWindow g1_long_window(const ModelParams& p, double max_tau) {
  const double tc2 = 1.0 / gamma2(p, p.n_bar);
  return {3.0 * tc2, std::min(10.0 * tc2, max_tau)};
}

G1Report analyze_g1(const ModelParams& p, const std::vector<std::vector<cplx>>& fields, double dt, double max_tau) {
  G1Report g;
  g.estimate = g1_estimate(fields, dt, max_tau);
  g.estimate.frame_detuning = p.frame_detuning();
  g.tau_c1_xi2 = 1.0 / gamma1(p, p.n_bar, 2.0);
  g.tau_c2 = 1.0 / gamma2(p, p.n_bar);
  if (p.kerr > 0.0) g.henry_time = std::sqrt(2.0) / (p.kerr * p.n_bar * std::sqrt(g2zero(p, p.n_bar)));
  FitWindow shortw = g1_short_window(p);
  shortw.tau_max = std::min(shortw.tau_max, max_tau);
  // fit failures leave the optional empty; the window is reported in the fit itself
  try {
    g.exponential = fit_decay(g.estimate, DecayModel::exponential, shortw);
    g.xi = xi_from_tau(p, g.exponential->tau_c);
  } catch (const EstimationError&) {
  }
  try {
    g.gaussian = fit_decay(g.estimate, DecayModel::gaussian, shortw);
  } catch (const EstimationError&) {
  }
  const FitWindow longw = g1_long_window(p, max_tau);
  if (p.kerr == 0.0 && longw.tau_max > longw.tau_min) {
    try {
      g.exponential_long = fit_decay(g.estimate, DecayModel::exponential, longw);
      g.xi_long = xi_from_tau(p, g.exponential_long->tau_c);
    } catch (const EstimationError&) {
    }
  }
  return g;
}

namespace {

nlohmann::json fit_json(const FitResult& f) {
  return {{"model", to_string(f.model)},   {"coefficient", f.coefficient}, {"coefficient_error", f.coefficient_error},
          {"intercept", f.intercept},      {"tau_c", f.tau_c},             {"tau_c_error", f.tau_c_error},
          {"reduced_chi2", f.residual},    {"points", f.points},           {"window_end", f.window_end}};
}

}  // namespace

nlohmann::json EnsembleReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["trajectories"] = trajectories;
  j["mean_n"] = mean_n;
  j["eta"] = eta;
  j["eta_g2zero"] = eta_g2zero;
  j["eta_thermodynamic"] = eta_thermodynamic;
  if (histogram) {
    j["histogram"] = {{"tv_binned", histogram->tv_binned},
                      {"tv_integer", histogram->tv_integer},
                      {"bin_edges", histogram->edges},
                      {"reference_mean", reference.mean()}};
  }
  if (g2) {
    nlohmann::json g{{"gamma2_predicted", g2->gamma2_predicted}};
    if (g2->fit) {
      g["fit"] = fit_json(*g2->fit);
      g["gamma2_fitted"] = g2->fit->coefficient;
    }
    if (g2->plateau) g["plateau_10k_50k"] = *g2->plateau;
    j["g2"] = g;
  }
  if (g1) {
    nlohmann::json g{{"tau_c1_xi2", g1->tau_c1_xi2}, {"tau_c2", g1->tau_c2}, {"henry_time", g1->henry_time}};
    if (g1->exponential) g["exponential"] = fit_json(*g1->exponential);
    if (g1->exponential_long) g["exponential_long"] = fit_json(*g1->exponential_long);
    if (g1->gaussian) g["gaussian"] = fit_json(*g1->gaussian);
    if (g1->xi) g["xi"] = *g1->xi;
    if (g1->xi_long) g["xi_long"] = *g1->xi_long;
    j["g1"] = g;
  }
  j["errors"] = errors;
  return j;
}

std::vector<std::string> write_report(const std::string& dir, const EnsembleReport& r) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  {
    std::ofstream out(fs::path(dir) / "analysis.json");
    out << r.to_json().dump(2) << "\n";
    files.push_back("analysis.json");
  }
  if (r.histogram) {
    std::ofstream out(fs::path(dir) / "histogram.csv");
    out << "n,p_sim,p_ref\n";
    const std::size_t len = std::max(r.histogram->histogram.probabilities.size(), r.reference.probabilities.size());
    for (std::size_t n = 0; n < len; ++n) {
      const double a = n < r.histogram->histogram.probabilities.size() ? r.histogram->histogram.probabilities[n] : 0.0;
      const double b = n < r.reference.probabilities.size() ? r.reference.probabilities[n] : 0.0;
      if (a == 0.0 && b < 1e-12) continue;
      out << n << "," << format_double(a) << "," << format_double(b) << "\n";
    }
    files.push_back("histogram.csv");
  }
  auto write_corr = [&](const std::string& name, const CorrelationEstimate& e) {
    std::ofstream out(fs::path(dir) / name);
    out << "tau,re,im,abs,std_error\n";
    for (std::size_t i = 0; i < e.tau.size(); ++i)
      out << format_double(e.tau[i]) << "," << format_double(e.values[i].real()) << "," << format_double(e.values[i].imag())
          << "," << format_double(std::abs(e.values[i])) << "," << format_double(e.std_error[i]) << "\n";
    files.push_back(name);
  };
  if (r.g2) write_corr("g2.csv", r.g2->estimate);
  if (r.g1) write_corr("g1.csv", r.g1->estimate);
  return files;
}

}  // namespace pcl
