#pragma once

// Post-processing of a finished ensemble: number statistics against the
// detailed-balance reference, g2 and g1 estimates and their decay fits.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pcl/analytics.hpp"
#include "pcl/config.hpp"
#include "pcl/estimators.hpp"
#include "pcl/timeseries.hpp"

namespace pcl {

std::vector<double> number_series(const TimeSeries& ts, Engine e);
// Complex field amplitude: <a> for qt, sqrt(n) exp(i theta) for hpm.
std::vector<cplx> field_series(const TimeSeries& ts, Engine e);

// Excitation number used as the histogram reference.
std::int64_t reference_excitations(const ExperimentConfig& c);

struct G2Report {
  CorrelationEstimate estimate;
  double gamma2_predicted = 0.0;
  std::optional<FitResult> fit;  // exponential over [0, 2/Gamma2]
  std::optional<double> plateau;  // mean g2 - 1 over [1e4, 5e4]
};

// Without interactions: exponential fits on a short window [0, tau_c2] and a
// long window [3 tau_c2, 10 tau_c2] (clipped to the lag range), giving xi.
// With interactions: exponential and Gaussian fits on [0, 1.5 henry_time].
struct G1Report {
  CorrelationEstimate estimate;
  double tau_c1_xi2 = 0.0;  // 1/Gamma1 at xi = 2
  double tau_c2 = 0.0;
  double henry_time = 0.0;  // sqrt(2)/(U n_bar eta); 0 without interactions
  std::optional<FitResult> exponential;       // short window
  std::optional<FitResult> exponential_long;  // long window
  std::optional<FitResult> gaussian;
  std::optional<double> xi;
  std::optional<double> xi_long;
};

FitWindow g1_short_window(const ModelParams& p);
FitWindow g1_long_window(const ModelParams& p, double max_tau);
G1Report analyze_g1(const ModelParams& p, const std::vector<std::vector<cplx>>& fields, double dt, double max_tau);

struct EnsembleReport {
  std::string name;
  std::size_t trajectories = 0;
  double mean_n = 0.0;
  double eta = 0.0;
  double eta_g2zero = 0.0;
  double eta_thermodynamic = 0.0;
  std::optional<HistogramComparison> histogram;
  NumberDistribution reference;
  std::optional<G2Report> g2;
  std::optional<G1Report> g1;
  std::vector<std::string> errors;

  nlohmann::json to_json() const;
};

EnsembleReport analyze_ensemble(const ExperimentConfig& c, const std::vector<TimeSeries>& runs);

// analysis.json plus histogram.csv / g2.csv / g1.csv as requested; returns written file names.
std::vector<std::string> write_report(const std::string& dir, const EnsembleReport& r);

// xi implied by a fitted exponential g1 time constant.
double xi_from_tau(const ModelParams& p, double tau_c);

}  // namespace pcl
