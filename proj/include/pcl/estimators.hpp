#pragma once

// Ensemble estimators: g1/g2 lag correlations, decay fits, number histograms
// and intra/inter-trajectory variance decompositions.

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcl/analytics.hpp"

namespace pcl {

using cplx = std::complex<double>;

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorrelationEstimate {
  std::vector<double> tau;
  std::vector<cplx> values;      // real for g2
  std::vector<double> std_error;
  std::int64_t n_samples = 0;    // trajectories (or blocks) contributing
  double frame_detuning = 0.0;   // rotating frame of the phase data, for g1

  std::vector<double> magnitudes() const;
};

// Lag sums of one series, via FFT (default) or direct summation.
enum class LagMethod { fft, direct };

std::vector<double> lag_products(std::span<const double> x, std::size_t max_lag, LagMethod method = LagMethod::fft);
std::vector<cplx> lag_products(std::span<const cplx> x, std::size_t max_lag, LagMethod method = LagMethod::fft);

// Mergeable accumulator of per-trajectory lag statistics for g2.
class G2Accumulator {
 public:
  explicit G2Accumulator(std::size_t max_lag = 0) : max_lag_(max_lag) {}
  void add(std::span<const double> n, LagMethod method = LagMethod::fft);
  void merge(const G2Accumulator& other);
  CorrelationEstimate finish(double dt) const;
  std::size_t trajectories() const { return count_; }

 private:
  std::size_t max_lag_;
  std::size_t count_ = 0;
  std::vector<double> pairs_, head_, tail_, terms_;  // pooled sums per lag
  std::vector<double> ratio_sum_, ratio_sq_;         // per-trajectory mean products
};

class G1Accumulator {
 public:
  explicit G1Accumulator(std::size_t max_lag = 0) : max_lag_(max_lag) {}
  void add(std::span<const cplx> alpha, LagMethod method = LagMethod::fft);
  void merge(const G1Accumulator& other);
  CorrelationEstimate finish(double dt) const;
  std::size_t trajectories() const { return count_; }

 private:
  std::size_t max_lag_;
  std::size_t count_ = 0;
  std::vector<cplx> pairs_;
  std::vector<double> terms_;
  double intensity_ = 0.0;
  double points_ = 0.0;
  std::vector<cplx> ratio_sum_;
  std::vector<double> ratio_sq_;
};

// g2(tau) = mean[n(t) n(t+tau)] / n_bar^2 over trajectories sampled every dt,
// skipping samples with t < burn_in. With a single trajectory the error bars
// come from splitting it into blocks.
CorrelationEstimate g2_estimate(std::span<const std::vector<double>> series, double dt, double max_tau,
                                double burn_in = 0.0, std::size_t blocks = 8);

// g1(tau) = mean[alpha*(t) alpha(t+tau)] / mean[|alpha|^2].
CorrelationEstimate g1_estimate(std::span<const std::vector<cplx>> series, double dt, double max_tau,
                                double burn_in = 0.0, std::size_t blocks = 8);

enum class DecayModel { exponential, gaussian, whittaker_st, whittaker_henry };

struct FitWindow {
  double tau_min = 0.0;
  double tau_max = 0.0;
};

struct FitResult {
  DecayModel model = DecayModel::exponential;
  double coefficient = 0.0;  // rate, 1/tau_c^2, eta^2 or (U n_bar eta)^2
  double coefficient_error = 0.0;
  double intercept = 0.0;
  double tau_c = 0.0;  // characteristic time of the model
  double tau_c_error = 0.0;
  double residual = 0.0;  // reduced chi^2 of the log fit
  std::size_t points = 0;
  double window_end = 0.0;  // after shrinking at non-positive values
};

// Weighted least squares on log|g|. whittaker models need gamma2 > 0.
FitResult fit_decay(const CorrelationEstimate& est, DecayModel model, FitWindow window, double gamma2 = 0.0);

std::string to_string(DecayModel m);

struct VarianceDecomposition {
  double intra = 0.0;
  double inter = 0.0;
  double total = 0.0;
};

struct MomentPair {
  double mean = 0.0;
  double variance = 0.0;
};

VarianceDecomposition variance_decomposition(std::span<const MomentPair> ensemble);

// Integer histogram of rounded values.
NumberDistribution histogram_pn(std::span<const double> values);

struct HistogramComparison {
  NumberDistribution histogram;
  double tv_integer = 0.0;  // total variation over integer bins
  double tv_binned = 0.0;   // total variation over equiprobable bins of the reference
  std::vector<int> edges;   // lower edges of the equiprobable bins
};

HistogramComparison compare_histogram(std::span<const double> values, const NumberDistribution& reference,
                                      std::size_t bins = 10);

}  // namespace pcl
