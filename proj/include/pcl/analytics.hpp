#pragma once

// Closed-form predictions for number statistics and temporal coherence of the
// single-mode condensate. These are the reference values the simulators and
// estimators are checked against.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pcl/model.hpp"

namespace pcl {

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Photon-number distribution P(0..n_max).
struct NumberDistribution {
  std::vector<double> probabilities;

  int n_max() const { return static_cast<int>(probabilities.size()) - 1; }
  // Zero outside the stored range.
  double at(std::size_t n) const { return n < probabilities.size() ? probabilities[n] : 0.0; }
  double mean() const;
  double variance() const;
  double moment(int k) const;
  double total() const;
  // Normalizes in place; throws if the total mass is not positive.
  void normalize();
};

// Total-variation distance; the shorter distribution is zero-padded.
double total_variation(const NumberDistribution& a, const NumberDistribution& b);

// Stationary distribution of the photon number at fixed excitation number X,
// built from the pairwise detailed-balance ratio
//   P(n+1)/P(n) = B21(n) (X - n) / [B12(n) (M_tot - X + n + 1) + kappa].
// Cavity loss enters as an extra absorption channel. For kappa = 0 the product
// of ratios equals C(X,n)/C(M_tot-X+n,n) exp(-beta E(n)) with the normal-ordered
// Kerr energy E(n) = Delta n + (U/2) n (n - 1).
// n_max < 0 selects the truncation adaptively (log P drops 46 below the peak);
// an explicit n_max that leaves a tail above 1e-10 of the peak throws TruncationError.
NumberDistribution detailed_balance_distribution(const ModelParams& p, std::int64_t x, int n_max = -1);

// Literal closed form with the (U/2) n^2 interaction energy, kept for comparison.
NumberDistribution closed_form_distribution(const ModelParams& p, std::int64_t x, int n_max);

// Grand-canonical relative fluctuation eta(sigma) from the continuous-n
// partition function, eliminating the chemical potential by root finding.
double thermodynamic_eta(double sigma);

// eta^2 = g2(0) - 1 = 1 / (1 + sigma + n_bar^2 / M_eff)
double g2zero(const ModelParams& p, double n_bar);

// Stationary mean B12 * M_down, using the reservoir from excitation_number.
double mean_absorption_rate(const ModelParams& p, double n_bar);

// Gamma_2 = [1 + sigma + n_bar^2/M_eff] B12 M_down / n_bar
double gamma2(const ModelParams& p, double n_bar);

struct AntibunchingPrediction {
  double dip = 0.0;    // predicted magnitude of 1 - g2 on the plateau
  double tau_x = 0.0;  // reservoir relaxation time (kappa dn/dX)^-1
};
AntibunchingPrediction antibunching_dip(const ModelParams& p, double n_bar);

// Gamma_1 = B12 M_down / (xi n_bar); xi = 2 grand-canonical, 4 canonical.
double gamma1(const ModelParams& p, double n_bar, double xi);

// Heuristic phase-jump rate B12 M_down / n_bar^zeta.
double phase_jump_rate(const ModelParams& p, double n_bar, double zeta);

enum class WhittakerMode { schawlow_townes, henry, both };

// |g1(tau)| of the Gaussian-number-distribution model. The Henry term carries
// an n_bar^2 factor so that its short-time limit is exp(-(U n_bar eta tau)^2 / 2).
double whittaker_g1(double eta, double gamma2_rate, double kerr, double n_bar, double tau,
                    WhittakerMode mode);

struct DephasingFactor {
  std::complex<double> direct;    // mean of exp(-i U n tau)
  std::complex<double> cumulant;  // second-order cumulant expansion
};
DephasingFactor g1_short_time_interacting(const NumberDistribution& dist, double kerr, double tau);

// Jointly constructed coherence quantities; tau_c1 / tau_c2 = xi / eta^2 holds
// by construction.
struct CoherencePrediction {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double xi = 2.0;
  double eta = 0.0;
  double sigma = 0.0;
  double tau_x = 0.0;
  double m_eff = 0.0;
  double dip = 0.0;
};
CoherencePrediction predict_coherence(const ModelParams& p, double xi);

}  // namespace pcl
