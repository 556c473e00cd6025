#pragma once

// Number-phase Gaussian pure states: five moments, their Wick expectation
// values, and the moment equations of the heterodyne + photon-counting
// unraveling.

#include <complex>
#include <json.hpp>

namespace pcl {

using cplx = std::complex<double>;

struct GaussianMoments {
  double mean_n = 0.0;
  double mean_theta = 0.0;  // unwrapped
  double var_n = 0.0;
  double var_theta = 0.0;
  double cov = 0.0;  // symmetrized <dn dtheta>

  // 4 (var_n var_theta - cov^2) - 1; zero for pure states.
  double purity_residual() const { return 4.0 * (var_n * var_theta - cov * cov) - 1.0; }
  void close_purity() { var_theta = (0.25 + cov * cov) / var_n; }

  static GaussianMoments coherent(double mean_n, double theta);

  nlohmann::json to_json() const;
  static GaussianMoments from_json(const nlohmann::json& j);
};

// Wick expectation values with a^dag = sqrt(n) e^{-i theta}:
//   C1 = <a^dag>, C2 = <dn a^dag>, C6 = <a^dag dtheta>, D1 = <a^dag dtheta^2>,
//   D2 = <a^dag {dn dtheta}_sym> + C6 + (i/2) C1, D3 = <dn^2 a^dag>.
// sqrt(n) is expanded to third order in dn / <n>.
struct WickCoefficients {
  cplx c1, c2, c6, d1, d2, d3;
};
WickCoefficients wick_coefficients(const GaussianMoments& g);

// Noise amplitudes K_O = <a^dag O> - <a^dag><O> of each moment; the moment
// moves by 2 Re[K_O sqrt(kappa) dZ].
struct NoiseAmplitudes {
  cplx mean_n, var_n, mean_theta, var_theta, cov;
};
NoiseAmplitudes noise_amplitudes(const GaussianMoments& g, const WickCoefficients& w);

enum class FieldReconstruction { wick, simple };

// <a> reconstructed from the moments.
cplx field_expectation(const GaussianMoments& g, FieldReconstruction mode);

struct VariationalRates {
  double absorption = 0.0;  // gamma
  double emission = 0.0;    // R
  double kappa = 0.0;
  double kerr = 0.0;
  double frame_detuning = 0.0;
};

// Deterministic drift plus heterodyne noise over dt (no jumps, no purity closure).
void variational_diffusion_step(GaussianMoments& g, const VariationalRates& r, double dt, cplx dz);

// Moment updates after a photon is absorbed by (a) or emitted into (a^dag) the mode.
void absorption_jump(GaussianMoments& g);
void emission_jump(GaussianMoments& g);

}  // namespace pcl
