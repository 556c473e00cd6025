#pragma once

// Physical parameters, unit conventions and the dye emission/absorption rates
// shared by every simulator.
//
// Internal units: time in tau0 = (B12 * M_tot)^-1, hbar = k_B = 1. Every rate,
// detuning, Kerr constant and temperature is therefore a number in 1/tau0.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pcl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnphysicalParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Which coefficient carries the Kennard-Stepanov frequency dependence.
enum class KsSide { emission, absorption };

// Choice of rotating frame for the Hamiltonian / phasor phase speed.
enum class FrameChoice {
  mean_field,  // Delta' = -U n_bar, no rotation on average
  vacuum,      // Delta' = 0
  lab,         // Delta' = Delta
  custom,      // explicit value
};

// SI-side description of the experiment, mirroring the published table of
// dye-cavity constants.
struct SiParams {
  double b12_hz = 2.5e3;
  double m_tot = 1e9;
  double detuning_per_s = 0.0;  // Delta, angular frequency
  double temperature_kelvin = 300.0;
  double kerr_per_s = 0.0;      // U, angular frequency per photon
  double kappa_per_s = 0.0;
  double w_up = 1.0;
  double w_down = 1.0;
  double n_bar = 1000.0;
  double trap_frequency_hz = 0.0;  // documentation only
};

struct ModelParams {
  double b12 = 1.0;          // absorption coefficient per molecule [1/tau0]
  std::int64_t m_tot = 1;    // dye molecules
  double detuning = 0.0;     // Delta [1/tau0]
  double temperature = 1.0;  // T [1/tau0]
  double kerr = 0.0;         // U [1/tau0 per photon]
  double kappa = 0.0;        // cavity loss [1/tau0]
  double w_up = 1.0;
  double w_down = 1.0;
  double n_bar = 0.0;        // target mean photon number (also sets the pump)

  FrameChoice frame = FrameChoice::mean_field;
  double custom_frame_detuning = 0.0;
  KsSide ks_side = KsSide::emission;

  // Scale back to SI: one tau0 is 1/(b12_hz * m_tot) seconds.
  double b12_hz = 2.5e3;
  double trap_frequency_hz = 0.0;

  // Throws ConfigError on any violated invariant.
  void validate() const;

  double beta() const { return 1.0 / temperature; }
  double tau0_seconds() const { return 1.0 / (b12_hz * static_cast<double>(m_tot)); }

  // Rotating-frame detuning Delta' used for phase evolution.
  double frame_detuning() const;

  // B21(n) and B12(n); only one of them depends on n, see KsSide. With the
  // absorption side the constant B21 is referenced to n_bar, so both choices
  // coincide at n = n_bar.
  double b21(double n) const;
  double b12_at(double n) const;

  // sigma = U n_bar^2 / T
  double interaction_parameter() const { return kerr * n_bar * n_bar / temperature; }

  static ModelParams from_si(const SiParams& si);
  SiParams to_si() const;
};

struct ReservoirState {
  double m_up = 0.0;
  double m_down = 0.0;

  double excitations(double n) const { return m_up + n; }
  static ReservoirState from_excited(const ModelParams& p, double m_up) {
    return {m_up, static_cast<double>(p.m_tot) - m_up};
  }
};

// R = B21(n) M_up
double emission_rate(const ModelParams& p, const ReservoirState& res, double n);
// gamma = B12 M_down (B12 evaluated at n when the absorption side carries the KS factor)
double absorption_rate(const ModelParams& p, const ReservoirState& res, double n = 0.0);

// M_eff = (M_tot / 2) / (1 + cosh(beta (Delta + U n_bar)))
double effective_reservoir_size(const ModelParams& p, double n_bar);

struct ExcitationNumber {
  double x = 0.0;     // total excitations
  double m_up = 0.0;  // excited molecules
};

// Stationary reservoir occupation for mean photon number n_bar with relative
// fluctuation eta. Throws UnphysicalParameters when the denominator is not positive.
ExcitationNumber excitation_number(const ModelParams& p, double n_bar, double eta);

// Built-in model presets; "rhodamine6g-560nm" is the interacting, lossy table.
ModelParams model_preset(const std::string& name);

}  // namespace pcl
