#include "pcl/model.hpp"

#include <cmath>
#include <sstream>

namespace pcl {

namespace {

constexpr double kBoltzmann = 1.380649e-23;     // J/K
constexpr double kHbar = 1.054571817e-34;       // J s

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid model parameters: ") + what);
}

}  // namespace

void ModelParams::validate() const {
  require(b12 > 0.0, "B12 must be positive");
  require(m_tot >= 1, "M_tot must be at least 1");
  require(temperature > 0.0, "T must be positive");
  require(kappa >= 0.0, "kappa must be non-negative");
  require(kerr >= 0.0, "U must be non-negative");
  require(w_up > 0.0 && w_down > 0.0, "density-of-states weights must be positive");
  require(n_bar >= 0.0, "n_bar must be non-negative");
  require(b12_hz > 0.0, "SI scale B12 must be positive");
  require(std::isfinite(detuning), "Delta must be finite");
}

double ModelParams::frame_detuning() const {
  switch (frame) {
    case FrameChoice::mean_field: return -kerr * n_bar;
    case FrameChoice::vacuum: return 0.0;
    case FrameChoice::lab: return detuning;
    case FrameChoice::custom: return custom_frame_detuning;
  }
  return 0.0;
}

double ModelParams::b21(double n) const {
  const double ratio = w_down / w_up;
  if (ks_side == KsSide::emission) return b12 * ratio * std::exp(-(detuning + kerr * n) / temperature);
  return b12 * ratio * std::exp(-(detuning + kerr * n_bar) / temperature);
}

double ModelParams::b12_at(double n) const {
  if (ks_side == KsSide::emission) return b12;
  return b12 * std::exp(kerr * (n - n_bar) / temperature);
}

ModelParams ModelParams::from_si(const SiParams& si) {
  ModelParams p;
  const double unit = si.b12_hz * si.m_tot;  // 1/tau0 in 1/s
  p.b12_hz = si.b12_hz;
  p.m_tot = static_cast<std::int64_t>(std::llround(si.m_tot));
  p.b12 = si.b12_hz / unit;
  p.detuning = si.detuning_per_s / unit;
  p.temperature = kBoltzmann * si.temperature_kelvin / kHbar / unit;
  p.kerr = si.kerr_per_s / unit;
  p.kappa = si.kappa_per_s / unit;
  p.w_up = si.w_up;
  p.w_down = si.w_down;
  p.n_bar = si.n_bar;
  p.trap_frequency_hz = si.trap_frequency_hz;
  p.validate();
  return p;
}

SiParams ModelParams::to_si() const {
  SiParams si;
  const double unit = b12_hz * static_cast<double>(m_tot);
  si.b12_hz = b12 * unit;
  si.m_tot = static_cast<double>(m_tot);
  si.detuning_per_s = detuning * unit;
  si.temperature_kelvin = temperature * unit * kHbar / kBoltzmann;
  si.kerr_per_s = kerr * unit;
  si.kappa_per_s = kappa * unit;
  si.w_up = w_up;
  si.w_down = w_down;
  si.n_bar = n_bar;
  si.trap_frequency_hz = trap_frequency_hz;
  return si;
}

double emission_rate(const ModelParams& p, const ReservoirState& res, double n) {
  return p.b21(n) * res.m_up;
}

double absorption_rate(const ModelParams& p, const ReservoirState& res, double n) {
  return p.b12_at(n) * res.m_down;
}

double effective_reservoir_size(const ModelParams& p, double n_bar) {
  const double x = (p.detuning + p.kerr * n_bar) / p.temperature;
  return 0.5 * static_cast<double>(p.m_tot) / (1.0 + std::cosh(x));
}

ExcitationNumber excitation_number(const ModelParams& p, double n_bar, double eta) {
  if (!(n_bar > 0.0)) throw UnphysicalParameters("excitation_number needs n_bar > 0");
  if (eta < 0.0 || eta > 1.2) throw UnphysicalParameters("excitation_number needs 0 <= eta <= 1.2");
  const double b12 = p.b12_at(n_bar);
  const double b21 = p.b21(n_bar);
  const double m = static_cast<double>(p.m_tot);
  const double fluct = n_bar * n_bar * eta * eta;
  const double num = (b12 * m + p.kappa) * n_bar + (b12 + b21) * fluct;
  const double den = b21 * (n_bar + 1.0 - p.beta() * p.kerr * fluct) + b12 * n_bar;
  if (!(den > 0.0)) {
    std::ostringstream os;
    os << "excitation_number: non-positive denominator " << den
       << " (beta U n_bar^2 eta^2 = " << p.beta() * p.kerr * fluct << ")";
    throw UnphysicalParameters(os.str());
  }
  const double m_up = num / den;
  if (m_up > m) throw UnphysicalParameters("excitation_number: M_up exceeds M_tot");
  return {m_up + n_bar, m_up};
}

ModelParams model_preset(const std::string& name) {
  if (name == "rhodamine6g-560nm") {
    SiParams si;
    si.b12_hz = 2.5e3;
    si.m_tot = 1e9;
    si.temperature_kelvin = 300.0;
    const double unit = si.b12_hz * si.m_tot;
    const double kt_over_hbar = kBoltzmann * si.temperature_kelvin / kHbar;
    si.detuning_per_s = -2.4 * kt_over_hbar;
    si.kerr_per_s = 1e-5 * unit;
    si.kappa_per_s = 8.3e-4 * unit;
    si.w_up = 1.0;
    si.w_down = 1.0;
    si.n_bar = 1000.0;
    si.trap_frequency_hz = 8.0 * M_PI * 1e10;
    return ModelParams::from_si(si);
  }
  throw ConfigError("unknown model preset '" + name + "' (valid: rhodamine6g-560nm)");
}

}  // namespace pcl
