#include "pcl/trajectory.hpp"

#include <cmath>

#include "pcl/analytics.hpp"

namespace pcl {

void RunWindow::validate() const {
  if (!(sampling_dt > 0.0)) throw ConfigError("sampling_dt must be positive");
  if (!(burn_in >= 0.0)) throw ConfigError("burn_in must be non-negative");
  if (!(duration > burn_in)) throw ConfigError("duration must exceed burn_in");
}

std::size_t RunWindow::sample_count() const {
  return static_cast<std::size_t>(std::floor((duration - burn_in) / sampling_dt + 1e-9)) + 1;
}

InitialCondition stationary_initial_condition(const ModelParams& p, InitialNumber mode, RandomStream& rng,
                                              std::int64_t fixed_x) {
  InitialCondition ic;
  if (fixed_x < 0) {
    if (!(p.n_bar > 0.0)) throw ConfigError("stationary initial condition needs n_bar > 0");
    const ExcitationNumber ex = excitation_number(p, p.n_bar, std::sqrt(g2zero(p, p.n_bar)));
    if (mode == InitialNumber::mean) {
      ic.n = std::llround(p.n_bar);
      ic.m_up = std::llround(ex.m_up);
      return ic;
    }
    fixed_x = std::llround(ex.x);
  }
  const std::int64_t x = fixed_x;
  const NumberDistribution dist = detailed_balance_distribution(p, x);
  if (mode == InitialNumber::mean) {
    ic.n = std::llround(dist.mean());
    ic.m_up = x - ic.n;
    return ic;
  }
  double u = rng.uniform();
  ic.n = dist.n_max();
  for (int n = 0; n <= dist.n_max(); ++n) {
    u -= dist.probabilities[static_cast<std::size_t>(n)];
    if (u <= 0.0) {
      ic.n = n;
      break;
    }
  }
  ic.m_up = x - ic.n;
  return ic;
}

TimeSeries record(Trajectory& traj, const RunWindow& window) {
  window.validate();
  TimeSeries ts;
  ts.columns = traj.columns();
  const std::size_t count = window.sample_count();
  ts.rows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    traj.advance_to(window.sample_time(k));
    ts.rows.push_back(traj.sample());
  }
  return ts;
}

}  // namespace pcl
