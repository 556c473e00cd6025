#pragma once

// Common shape of the three stochastic engines, so the ensemble runner can
// sample, checkpoint and resume any of them the same way.

#include <json.hpp>
#include <string>
#include <vector>

#include "pcl/model.hpp"
#include "pcl/random.hpp"
#include "pcl/timeseries.hpp"

namespace pcl {

// Samples are taken at burn_in + k * sampling_dt up to duration (all in tau0).
struct RunWindow {
  double duration = 1e4;
  double burn_in = 1e3;
  double sampling_dt = 1.0;

  void validate() const;
  std::size_t sample_count() const;
  double sample_time(std::size_t k) const { return burn_in + static_cast<double>(k) * sampling_dt; }
};

// How the photon number is initialized from the stationary reservoir.
enum class InitialNumber {
  mean,     // n = round(n_bar)
  sampled,  // n drawn from the closed-exchange distribution at the stationary X
};

struct InitialCondition {
  std::int64_t n = 0;
  std::int64_t m_up = 0;
};

// Photon number and excited molecules at the stationary point predicted by
// excitation_number with eta^2 from g2zero. fixed_x >= 0 replaces that X.
InitialCondition stationary_initial_condition(const ModelParams& p, InitialNumber mode, RandomStream& rng,
                                              std::int64_t fixed_x = -1);

class Trajectory {
 public:
  virtual ~Trajectory() = default;

  virtual std::vector<std::string> columns() const = 0;
  virtual double time() const = 0;
  // Evolves up to exactly time t (t >= time()).
  virtual void advance_to(double t) = 0;
  virtual std::vector<double> sample() const = 0;

  virtual nlohmann::json checkpoint() const = 0;
  virtual void restore(const nlohmann::json& state) = 0;
};

// Advances through the burn-in and records every sample of the window.
TimeSeries record(Trajectory& traj, const RunWindow& window);

}  // namespace pcl
