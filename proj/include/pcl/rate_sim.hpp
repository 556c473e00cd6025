#pragma once

// Event-driven simulation of the integer rate equations for the photon number
// and the molecular reservoir: absorption, emission, cavity loss and pump.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pcl/model.hpp"
#include "pcl/random.hpp"
#include "pcl/trajectory.hpp"

namespace pcl {

class FrozenState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RateEvent { absorption = 0, emission, loss, pump, pump_discarded };

struct RateState {
  std::int64_t n = 0;
  std::int64_t m_up = 0;
  double t = 0.0;

  std::int64_t excitations() const { return m_up + n; }
};

struct RateChannels {
  double absorption = 0.0;  // gamma n
  double emission = 0.0;    // R (n + 1)
  double loss = 0.0;        // kappa n
  double pump = 0.0;        // kappa n_bar

  double total() const { return absorption + emission + loss + pump; }
};

struct RateOptions {
  bool tau_leap = false;
  double leap_epsilon = 0.01;
  InitialNumber initial = InitialNumber::sampled;
  std::int64_t excitations = -1;  // fixed X for the initial state; < 0 uses the stationary X
};

class RateSimulator final : public Trajectory {
 public:
  struct Step {
    RateEvent event;
    double dt;
  };

  RateSimulator(const ModelParams& p, RateState init, RandomStream rng, RateOptions opt = {});

  RateChannels rates();
  // Samples and applies the next event; throws FrozenState if every rate vanishes.
  Step step_event();

  const RateState& state() const { return state_; }
  const std::array<std::int64_t, 5>& event_counts() const { return counts_; }

  std::vector<std::string> columns() const override;
  double time() const override { return state_.t; }
  void advance_to(double t) override;
  std::vector<double> sample() const override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& state) override;

 private:
  double emission_coefficient(std::int64_t n);
  double absorption_coefficient(std::int64_t n);
  RateEvent pick_channel(const RateChannels& r);
  void apply(RateEvent e);
  void leap_to(double t);

  ModelParams params_;
  RateOptions opt_;
  RateState state_;
  RandomStream rng_;
  std::optional<double> pending_;  // absolute time of the next drawn event
  std::array<std::int64_t, 5> counts_{};
  std::vector<double> b21_table_;
  std::vector<double> b12_table_;
};

RateSimulator make_rate_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory,
                                  RateOptions opt = {});

TimeSeries run_rate_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                               std::uint64_t trajectory, RateOptions opt = {});

}  // namespace pcl
