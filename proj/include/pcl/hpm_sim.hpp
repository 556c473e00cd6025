#pragma once

// Heuristic phasor model: a classical field sqrt(n) e^{i theta} that follows the
// deterministic gain/loss flow and receives unit-magnitude spontaneous kicks
// with uniformly random phase.

#include <cstdint>
#include <optional>

#include "pcl/model.hpp"
#include "pcl/random.hpp"
#include "pcl/trajectory.hpp"

namespace pcl {

struct PhasorState {
  double n = 0.0;
  double theta = 0.0;  // unwrapped
  double m_up = 0.0;   // real-valued excited molecules
  double t = 0.0;
};

// Exact exponential flow of n over dt with rates frozen at the start of the step.
void hpm_drift_step(PhasorState& s, const ModelParams& p, double dt);

// alpha <- alpha + e^{i phi}; returns the kick phase phi.
double hpm_spontaneous_kick(PhasorState& s, RandomStream& rng);

// Spontaneous-emission (kick) rate R = B21(n) M_up.
double hpm_kick_rate(const PhasorState& s, const ModelParams& p);

struct HpmOptions {
  InitialNumber initial = InitialNumber::sampled;
  std::int64_t excitations = -1;  // fixed X for the initial state; < 0 uses the stationary X
  double rate_slack = 0.01;  // thinning bound is R (1 + slack)
};

class HpmSimulator final : public Trajectory {
 public:
  HpmSimulator(const ModelParams& p, PhasorState init, RandomStream rng, HpmOptions opt = {});

  const PhasorState& state() const { return state_; }
  std::int64_t kicks() const { return kicks_; }
  std::int64_t bound_violations() const { return violations_; }

  std::vector<std::string> columns() const override;
  double time() const override { return state_.t; }
  void advance_to(double t) override;
  std::vector<double> sample() const override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& state) override;

 private:
  ModelParams params_;
  HpmOptions opt_;
  PhasorState state_;
  RandomStream rng_;
  std::optional<double> pending_;  // candidate kick time
  double bound_ = 0.0;
  std::int64_t kicks_ = 0;
  std::int64_t violations_ = 0;
};

HpmSimulator make_hpm_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory,
                                HpmOptions opt = {});

TimeSeries run_hpm_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                              std::uint64_t trajectory, HpmOptions opt = {});

}  // namespace pcl
