#include "pcl/hpm_sim.hpp"

#include <algorithm>
#include <cmath>

namespace pcl {

double hpm_kick_rate(const PhasorState& s, const ModelParams& p) { return p.b21(s.n) * s.m_up; }

void hpm_drift_step(PhasorState& s, const ModelParams& p, double dt) {
  const double emission = p.b21(s.n) * s.m_up;
  const double absorption = p.b12_at(s.n) * (static_cast<double>(p.m_tot) - s.m_up);
  const double growth = emission - absorption - p.kappa;
  const double gdt = growth * dt;
  // integral of n over the step
  const double integral = std::abs(gdt) < 1e-8 ? s.n * dt * (1.0 + 0.5 * gdt) : s.n * std::expm1(gdt) / growth;
  s.n = std::max(0.0, s.n * std::exp(gdt));
  s.theta -= p.frame_detuning() * dt + p.kerr * integral;
  s.m_up -= (emission - absorption) * integral;
  s.m_up += p.kappa * p.n_bar * dt;
  s.m_up = std::clamp(s.m_up, 0.0, static_cast<double>(p.m_tot));
  s.t += dt;
}

double hpm_spontaneous_kick(PhasorState& s, RandomStream& rng) {
  const double phi = rng.uniform_angle();
  const double rel = phi - s.theta;
  const double root = std::sqrt(s.n);
  s.theta += std::atan2(std::sin(rel), root + std::cos(rel));
  s.n = std::max(0.0, s.n + 1.0 + 2.0 * root * std::cos(rel));
  s.m_up = std::max(0.0, s.m_up - 1.0);
  return phi;
}

HpmSimulator::HpmSimulator(const ModelParams& p, PhasorState init, RandomStream rng, HpmOptions opt)
    : params_(p), opt_(opt), state_(init), rng_(std::move(rng)) {
  params_.validate();
  if (init.n < 0.0 || init.m_up < 0.0) throw ConfigError("invalid initial phasor state");
}

void HpmSimulator::advance_to(double t) {
  while (state_.t < t) {
    if (!pending_) {
      bound_ = hpm_kick_rate(state_, params_) * (1.0 + opt_.rate_slack);
      if (bound_ > 0.0) pending_ = state_.t + rng_.exponential() / bound_;
    }
    const double emission = hpm_kick_rate(state_, params_);
    const double absorption = params_.b12_at(state_.n) * (static_cast<double>(params_.m_tot) - state_.m_up);
    const double growth = std::abs(emission - absorption - params_.kappa);
    double end = t;
    if (growth > 0.0) end = std::min(end, state_.t + 0.1 / growth);
    const bool kick = pending_ && *pending_ <= end;
    if (kick) end = *pending_;
    hpm_drift_step(state_, params_, end - state_.t);
    state_.t = end;
    if (kick) {
      pending_.reset();
      const double rate = hpm_kick_rate(state_, params_);
      if (rate > bound_) ++violations_;
      if (rng_.uniform() * bound_ < rate) {
        hpm_spontaneous_kick(state_, rng_);
        ++kicks_;
      }
    }
  }
}

std::vector<std::string> HpmSimulator::columns() const { return {"t", "n", "theta_unwrapped", "M_up"}; }

std::vector<double> HpmSimulator::sample() const { return {state_.t, state_.n, state_.theta, state_.m_up}; }

nlohmann::json HpmSimulator::checkpoint() const {
  nlohmann::json j;
  j["n"] = state_.n;
  j["theta"] = state_.theta;
  j["m_up"] = state_.m_up;
  j["t"] = state_.t;
  j["pending"] = pending_ ? nlohmann::json(*pending_) : nlohmann::json(nullptr);
  j["bound"] = bound_;
  j["kicks"] = kicks_;
  j["violations"] = violations_;
  j["rng"] = rng_.serialize();
  return j;
}

void HpmSimulator::restore(const nlohmann::json& j) {
  state_.n = j.at("n").get<double>();
  state_.theta = j.at("theta").get<double>();
  state_.m_up = j.at("m_up").get<double>();
  state_.t = j.at("t").get<double>();
  if (j.at("pending").is_null())
    pending_.reset();
  else
    pending_ = j.at("pending").get<double>();
  bound_ = j.at("bound").get<double>();
  kicks_ = j.at("kicks").get<std::int64_t>();
  violations_ = j.at("violations").get<std::int64_t>();
  rng_.deserialize(j.at("rng").get<std::string>());
}

HpmSimulator make_hpm_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory,
                                HpmOptions opt) {
  RandomStream init_rng(master_seed, trajectory, 1);
  const InitialCondition ic = stationary_initial_condition(p, opt.initial, init_rng, opt.excitations);
  PhasorState s;
  s.n = static_cast<double>(ic.n);
  s.m_up = static_cast<double>(ic.m_up);
  s.theta = init_rng.uniform_angle();
  return HpmSimulator(p, s, RandomStream(master_seed, trajectory, 0), opt);
}

TimeSeries run_hpm_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                              std::uint64_t trajectory, HpmOptions opt) {
  HpmSimulator sim = make_hpm_simulator(p, master_seed, trajectory, opt);
  return record(sim, window);
}

}  // namespace pcl
