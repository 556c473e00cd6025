#include "pcl/rate_sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace pcl {

RateSimulator::RateSimulator(const ModelParams& p, RateState init, RandomStream rng, RateOptions opt)
    : params_(p), opt_(opt), state_(init), rng_(std::move(rng)) {
  params_.validate();
  if (init.n < 0 || init.m_up < 0 || init.m_up > p.m_tot) throw ConfigError("invalid initial rate-equation state");
}

double RateSimulator::emission_coefficient(std::int64_t n) {
  const auto idx = static_cast<std::size_t>(n);
  while (b21_table_.size() <= idx) b21_table_.push_back(params_.b21(static_cast<double>(b21_table_.size())));
  return b21_table_[idx];
}

double RateSimulator::absorption_coefficient(std::int64_t n) {
  const auto idx = static_cast<std::size_t>(n);
  while (b12_table_.size() <= idx) b12_table_.push_back(params_.b12_at(static_cast<double>(b12_table_.size())));
  return b12_table_[idx];
}

RateChannels RateSimulator::rates() {
  RateChannels r;
  const auto n = static_cast<double>(state_.n);
  const auto m_down = static_cast<double>(params_.m_tot - state_.m_up);
  // B12 taken at the lower level of the n-1 <-> n transition, matching B21(n-1)
  r.absorption = absorption_coefficient(std::max<std::int64_t>(state_.n - 1, 0)) * m_down * n;
  r.emission = emission_coefficient(state_.n) * static_cast<double>(state_.m_up) * (n + 1.0);
  r.loss = params_.kappa * n;
  r.pump = params_.kappa * params_.n_bar;
  return r;
}

RateEvent RateSimulator::pick_channel(const RateChannels& r) {
  double u = rng_.uniform() * r.total();
  if ((u -= r.absorption) < 0.0) return RateEvent::absorption;
  if ((u -= r.emission) < 0.0) return RateEvent::emission;
  if ((u -= r.loss) < 0.0) return RateEvent::loss;
  return RateEvent::pump;
}

void RateSimulator::apply(RateEvent e) {
  [[maybe_unused]] const std::int64_t x_before = state_.excitations();
  switch (e) {
    case RateEvent::absorption:
      --state_.n;
      ++state_.m_up;
      assert(state_.excitations() == x_before);
      break;
    case RateEvent::emission:
      ++state_.n;
      --state_.m_up;
      assert(state_.excitations() == x_before);
      break;
    case RateEvent::loss:
      --state_.n;
      break;
    case RateEvent::pump:
      if (state_.m_up == params_.m_tot) {
        e = RateEvent::pump_discarded;
        break;
      }
      ++state_.m_up;
      break;
    case RateEvent::pump_discarded:
      break;
  }
  ++counts_[static_cast<std::size_t>(e)];
}

RateSimulator::Step RateSimulator::step_event() {
  const RateChannels r = rates();
  const double total = r.total();
  if (!pending_) {
    if (!(total > 0.0)) {
      std::ostringstream os;
      os << "frozen rate-equation state at t = " << state_.t << " (n = " << state_.n << ", M_up = " << state_.m_up
         << ", pump = 0)";
      throw FrozenState(os.str());
    }
    pending_ = state_.t + rng_.exponential() / total;
  }
  const double dt = *pending_ - state_.t;
  state_.t = *pending_;
  pending_.reset();
  const RateEvent e = pick_channel(r);
  apply(e);
  return {e, dt};
}

void RateSimulator::advance_to(double t) {
  if (opt_.tau_leap) {
    leap_to(t);
    return;
  }
  while (true) {
    if (!pending_) {
      const double total = rates().total();
      if (!(total > 0.0)) {
        // Nothing can happen any more; time simply passes.
        state_.t = t;
        return;
      }
      pending_ = state_.t + rng_.exponential() / total;
    }
    if (*pending_ > t) {
      state_.t = t;
      return;
    }
    step_event();
  }
}

void RateSimulator::leap_to(double t) {
  while (state_.t < t) {
    const RateChannels r = rates();
    const double scale =
        opt_.leap_epsilon * std::max<double>(static_cast<double>(std::min(state_.n, state_.m_up)), 1.0);
    const double drift = std::abs(r.emission - r.absorption - r.loss);
    const double spread = r.emission + r.absorption + r.loss;
    double dt = t - state_.t;
    if (drift > 0.0) dt = std::min(dt, scale / drift);
    if (spread > 0.0) dt = std::min(dt, scale * scale / spread);
    const std::int64_t k_abs = rng_.poisson(r.absorption * dt);
    const std::int64_t k_em = std::min(rng_.poisson(r.emission * dt), state_.m_up);
    const std::int64_t k_loss = rng_.poisson(r.loss * dt);
    std::int64_t k_pump = rng_.poisson(r.pump * dt);
    std::int64_t absorbed = std::min(k_abs, state_.n + k_em);
    state_.n += k_em - absorbed;
    state_.m_up += absorbed - k_em;
    const std::int64_t lost = std::min(k_loss, state_.n);
    state_.n -= lost;
    k_pump = std::min(k_pump, params_.m_tot - state_.m_up);
    state_.m_up += k_pump;
    state_.m_up = std::clamp<std::int64_t>(state_.m_up, 0, params_.m_tot);
    counts_[0] += absorbed;
    counts_[1] += k_em;
    counts_[2] += lost;
    counts_[3] += k_pump;
    state_.t = std::min(t, state_.t + dt);
  }
}

std::vector<std::string> RateSimulator::columns() const { return {"t", "n", "M_up"}; }

std::vector<double> RateSimulator::sample() const {
  return {state_.t, static_cast<double>(state_.n), static_cast<double>(state_.m_up)};
}

nlohmann::json RateSimulator::checkpoint() const {
  nlohmann::json j;
  j["n"] = state_.n;
  j["m_up"] = state_.m_up;
  j["t"] = state_.t;
  j["pending"] = pending_ ? nlohmann::json(*pending_) : nlohmann::json(nullptr);
  j["counts"] = counts_;
  j["rng"] = rng_.serialize();
  return j;
}

void RateSimulator::restore(const nlohmann::json& j) {
  state_.n = j.at("n").get<std::int64_t>();
  state_.m_up = j.at("m_up").get<std::int64_t>();
  state_.t = j.at("t").get<double>();
  if (j.at("pending").is_null())
    pending_.reset();
  else
    pending_ = j.at("pending").get<double>();
  counts_ = j.at("counts").get<std::array<std::int64_t, 5>>();
  rng_.deserialize(j.at("rng").get<std::string>());
}

RateSimulator make_rate_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory,
                                  RateOptions opt) {
  RandomStream init_rng(master_seed, trajectory, 1);
  const InitialCondition ic = stationary_initial_condition(p, opt.initial, init_rng, opt.excitations);
  return RateSimulator(p, RateState{ic.n, ic.m_up, 0.0}, RandomStream(master_seed, trajectory, 0), opt);
}

TimeSeries run_rate_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                               std::uint64_t trajectory, RateOptions opt) {
  RateSimulator sim = make_rate_simulator(p, master_seed, trajectory, opt);
  return record(sim, window);
}

}  // namespace pcl
