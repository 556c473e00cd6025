#include "pcl/qt/qt_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcl/qt/phase_operator.hpp"
#include "pcl/qt/wigner.hpp"

namespace pcl {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_angle(double x) { return std::remainder(x, 2.0 * kPi); }
}  // namespace

QtSimulator::QtSimulator(const ModelParams& p, FockVector psi, std::int64_t m_up, RandomStream rng, QtOptions opt)
    : params_(p), opt_(opt), regime_(Regime::exact), psi_(std::move(psi)), m_up_(m_up), rng_(std::move(rng)) {
  params_.validate();
  if (!(opt_.n_trans_down < opt_.n_trans_up)) throw ConfigError("QT thresholds must satisfy n_trans_down < n_trans_up");
  theta_track_ = std::arg(psi_.expect_a());
  hazard_left_ = rng_.exponential();
}

QtSimulator::QtSimulator(const ModelParams& p, GaussianMoments g, std::int64_t m_up, RandomStream rng, QtOptions opt)
    : params_(p), opt_(opt), regime_(Regime::variational), gauss_(g), m_up_(m_up), rng_(std::move(rng)) {
  params_.validate();
  if (!(opt_.n_trans_down < opt_.n_trans_up)) throw ConfigError("QT thresholds must satisfy n_trans_down < n_trans_up");
  theta_track_ = g.mean_theta;
  hazard_left_ = rng_.exponential();
}

double QtSimulator::absorption_rate(double n) const {
  return params_.b12_at(n) * static_cast<double>(params_.m_tot - m_up_);
}

double QtSimulator::emission_rate(double n) const { return params_.b21(n) * static_cast<double>(m_up_); }

cplx QtSimulator::draw_dz(double dt) {
  const double s = std::sqrt(0.5 * dt);
  const double x = rng_.normal();
  const double y = rng_.normal();
  return {s * x, s * y};
}

double QtSimulator::mean_n() const { return regime_ == Regime::exact ? psi_.mean_n() : gauss_.mean_n; }

cplx QtSimulator::field() const {
  return regime_ == Regime::exact ? psi_.expect_a() : field_expectation(gauss_, opt_.field);
}

void QtSimulator::apply_pump(double dt) {
  const std::int64_t k = rng_.poisson(params_.kappa * params_.n_bar * dt);
  const std::int64_t room = params_.m_tot - m_up_;
  const std::int64_t added = std::min(k, room);
  m_up_ += added;
  counters_.pumps += added;
}

// Evolves under the no-jump part of the dye channels plus the Hamiltonian for time s.
void QtSimulator::dye_no_jump(double s) {
  const double n = psi_.mean_n();
  const double g = absorption_rate(n);
  const double r = emission_rate(n);
  const double detune = params_.frame_detuning();
  const double kerr = params_.kerr;
  psi_.scale([&](int k) {
    const double level = k;
    const double energy = detune * level + 0.5 * kerr * level * (level - 1.0);
    const double decay = 0.5 * ((g + r) * level + r);
    return std::polar(std::exp(-decay * s), -energy * s);
  });
  psi_.normalize();
}

void QtSimulator::dye_jump() {
  const double n = psi_.mean_n();
  const double absorb = absorption_rate(n) * n;
  const double emit = emission_rate(n) * (n + 1.0);
  if (rng_.uniform() * (absorb + emit) < absorb) {
    psi_.apply_a();
    ++m_up_;
    ++counters_.absorptions;
  } else {
    psi_.apply_adag();
    --m_up_;
    ++counters_.emissions;
  }
  psi_.normalize();
}

void QtSimulator::exact_step(double dt) {
  if (params_.kappa > 0.0) psi_.heterodyne_step(params_.kappa, dt, draw_dz(dt));

  double remaining = dt;
  while (remaining > 0.0) {
    const double n = psi_.mean_n();
    const double g = absorption_rate(n);
    const double r = emission_rate(n);
    const int lo = psi_.lo();
    const int hi = psi_.hi();
    const double r_min = (g + r) * lo + r;
    // Integrated jump hazard of the normalized state over [0, s].
    auto hazard = [&](double s, double* slope) {
      double z = 0.0;
      double zr = 0.0;
      for (int k = lo; k <= hi; ++k) {
        const double rate = (g + r) * k + r;
        const double w = std::norm(psi_[k]) * std::exp(-(rate - r_min) * s);
        z += w;
        zr += w * rate;
      }
      if (slope) *slope = zr / z;
      return r_min * s - std::log(z);
    };
    const double full = hazard(remaining, nullptr);
    if (full < hazard_left_) {
      dye_no_jump(remaining);
      hazard_left_ -= full;
      break;
    }
    // Newton from the left converges monotonically on the concave hazard.
    double s = 0.0;
    for (int it = 0; it < 100; ++it) {
      double slope = 0.0;
      const double h = hazard(s, &slope);
      const double step = (hazard_left_ - h) / slope;
      s = std::min(remaining, s + step);
      if (std::abs(step) < 1e-13 * std::max(1.0, s)) break;
    }
    dye_no_jump(s);
    dye_jump();
    remaining -= s;
    hazard_left_ = rng_.exponential();
  }

  apply_pump(dt);
  psi_.trim();
  const cplx a = psi_.expect_a();
  if (std::abs(a) > 0.0) theta_track_ += wrap_angle(std::arg(a) - theta_track_);

  if (psi_.mean_n() > opt_.n_trans_up && t_ + dt >= next_attempt_) try_upward_transition();
}

void QtSimulator::try_upward_transition() {
  next_attempt_ = t_ + opt_.retry_interval;
  FockToGaussianResult res;
  try {
    res = fock_to_gaussian(psi_, theta_track_, opt_.purity_defer);
  } catch (const TransitionError&) {
    ++counters_.deferred;
    return;
  }
  if (!res.accepted) {
    ++counters_.deferred;
    return;
  }
  if (opt_.record_wigner) dump_wigner();
  gauss_ = res.moments;
  gauss_.close_purity();
  regime_ = Regime::variational;
  ++counters_.transitions_up;
}

void QtSimulator::downward_transition(const GaussianMoments& g) {
  const int n_max = std::max(opt_.n_max, static_cast<int>(std::ceil(g.mean_n + 8.0 * std::sqrt(g.var_n))) + 20);
  psi_ = gaussian_to_fock(g, n_max);
  theta_track_ = g.mean_theta;
  // align the arg <a> track with the unwrapped phase
  const cplx a = psi_.expect_a();
  if (std::abs(a) > 0.0) theta_track_ += wrap_angle(std::arg(a) - theta_track_);
  regime_ = Regime::exact;
  hazard_left_ = rng_.exponential();
  ++counters_.transitions_down;
  if (opt_.record_wigner) dump_wigner();
}

void QtSimulator::variational_step(double dt) {
  const GaussianMoments before = gauss_;
  const double m = gauss_.mean_n;
  VariationalRates rates;
  rates.absorption = absorption_rate(m);
  rates.emission = emission_rate(m);
  rates.kappa = params_.kappa;
  rates.kerr = params_.kerr;
  rates.frame_detuning = params_.frame_detuning();
  variational_diffusion_step(gauss_, rates, dt, draw_dz(dt));

  std::int64_t absorbed = rng_.poisson(rates.absorption * m * dt);
  std::int64_t emitted = rng_.poisson(rates.emission * (m + 1.0) * dt);
  emitted = std::min(emitted, m_up_ + absorbed);
  counters_.absorptions += absorbed;
  counters_.emissions += emitted;
  while (absorbed + emitted > 0) {
    const bool absorb = rng_.uniform() * static_cast<double>(absorbed + emitted) < static_cast<double>(absorbed);
    if (absorb) {
      absorption_jump(gauss_);
      ++m_up_;
      --absorbed;
    } else {
      emission_jump(gauss_);
      --m_up_;
      --emitted;
    }
  }
  apply_pump(dt);

  const double residual = gauss_.purity_residual();
  const bool broken = !(gauss_.var_n > 0.0) || !std::isfinite(residual) || std::abs(residual) > opt_.purity_fallback;
  if (broken) {
    ++counters_.fallbacks;
    downward_transition(before);
    return;
  }
  residual_max_ = std::max(residual_max_, std::abs(residual));
  gauss_.close_purity();
  if (gauss_.mean_n < opt_.n_trans_down) downward_transition(gauss_);
}

void QtSimulator::step(double dt) {
  if (regime_ == Regime::exact) {
    double h = opt_.exact_dt_max;
    if (params_.kappa > 0.0) h = std::min(h, opt_.exact_kappa_dt / (params_.kappa * std::max(psi_.mean_n(), 1.0)));
    h = std::min(h, dt);
    exact_step(h);
    t_ += h;
  } else {
    // smaller steps while the phase is broad (right after leaving Fock space)
    const double h = std::min(opt_.variational_dt / (1.0 + gauss_.var_theta / opt_.broad_phase), dt);
    variational_step(h);
    t_ += h;
  }
}

void QtSimulator::advance_to(double t) {
  while (t - t_ > 1e-12 * std::max(1.0, t)) step(t - t_);
  t_ = std::max(t_, t);
}

std::vector<std::string> QtSimulator::columns() const {
  return {"t", "mean_n", "mean_theta_unwrapped", "var_n", "var_theta", "cov", "regime", "M_up", "re_alpha", "im_alpha",
          "purity_residual"};
}

std::vector<double> QtSimulator::sample() const {
  const cplx a = field();
  const auto regime = static_cast<double>(static_cast<int>(regime_));
  const auto m_up = static_cast<double>(m_up_);
  if (regime_ == Regime::variational) {
    const double residual = residual_max_;
    residual_max_ = 0.0;
    return {t_, gauss_.mean_n, gauss_.mean_theta, gauss_.var_n, gauss_.var_theta, gauss_.cov, regime, m_up,
            a.real(), a.imag(), residual};
  }
  const PhaseMoments pm = phase_moments(psi_, theta_track_ - kPi);
  const double var_n = psi_.variance_n();
  const double residual = 4.0 * (var_n * pm.var_theta - pm.cov * pm.cov) - 1.0;
  residual_max_ = 0.0;
  return {t_, psi_.mean_n(), pm.mean_theta, var_n, pm.var_theta, pm.cov, regime, m_up, a.real(), a.imag(), residual};
}

void QtSimulator::dump_wigner() {
  WignerDump d;
  d.t = t_;
  d.from = regime_;
  const int k = std::max(opt_.wigner_points, 2);
  const cplx a = psi_.expect_a();
  const double cx = std::sqrt(2.0) * a.real();
  const double cp = std::sqrt(2.0) * a.imag();
  for (int i = 0; i < k; ++i) {
    const double f = -1.0 + 2.0 * i / (k - 1);
    d.x.push_back(cx + opt_.wigner_extent * f);
    d.p.push_back(cp + opt_.wigner_extent * f);
  }
  d.values = wigner_grid(psi_, d.x, d.p);
  wigner_.push_back(std::move(d));
}

nlohmann::json QtSimulator::checkpoint() const {
  nlohmann::json j;
  j["regime"] = static_cast<int>(regime_);
  j["psi"] = regime_ == Regime::exact ? psi_.to_json() : nlohmann::json(nullptr);
  j["gauss"] = gauss_.to_json();
  j["m_up"] = m_up_;
  j["t"] = t_;
  j["theta_track"] = theta_track_;
  j["hazard_left"] = hazard_left_;
  j["next_attempt"] = next_attempt_;
  j["residual_max"] = residual_max_;
  j["rng"] = rng_.serialize();
  j["counters"] = {counters_.absorptions,    counters_.emissions, counters_.pumps,   counters_.transitions_up,
                   counters_.transitions_down, counters_.deferred, counters_.fallbacks};
  return j;
}

void QtSimulator::restore(const nlohmann::json& j) {
  regime_ = static_cast<Regime>(j.at("regime").get<int>());
  if (regime_ == Regime::exact) psi_ = FockVector::from_json(j.at("psi"));
  gauss_ = GaussianMoments::from_json(j.at("gauss"));
  m_up_ = j.at("m_up").get<std::int64_t>();
  t_ = j.at("t").get<double>();
  theta_track_ = j.at("theta_track").get<double>();
  hazard_left_ = j.at("hazard_left").get<double>();
  next_attempt_ = j.at("next_attempt").get<double>();
  residual_max_ = j.at("residual_max").get<double>();
  rng_.deserialize(j.at("rng").get<std::string>());
  const auto c = j.at("counters").get<std::vector<std::int64_t>>();
  counters_ = {c.at(0), c.at(1), c.at(2), c.at(3), c.at(4), c.at(5), c.at(6)};
}

QtSimulator make_qt_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory, QtOptions opt) {
  RandomStream init_rng(master_seed, trajectory, 1);
  const InitialCondition ic = stationary_initial_condition(p, opt.initial, init_rng, opt.excitations);
  const double theta = init_rng.uniform_angle();
  RandomStream rng(master_seed, trajectory, 0);
  const auto n = static_cast<double>(ic.n);
  if (n < opt.n_trans_up) {
    const int n_max = std::max(opt.n_max, static_cast<int>(std::ceil(n + 10.0 * std::sqrt(n + 1.0))) + 20);
    // the stationary density matrix is diagonal in n, so a number state is a fair draw from it
    return QtSimulator(p, FockVector::number_state(static_cast<int>(ic.n), n_max), ic.m_up, std::move(rng), opt);
  }
  return QtSimulator(p, GaussianMoments::coherent(n, theta), ic.m_up, std::move(rng), opt);
}

TimeSeries run_qt_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                             std::uint64_t trajectory, QtOptions opt) {
  QtSimulator sim = make_qt_simulator(p, master_seed, trajectory, opt);
  return record(sim, window);
}

}  // namespace pcl
