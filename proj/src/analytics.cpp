#include "pcl/analytics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace pcl {

double NumberDistribution::moment(int k) const {
  double acc = 0.0;
  for (std::size_t n = 0; n < probabilities.size(); ++n)
    acc += std::pow(static_cast<double>(n), k) * probabilities[n];
  return acc;
}

double NumberDistribution::mean() const { return moment(1); }

double NumberDistribution::variance() const {
  const double m = mean();
  double acc = 0.0;
  for (std::size_t n = 0; n < probabilities.size(); ++n) {
    const double d = static_cast<double>(n) - m;
    acc += d * d * probabilities[n];
  }
  return acc;
}

double NumberDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

void NumberDistribution::normalize() {
  const double z = total();
  if (!(z > 0.0)) throw std::runtime_error("cannot normalize a distribution with zero mass");
  for (double& v : probabilities) v /= z;
}

double total_variation(const NumberDistribution& a, const NumberDistribution& b) {
  const std::size_t len = std::max(a.probabilities.size(), b.probabilities.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double pa = n < a.probabilities.size() ? a.probabilities[n] : 0.0;
    const double pb = n < b.probabilities.size() ? b.probabilities[n] : 0.0;
    acc += std::abs(pa - pb);
  }
  return 0.5 * acc;
}

namespace {

constexpr double kLogFloor = -46.0;
constexpr double kTailTolerance = 1e-10;

// Accumulates log P from log_ratio(n) = log P(n+1)/P(n), capped at n = X.
template <class LogRatio>
NumberDistribution build_from_ratios(std::int64_t x, int n_max, LogRatio log_ratio) {
  const bool adaptive = n_max < 0;
  const std::int64_t limit = adaptive ? x : std::min<std::int64_t>(x, n_max);
  std::vector<double> logp{0.0};
  double peak = 0.0;
  for (std::int64_t n = 0; n < limit; ++n) {
    const double next = logp.back() + log_ratio(static_cast<double>(n));
    logp.push_back(next);
    peak = std::max(peak, next);
    if (adaptive && next < peak && next - peak < kLogFloor) break;
  }
  if (!adaptive && limit < x && logp.back() - peak > std::log(kTailTolerance)) {
    std::ostringstream os;
    os << "n_max = " << n_max << " leaves tail P(n_max)/P_peak = " << std::exp(logp.back() - peak);
    throw TruncationError(os.str());
  }
  NumberDistribution d;
  d.probabilities.resize(logp.size());
  for (std::size_t n = 0; n < logp.size(); ++n) d.probabilities[n] = std::exp(logp[n] - peak);
  d.normalize();
  return d;
}

void check_excitations(const ModelParams& p, std::int64_t x) {
  if (x < 0 || x > p.m_tot) {
    std::ostringstream os;
    os << "excitation number X = " << x << " outside [0, " << p.m_tot << "]";
    throw UnphysicalParameters(os.str());
  }
}

}  // namespace

NumberDistribution detailed_balance_distribution(const ModelParams& p, std::int64_t x, int n_max) {
  check_excitations(p, x);
  const double m = static_cast<double>(p.m_tot);
  const double xd = static_cast<double>(x);
  return build_from_ratios(x, n_max, [&](double n) {
    return std::log(p.b21(n) * (xd - n)) - std::log(p.b12_at(n) * (m - xd + n + 1.0) + p.kappa);
  });
}

NumberDistribution closed_form_distribution(const ModelParams& p, std::int64_t x, int n_max) {
  check_excitations(p, x);
  const double m = static_cast<double>(p.m_tot);
  const double xd = static_cast<double>(x);
  const double log_ks = std::log(p.w_down / p.w_up);
  return build_from_ratios(x, n_max, [&](double n) {
    return std::log(xd - n) - std::log(m - xd + n + 1.0) + log_ks -
           (p.detuning + p.kerr * (n + 0.5)) / p.temperature;
  });
}

namespace {

struct ScaledMoments {
  double mean = 0.0;
  double second = 0.0;
};

// Moments of u under exp(-(b u + sigma u^2 / 2)) on u >= 0, where u = n / n_bar.
ScaledMoments scaled_moments(double b, double sigma) {
  using boost::math::quadrature::gauss_kronrod;
  const double u_peak = (b < 0.0 && sigma > 0.0) ? -b / sigma : 0.0;
  const double shift = -(b * u_peak + 0.5 * sigma * u_peak * u_peak);
  double z[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    auto f = [&](double u) { return std::pow(u, k) * std::exp(-(b * u + 0.5 * sigma * u * u) - shift); };
    double lower = 0.0;
    double upper = 0.0;
    if (u_peak > 0.0) lower = gauss_kronrod<double, 61>::integrate(f, 0.0, u_peak, 15, 1e-13);
    upper = gauss_kronrod<double, 61>::integrate(f, u_peak, std::numeric_limits<double>::infinity(), 15, 1e-13);
    z[k] = lower + upper;
  }
  return {z[1] / z[0], z[2] / z[0]};
}

}  // namespace

double thermodynamic_eta(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw UnphysicalParameters("thermodynamic_eta needs finite sigma >= 0");
  if (sigma == 0.0) return 1.0;

  // The mean of u decreases monotonically in b; bracket the root of mean(b) = 1.
  double hi = 2.0;
  double lo = 0.0;
  for (int i = 0; scaled_moments(lo, sigma).mean <= 1.0; ++i) {
    if (i > 200) throw ConvergenceError("thermodynamic_eta: could not bracket the chemical potential");
    hi = lo;
    lo = lo == 0.0 ? -1.0 : 2.0 * lo;
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (scaled_moments(mid, sigma).mean > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(mid))) {
      const ScaledMoments s = scaled_moments(mid, sigma);
      return std::sqrt(s.second / (s.mean * s.mean) - 1.0);
    }
  }
  std::ostringstream os;
  os << "thermodynamic_eta(" << sigma << "): bisection stalled in [" << lo << ", " << hi << "]";
  throw ConvergenceError(os.str());
}

double g2zero(const ModelParams& p, double n_bar) {
  const double sigma = p.kerr * n_bar * n_bar / p.temperature;
  return 1.0 / (1.0 + sigma + n_bar * n_bar / effective_reservoir_size(p, n_bar));
}

double mean_absorption_rate(const ModelParams& p, double n_bar) {
  const double eta = std::sqrt(g2zero(p, n_bar));
  const ExcitationNumber ex = excitation_number(p, n_bar, eta);
  return p.b12_at(n_bar) * (static_cast<double>(p.m_tot) - ex.m_up);
}

double gamma2(const ModelParams& p, double n_bar) {
  if (!(n_bar > 0.0)) throw UnphysicalParameters("gamma2 needs n_bar > 0");
  const double sigma = p.kerr * n_bar * n_bar / p.temperature;
  const double factor = 1.0 + sigma + n_bar * n_bar / effective_reservoir_size(p, n_bar);
  return factor * mean_absorption_rate(p, n_bar) / n_bar;
}

AntibunchingPrediction antibunching_dip(const ModelParams& p, double n_bar) {
  const double b12 = p.b12_at(n_bar);
  const double b21 = p.b21(n_bar);
  const double dx_dn = b12 * b21 * static_cast<double>(p.m_tot) / (n_bar * n_bar * (b12 + b21) * (b12 + b21));
  AntibunchingPrediction out;
  if (p.kappa == 0.0) {
    out.tau_x = std::numeric_limits<double>::infinity();
    return out;
  }
  out.dip = p.kappa / (dx_dn * gamma2(p, n_bar));
  out.tau_x = dx_dn / p.kappa;
  return out;
}

double gamma1(const ModelParams& p, double n_bar, double xi) {
  if (!(xi >= 2.0 && xi <= 4.0)) throw ConfigError("xi must lie in [2, 4]");
  return mean_absorption_rate(p, n_bar) / (xi * n_bar);
}

double phase_jump_rate(const ModelParams& p, double n_bar, double zeta) {
  if (!(zeta >= 1.0)) throw ConfigError("zeta must be >= 1");
  return mean_absorption_rate(p, n_bar) / std::pow(n_bar, zeta);
}

namespace {

// e^-x + x - 1 without cancellation at small x.
double henry_kernel(double x) {
  if (x < 1e-4) return x * x * (0.5 - x / 6.0 + x * x / 24.0);
  return std::expm1(-x) + x;
}

}  // namespace

double whittaker_g1(double eta, double gamma2_rate, double kerr, double n_bar, double tau, WhittakerMode mode) {
  if (tau < 0.0) throw std::invalid_argument("whittaker_g1 needs tau >= 0");
  const double x = gamma2_rate * tau;
  const double st = std::exp(0.25 * eta * eta * (std::expm1(-x) - x));
  const double h = kerr * n_bar * eta / gamma2_rate;
  const double henry = std::exp(-h * h * henry_kernel(x));
  switch (mode) {
    case WhittakerMode::schawlow_townes: return st;
    case WhittakerMode::henry: return henry;
    case WhittakerMode::both: return st * henry;
  }
  return st * henry;
}

DephasingFactor g1_short_time_interacting(const NumberDistribution& dist, double kerr, double tau) {
  DephasingFactor out;
  for (std::size_t n = 0; n < dist.probabilities.size(); ++n)
    out.direct += dist.probabilities[n] * std::polar(1.0, -kerr * static_cast<double>(n) * tau);
  const double ut = kerr * tau;
  out.cumulant = std::polar(std::exp(-0.5 * ut * ut * dist.variance()), -ut * dist.mean());
  return out;
}

CoherencePrediction predict_coherence(const ModelParams& p, double xi) {
  CoherencePrediction c;
  const double n_bar = p.n_bar;
  c.xi = xi;
  c.sigma = p.kerr * n_bar * n_bar / p.temperature;
  c.m_eff = effective_reservoir_size(p, n_bar);
  c.eta = std::sqrt(g2zero(p, n_bar));
  c.gamma2 = gamma2(p, n_bar);
  c.gamma1 = gamma1(p, n_bar, xi);
  const AntibunchingPrediction ab = antibunching_dip(p, n_bar);
  c.dip = ab.dip;
  c.tau_x = ab.tau_x;
  return c;
}

}  // namespace pcl
