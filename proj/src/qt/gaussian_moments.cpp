#include "pcl/qt/gaussian_moments.hpp"

#include <array>
#include <cmath>
#include <span>

namespace pcl {

GaussianMoments GaussianMoments::coherent(double mean_n, double theta) {
  GaussianMoments g;
  g.mean_n = mean_n;
  g.mean_theta = theta;
  g.var_n = mean_n;
  g.var_theta = 0.25 / mean_n;
  g.cov = 0.0;
  return g;
}

nlohmann::json GaussianMoments::to_json() const {
  return {{"mean_n", mean_n}, {"mean_theta", mean_theta}, {"var_n", var_n}, {"var_theta", var_theta}, {"cov", cov}};
}

GaussianMoments GaussianMoments::from_json(const nlohmann::json& j) {
  GaussianMoments g;
  g.mean_n = j.at("mean_n").get<double>();
  g.mean_theta = j.at("mean_theta").get<double>();
  g.var_n = j.at("var_n").get<double>();
  g.var_theta = j.at("var_theta").get<double>();
  g.cov = j.at("cov").get<double>();
  return g;
}

namespace {

enum class Fluct { dn, dtheta };

constexpr std::size_t kMaxOps = 8;

// Ordered two-point functions of the fluctuation operators; [dn, dtheta] = i.
struct Contractions {
  cplx dn_dn, th_th, dn_th, th_dn;
  cplx operator()(Fluct a, Fluct b) const {
    if (a == Fluct::dn) return b == Fluct::dn ? dn_dn : dn_th;
    return b == Fluct::dn ? th_dn : th_th;
  }
};

// Sum over perfect pairings of the ordered product ops[0] ops[1] ...
cplx wick_pairings(std::span<const Fluct> ops, const Contractions& g) {
  if (ops.empty()) return 1.0;
  if (ops.size() % 2 == 1) return 0.0;
  cplx acc = 0.0;
  std::array<Fluct, kMaxOps> rest{};
  for (std::size_t j = 1; j < ops.size(); ++j) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < ops.size(); ++i)
      if (i != j) rest[k++] = ops[i];
    acc += g(ops[0], ops[j]) * wick_pairings(std::span<const Fluct>(rest.data(), k), g);
  }
  return acc;
}

// <prod (X_i + s_i)> in the given order.
cplx shifted_product(std::span<const Fluct> ops, std::span<const cplx> shifts, const Contractions& g) {
  const std::size_t n = ops.size();
  cplx acc = 0.0;
  std::array<Fluct, kMaxOps> kept{};
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    cplx weight = 1.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i))
        kept[k++] = ops[i];
      else
        weight *= shifts[i];
    }
    if (k % 2 == 1) continue;
    acc += weight * wick_pairings(std::span<const Fluct>(kept.data(), k), g);
  }
  return acc;
}

// <L sqrt(n) e^{-i theta} R> for fluctuation strings L and R.
cplx field_string(const GaussianMoments& m, std::span<const Fluct> left, std::span<const Fluct> right) {
  const Contractions g{m.var_n, m.var_theta, cplx(m.cov, 0.5), cplx(m.cov, -0.5)};
  const cplx lambda(0.0, -1.0);
  // sqrt(m + dn) = sqrt(m) sum_q f_q (dn/m)^q
  constexpr std::array<double, 4> taylor{1.0, 0.5, -0.125, 0.0625};
  cplx acc = 0.0;
  for (std::size_t q = 0; q < taylor.size(); ++q) {
    std::array<Fluct, kMaxOps> ops{};
    std::array<cplx, kMaxOps> shifts{};
    std::size_t k = 0;
    for (Fluct f : left) {
      ops[k] = f;
      shifts[k++] = lambda * g(f, Fluct::dtheta);
    }
    for (std::size_t i = 0; i < q; ++i) {
      ops[k] = Fluct::dn;
      shifts[k++] = lambda * g(Fluct::dn, Fluct::dtheta);
    }
    for (Fluct f : right) {
      ops[k] = f;
      shifts[k++] = lambda * g(Fluct::dtheta, f);
    }
    acc += taylor[q] * std::pow(m.mean_n, -static_cast<double>(q)) *
           shifted_product(std::span<const Fluct>(ops.data(), k), std::span<const cplx>(shifts.data(), k), g);
  }
  return acc * std::sqrt(m.mean_n) * std::exp(-0.5 * m.var_theta) * std::polar(1.0, -m.mean_theta);
}

}  // namespace

WickCoefficients wick_coefficients(const GaussianMoments& g) {
  constexpr std::array<Fluct, 1> n1{Fluct::dn};
  constexpr std::array<Fluct, 2> n2{Fluct::dn, Fluct::dn};
  constexpr std::array<Fluct, 1> t1{Fluct::dtheta};
  constexpr std::array<Fluct, 2> t2{Fluct::dtheta, Fluct::dtheta};
  constexpr std::array<Fluct, 2> nt{Fluct::dn, Fluct::dtheta};
  constexpr std::array<Fluct, 2> tn{Fluct::dtheta, Fluct::dn};
  WickCoefficients w;
  w.c1 = field_string(g, {}, {});
  w.c2 = field_string(g, n1, {});
  w.c6 = field_string(g, {}, t1);
  w.d1 = field_string(g, {}, t2);
  const cplx sym = 0.5 * (field_string(g, {}, nt) + field_string(g, {}, tn));
  w.d2 = sym + w.c6 + cplx(0.0, 0.5) * w.c1;
  w.d3 = field_string(g, n2, {});
  return w;
}

NoiseAmplitudes noise_amplitudes(const GaussianMoments& g, const WickCoefficients& w) {
  NoiseAmplitudes k;
  k.mean_n = w.c2 - w.c1;
  k.var_n = w.d3 - 2.0 * w.c2 + w.c1 - g.var_n * w.c1;
  k.mean_theta = w.c6;
  k.var_theta = w.d1 - g.var_theta * w.c1;
  k.cov = w.d2 - w.c6 - cplx(g.cov, 0.5) * w.c1;
  return k;
}

cplx field_expectation(const GaussianMoments& g, FieldReconstruction mode) {
  if (mode == FieldReconstruction::simple)
    return std::polar(std::sqrt(g.mean_n) * std::exp(-0.5 * g.var_theta), g.mean_theta);
  return std::conj(field_string(g, {}, {}));
}

void variational_diffusion_step(GaussianMoments& g, const VariationalRates& r, double dt, cplx dz) {
  const WickCoefficients w = wick_coefficients(g);
  const NoiseAmplitudes k = noise_amplitudes(g, w);
  const double gain_loss = r.absorption + r.emission;
  const double m = g.mean_n;
  const double e1 = (1.0 + g.var_n / (m * m)) / m;
  const cplx noise = std::sqrt(r.kappa) * dz;
  auto kick = [&](cplx amp) { return 2.0 * (amp * noise).real(); };

  const double dm = (-gain_loss * g.var_n - r.kappa * m) * dt + kick(k.mean_n);
  const double dv = (-2.0 * r.kappa * g.var_n + r.kappa * m - 2.0 * r.kappa * std::norm(k.mean_n)) * dt + kick(k.var_n);
  const double dth =
      ((-r.frame_detuning + 0.5 * r.kerr) - r.kerr * m - gain_loss * g.cov) * dt + kick(k.mean_theta);
  const double dvth =
      (-2.0 * r.kerr * g.cov + 0.25 * r.kappa * e1 - 2.0 * r.kappa * std::norm(k.mean_theta)) * dt + kick(k.var_theta);
  const double dc = (-r.kerr * g.var_n - r.kappa * g.cov - 2.0 * r.kappa * (k.mean_n * std::conj(k.mean_theta)).real()) * dt +
                    kick(k.cov);

  g.mean_n += dm;
  g.var_n += dv;
  g.mean_theta += dth;
  g.var_theta += dvth;
  g.cov += dc;
}

namespace {

void jump_update(GaussianMoments& g, double shifted_n, double number_offset) {
  const double v = g.var_n;
  const double c = g.cov;
  const double inv = 1.0 / shifted_n;
  const double e = (1.0 + v * inv * inv) * inv;
  g.mean_n += v * inv + number_offset;
  g.var_n -= v * v * inv * inv;
  g.mean_theta += c * inv;
  g.var_theta += 0.25 * e * inv - c * c * inv * inv;
  g.cov -= v * c * inv * inv;
}

}  // namespace

void absorption_jump(GaussianMoments& g) { jump_update(g, g.mean_n, -1.0); }

void emission_jump(GaussianMoments& g) { jump_update(g, g.mean_n + 1.0, 1.0); }

}  // namespace pcl
