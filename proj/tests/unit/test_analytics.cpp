#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcl/analytics.hpp"
#include "pcl/config.hpp"

using namespace pcl;

namespace {

ModelParams dye_preset(bool interacting) {
  ModelParams p = model_preset("rhodamine6g-560nm");
  if (!interacting) p.kerr = 0.0;
  return p;
}

std::int64_t stationary_x(const ModelParams& p) {
  return std::llround(excitation_number(p, p.n_bar, std::sqrt(g2zero(p, p.n_bar))).x);
}

// Independent eta(sigma): midpoint sums on a fixed u grid, bisection on b.
double eta_oracle(double sigma) {
  auto moments = [&](double b, double& m1, double& m2) {
    const double du = 2e-4;
    double z = 0, a1 = 0, a2 = 0;
    double peak = -1e300;
    for (double u = 0.5 * du; u < 60.0; u += du) peak = std::max(peak, -(b * u + 0.5 * sigma * u * u));
    for (double u = 0.5 * du; u < 60.0; u += du) {
      const double w = std::exp(-(b * u + 0.5 * sigma * u * u) - peak);
      z += w;
      a1 += u * w;
      a2 += u * u * w;
    }
    m1 = a1 / z;
    m2 = a2 / z;
  };
  double lo = -50.0, hi = 50.0, m1 = 0, m2 = 0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    moments(mid, m1, m2);
    (m1 > 1.0 ? lo : hi) = mid;
  }
  moments(0.5 * (lo + hi), m1, m2);
  return std::sqrt(m2 / (m1 * m1) - 1.0);
}

}  // namespace

TEST_CASE("detailed balance: empty reservoir gives the vacuum") {
  const NumberDistribution d = detailed_balance_distribution(dye_preset(false), 0);
  REQUIRE(d.probabilities.size() == 1);
  CHECK(d.probabilities[0] == 1.0);
}

TEST_CASE("detailed balance: pairwise ratio holds for every neighbour pair") {
  for (bool interacting : {false, true}) {
    const ModelParams p = dye_preset(interacting);
    const std::int64_t x = stationary_x(p);
    const NumberDistribution d = detailed_balance_distribution(p, x);
    const double m = static_cast<double>(p.m_tot);
    const double xd = static_cast<double>(x);
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < d.probabilities.size(); ++n) {
      if (d.probabilities[n] < 1e-300 || d.probabilities[n + 1] < 1e-300) continue;
      const double nn = static_cast<double>(n);
      const double expect = p.b21(nn) * (xd - nn) / (p.b12_at(nn) * (m - xd + nn + 1.0) + p.kappa);
      worst = std::max(worst, std::abs(d.probabilities[n + 1] / d.probabilities[n] / expect - 1.0));
    }
    CHECK(worst < 1e-12);
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("detailed balance: stationary X reproduces n_bar") {
  const ModelParams p0 = dye_preset(false);
  const NumberDistribution d0 = detailed_balance_distribution(p0, stationary_x(p0));
  CHECK(d0.mean() == doctest::Approx(1000.0).epsilon(0.02));
  CHECK(std::sqrt(d0.variance()) / d0.mean() == doctest::Approx(0.99).epsilon(0.02));
  const ModelParams p1 = dye_preset(true);
  const NumberDistribution d1 = detailed_balance_distribution(p1, stationary_x(p1));
  CHECK(d1.mean() == doctest::Approx(1000.0).epsilon(0.02));
  CHECK(std::sqrt(d1.variance()) / d1.mean() == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("detailed balance: large reservoir approaches the Bose-Einstein ratio") {
  ModelParams p = with_reservoir(dye_preset(false), 1000000000000LL);
  p.kappa = 0.0;
  const std::int64_t x = stationary_x(p);
  const NumberDistribution d = detailed_balance_distribution(p, x);
  const double mean = d.mean();
  const double m_up = static_cast<double>(x) - mean;
  const double m_down = static_cast<double>(p.m_tot) - m_up;
  const double q = p.b21(0.0) * m_up / (p.b12 * m_down);
  const auto centre = static_cast<std::size_t>(std::llround(mean));
  double worst = 0.0;
  for (std::size_t n = centre - 50; n < centre + 50; ++n)
    worst = std::max(worst, std::abs(d.probabilities[n + 1] / d.probabilities[n] / q - 1.0));
  CHECK(worst < 1e-9);
}

TEST_CASE("detailed balance: explicit truncation") {
  const ModelParams p = dye_preset(false);
  CHECK_THROWS_AS(detailed_balance_distribution(p, stationary_x(p), 100), TruncationError);
  CHECK_THROWS_AS(detailed_balance_distribution(p, -1), UnphysicalParameters);
  CHECK_THROWS_AS(detailed_balance_distribution(p, p.m_tot + 1), UnphysicalParameters);
}

TEST_CASE("closed form equals the pairwise product without interactions or loss") {
  ModelParams p = oracle_small_instance().model;
  const NumberDistribution a = detailed_balance_distribution(p, 10, 10);
  const NumberDistribution b = closed_form_distribution(p, 10, 10);
  for (std::size_t n = 0; n < a.probabilities.size(); ++n)
    CHECK(a.at(n) == doctest::Approx(b.at(n)).epsilon(1e-12));
}

TEST_CASE("total variation pads the shorter distribution") {
  NumberDistribution a{{0.5, 0.5}};
  NumberDistribution b{{0.5, 0.25, 0.25}};
  CHECK(total_variation(a, b) == doctest::Approx(0.25));
  CHECK(total_variation(a, a) == 0.0);
}

TEST_CASE("thermodynamic eta") {
  CHECK(thermodynamic_eta(0.0) == 1.0);
  const double s = 1e-3;
  CHECK((1.0 - thermodynamic_eta(s)) / s == doctest::Approx(1.0).epsilon(0.05));
  CHECK(thermodynamic_eta(0.64) == doctest::Approx(0.75).epsilon(0.01 / 0.75));
  CHECK(thermodynamic_eta(100.0) == doctest::Approx(0.1).epsilon(0.05));
  for (double sigma : {0.1, 0.6365, 3.0, 10.0, 30.0}) CHECK(thermodynamic_eta(sigma) == doctest::Approx(eta_oracle(sigma)).epsilon(1e-5));
  // frozen oracle outputs
  CHECK(thermodynamic_eta(0.6365) == doctest::Approx(0.75550).epsilon(1e-4));
  CHECK(thermodynamic_eta(10.0) == doctest::Approx(0.31487).epsilon(1e-4));
  CHECK_THROWS(thermodynamic_eta(-1.0));
}

TEST_CASE("g2zero tracks the thermodynamic eta at infinite reservoir") {
  ModelParams p = with_reservoir(dye_preset(false), 4000000000000000000LL);
  p.detuning = 0.0;
  double last_err = 1.0;
  for (double sigma : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0}) {
    p.kerr = sigma * p.temperature / (p.n_bar * p.n_bar);
    const double eta_g2 = std::sqrt(g2zero(p, p.n_bar));
    const double eta_th = thermodynamic_eta(sigma);
    const double err = std::abs(eta_g2 / eta_th - 1.0);
    CHECK(err < 0.05);
    if (sigma >= 10.0) {
      CHECK(err < last_err);
      last_err = err;
    }
  }
  p.kerr = 0.0;
  CHECK(g2zero(p, p.n_bar) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("table one coherence numbers") {
  const CoherencePrediction c0 = predict_coherence(dye_preset(false), 2.0);
  CHECK(c0.eta == doctest::Approx(0.99).epsilon(0.01));
  CHECK(c0.gamma2 == doctest::Approx(9.29e-4).epsilon(0.01));
  CHECK(c0.dip == doctest::Approx(0.012).epsilon(0.05));
  const CoherencePrediction c1 = predict_coherence(dye_preset(true), 2.0);
  CHECK(c1.sigma == doctest::Approx(0.6365).epsilon(1e-3));
  CHECK(c1.m_eff == doctest::Approx(7.6e7).epsilon(0.02));
  CHECK(c1.eta == doctest::Approx(0.7786).epsilon(1e-3));
  CHECK(c1.gamma2 == doctest::Approx(1.512e-3).epsilon(0.01));
  CHECK(c1.gamma2 / c0.gamma2 == doctest::Approx(1.0 + c1.sigma).epsilon(0.05));
}

TEST_CASE("tau_c1 / tau_c2 = xi / eta^2") {
  for (bool interacting : {false, true})
    for (double xi : {2.0, 3.0, 4.0}) {
      const CoherencePrediction c = predict_coherence(dye_preset(interacting), xi);
      CHECK((1.0 / c.gamma1) / (1.0 / c.gamma2) == doctest::Approx(xi / (c.eta * c.eta)).epsilon(1e-12));
    }
}

TEST_CASE("gamma2 does not depend on the Kennard-Stepanov side") {
  for (bool interacting : {false, true}) {
    ModelParams e = dye_preset(interacting);
    ModelParams a = e;
    a.ks_side = KsSide::absorption;
    CHECK(gamma2(a, e.n_bar) == doctest::Approx(gamma2(e, e.n_bar)).epsilon(1e-12));
  }
}

TEST_CASE("gamma2 reduces to B12 M_down / n_bar") {
  ModelParams p = with_reservoir(dye_preset(false), 4000000000000000000LL);
  CHECK(gamma2(p, p.n_bar) == doctest::Approx(mean_absorption_rate(p, p.n_bar) / p.n_bar).epsilon(1e-9));
  CHECK_THROWS_AS(gamma2(p, 0.0), UnphysicalParameters);
}

TEST_CASE("antibunching dip") {
  ModelParams p = dye_preset(false);
  p.kappa = 0.0;
  CHECK(antibunching_dip(p, p.n_bar).dip == 0.0);
  CHECK(std::isinf(antibunching_dip(p, p.n_bar).tau_x));
  const AntibunchingPrediction ab = antibunching_dip(dye_preset(true), 1000.0);
  CHECK(ab.tau_x == doctest::Approx(9.19e4).epsilon(0.01));
}

TEST_CASE("gamma1 and the phase-jump rate") {
  const ModelParams p = dye_preset(false);
  CHECK(phase_jump_rate(p, p.n_bar, 1.0) == doctest::Approx(2.0 * gamma1(p, p.n_bar, 2.0)).epsilon(1e-14));
  CHECK(phase_jump_rate(p, p.n_bar, 50.0) < 1e-100);
  CHECK(gamma1(p, p.n_bar, 2.0) == doctest::Approx(2.0 * gamma1(p, p.n_bar, 4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gamma1(p, p.n_bar, 1.5), ConfigError);
  CHECK_THROWS_AS(phase_jump_rate(p, p.n_bar, 0.5), ConfigError);
}

TEST_CASE("whittaker g1 limits") {
  const double eta = 0.8, g2r = 1e-3, u = 1e-5, n = 1000.0;
  for (auto m : {WhittakerMode::schawlow_townes, WhittakerMode::henry, WhittakerMode::both})
    CHECK(whittaker_g1(eta, g2r, u, n, 0.0, m) == 1.0);

  // Henry short time: Gaussian with time sqrt(2)/(U n eta)
  const double th = std::sqrt(2.0) / (u * n * eta);
  const double t = 0.05 / g2r;
  CHECK(whittaker_g1(eta, g2r, u, n, t, WhittakerMode::henry) ==
        doctest::Approx(std::exp(-(t / th) * (t / th))).epsilon(0.05));

  // ST log-slopes: eta^2 Gamma2 / 2 early, eta^2 Gamma2 / 4 late
  auto slope = [&](double t0, double t1) {
    return -(std::log(whittaker_g1(eta, g2r, u, n, t1, WhittakerMode::schawlow_townes)) -
             std::log(whittaker_g1(eta, g2r, u, n, t0, WhittakerMode::schawlow_townes))) /
           (t1 - t0);
  };
  CHECK(slope(0.0, 1e-4 / g2r) == doctest::Approx(eta * eta * g2r / 2.0).epsilon(1e-3));
  CHECK(slope(100.0 / g2r, 101.0 / g2r) == doctest::Approx(eta * eta * g2r / 4.0).epsilon(1e-6));
  CHECK(whittaker_g1(eta, g2r, u, n, 10.0 / g2r, WhittakerMode::both) ==
        doctest::Approx(whittaker_g1(eta, g2r, u, n, 10.0 / g2r, WhittakerMode::schawlow_townes) *
                        whittaker_g1(eta, g2r, u, n, 10.0 / g2r, WhittakerMode::henry)));
  CHECK_THROWS(whittaker_g1(eta, g2r, u, n, -1.0, WhittakerMode::both));
}

TEST_CASE("short-time interacting dephasing") {
  NumberDistribution pois;
  const double lam = 50.0;
  double term = std::exp(-lam);
  for (int n = 0; n < 200; ++n) {
    pois.probabilities.push_back(term);
    term *= lam / (n + 1);
  }
  const DephasingFactor z = g1_short_time_interacting(pois, 0.0, 3.0);
  CHECK(std::abs(z.direct - 1.0) < 1e-12);

  // direct and cumulant forms differ at third order in U tau
  const double e1 = std::abs(g1_short_time_interacting(pois, 1e-3, 1.0).direct -
                             g1_short_time_interacting(pois, 1e-3, 1.0).cumulant);
  const double e2 = std::abs(g1_short_time_interacting(pois, 2e-3, 1.0).direct -
                             g1_short_time_interacting(pois, 2e-3, 1.0).cumulant);
  CHECK(e2 / e1 == doctest::Approx(8.0).epsilon(0.1));

  const ModelParams p = dye_preset(true);
  const NumberDistribution d = detailed_balance_distribution(p, stationary_x(p));
  const double eta = std::sqrt(g2zero(p, p.n_bar));
  for (double s : {0.25, 0.5, 1.0}) {
    const double tau = s / (p.kerr * p.n_bar);
    const double got = std::abs(g1_short_time_interacting(d, p.kerr, tau).direct);
    const double henry = whittaker_g1(eta, gamma2(p, p.n_bar), p.kerr, p.n_bar, tau, WhittakerMode::henry);
    CHECK(got == doctest::Approx(henry).epsilon(0.05));
  }
}
