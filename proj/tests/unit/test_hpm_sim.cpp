#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "pcl/hpm_sim.hpp"

using namespace pcl;

namespace {

ModelParams dye_preset(bool interacting) {
  ModelParams p = model_preset("rhodamine6g-560nm");
  if (!interacting) p.kerr = 0.0;
  return p;
}

// M_up at which emission - absorption - kappa vanishes for photon number n.
double balanced_m_up(const ModelParams& p, double n) {
  return (p.kappa + p.b12_at(n) * static_cast<double>(p.m_tot)) / (p.b21(n) + p.b12_at(n));
}

}  // namespace

TEST_CASE("balanced drift leaves the phasor alone") {
  ModelParams p = dye_preset(false);
  p.kappa = 0.0;
  p.frame = FrameChoice::vacuum;
  PhasorState s{500.0, 0.3, balanced_m_up(p, 500.0), 0.0};
  const PhasorState before = s;
  hpm_drift_step(s, p, 10.0);
  CHECK(s.n == doctest::Approx(before.n).epsilon(1e-10));
  CHECK(s.theta == before.theta);
  CHECK(s.m_up == doctest::Approx(before.m_up).epsilon(1e-12));
  CHECK(s.t == 10.0);
}

TEST_CASE("mean-field frame: no rotation at n_bar") {
  const ModelParams p = dye_preset(true);
  PhasorState s{p.n_bar, 1.0, balanced_m_up(p, p.n_bar), 0.0};
  hpm_drift_step(s, p, 5.0);
  CHECK(std::abs(s.theta - 1.0) < 1e-9);
  PhasorState hi{2.0 * p.n_bar, 1.0, balanced_m_up(p, 2.0 * p.n_bar), 0.0};
  hpm_drift_step(hi, p, 5.0);
  CHECK(hi.theta < 1.0);
}

TEST_CASE("kicks are vector additions of a unit phasor") {
  RandomStream rng(5, 0, 0);
  PhasorState s{0.0, 0.0, 100.0, 0.0};
  const double phi = hpm_spontaneous_kick(s, rng);
  CHECK(s.n == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::remainder(s.theta - phi, 2.0 * M_PI) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.m_up == 99.0);

  for (int i = 0; i < 200; ++i) {
    const std::complex<double> a = std::polar(std::sqrt(s.n), s.theta);
    const double theta_before = s.theta;
    const double ph = hpm_spontaneous_kick(s, rng);
    const std::complex<double> b = a + std::polar(1.0, ph);
    CHECK(s.n == doctest::Approx(std::norm(b)).epsilon(1e-10));
    CHECK(std::remainder(s.theta - std::arg(b), 2.0 * M_PI) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(s.theta - theta_before) <= M_PI);  // unwrapped
  }

  // collinear addition keeps the phase
  PhasorState c{100.0, 0.0, 10.0, 0.0};
  RandomStream r2(1, 1, 1);
  for (int i = 0; i < 100000; ++i) {
    PhasorState t = c;
    const double ph = hpm_spontaneous_kick(t, r2);
    if (std::abs(std::remainder(ph, 2.0 * M_PI)) < 1e-3) {
      CHECK(t.n == doctest::Approx(121.0).epsilon(1e-5));
      CHECK(std::abs(t.theta) < 1e-3);
    }
  }
}

TEST_CASE("phase after a jump from the vacuum is uniform") {
  RandomStream rng(11, 0, 0);
  std::vector<double> phases;
  for (int i = 0; i < 10000; ++i) {
    PhasorState s{0.0, 0.0, 10.0, 0.0};
    hpm_spontaneous_kick(s, rng);
    double w = std::fmod(s.theta, 2.0 * M_PI);
    if (w < 0.0) w += 2.0 * M_PI;
    phases.push_back(w / (2.0 * M_PI));
  }
  std::sort(phases.begin(), phases.end());
  double d = 0.0;
  const double m = static_cast<double>(phases.size());
  for (std::size_t i = 0; i < phases.size(); ++i)
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - phases[i], phases[i] - static_cast<double>(i) / m});
  CHECK(d < 1.628 / std::sqrt(m));  // 1% critical value
}

TEST_CASE("ensemble phase diffusion and zero mean drift") {
  const ModelParams p = dye_preset(false);
  const double span = 50.0;
  double sum = 0.0, sum2 = 0.0, expect = 0.0;
  int used = 0;
  for (std::uint64_t i = 0; i < 400; ++i) {
    HpmSimulator sim = make_hpm_simulator(p, 21, i);
    sim.advance_to(100.0);
    const double theta0 = sim.state().theta;
    const double n0 = sim.state().n;
    if (n0 < 200.0) continue;  // stay away from phase jumps
    expect += hpm_kick_rate(sim.state(), p) / (2.0 * n0);
    sim.advance_to(100.0 + span);
    const double d = sim.state().theta - theta0;
    sum += d;
    sum2 += d * d;
    ++used;
  }
  REQUIRE(used > 100);
  const double mean = sum / used;
  const double var = sum2 / used - mean * mean;
  CHECK(var / span == doctest::Approx(expect / used).epsilon(0.15));
  CHECK(std::abs(mean) < 3.0 * std::sqrt(var / used));
}

TEST_CASE("stationary mean photon number") {
  const ModelParams p = dye_preset(false);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto n = run_hpm_trajectory(p, RunWindow{1e5, 1e3, 10.0}, 2024, i).column("n");
    for (double v : n) acc += v;
    count += n.size();
  }
  CHECK(acc / static_cast<double>(count) == doctest::Approx(p.n_bar).epsilon(0.02));
}

TEST_CASE("hpm determinism and checkpoint") {
  const ModelParams p = dye_preset(true);
  const RunWindow w{2000.0, 100.0, 1.0};
  CHECK(run_hpm_trajectory(p, w, 3, 0).rows == run_hpm_trajectory(p, w, 3, 0).rows);
  HpmSimulator a = make_hpm_simulator(p, 3, 1);
  a.advance_to(500.0);
  const nlohmann::json cp = a.checkpoint();
  a.advance_to(900.0);
  HpmSimulator b = make_hpm_simulator(p, 4, 4);
  b.restore(cp);
  b.advance_to(900.0);
  CHECK(a.sample() == b.sample());
  CHECK(a.bound_violations() == 0);
}
