#include <doctest.h>

#include <cmath>

#include "pcl/model.hpp"

using namespace pcl;

namespace {

ModelParams dye_preset(bool interacting) {
  ModelParams p = model_preset("rhodamine6g-560nm");
  if (!interacting) p.kerr = 0.0;
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("table one lands on the expected internal numbers") {
  const ModelParams p = dye_preset(true);
  CHECK(p.m_tot == 1000000000);
  CHECK(rel(p.b12 * static_cast<double>(p.m_tot), 1.0) < 1e-12);
  CHECK(rel(p.detuning / p.temperature, -2.4) < 1e-12);
  CHECK(rel(p.kerr, 1e-5) < 1e-12);
  CHECK(rel(p.kappa, 8.3e-4) < 1e-12);
  CHECK(p.interaction_parameter() == doctest::Approx(0.6365).epsilon(1e-3));
}

TEST_CASE("emission rate carries the Kennard-Stepanov factor") {
  ModelParams p = dye_preset(false);
  const ReservoirState one{1.0, static_cast<double>(p.m_tot) - 1.0};
  // e^{2.4} from an independent evaluation
  CHECK(emission_rate(p, one, 0.0) / p.b12 == doctest::Approx(11.023176380641601).epsilon(1e-12));
  CHECK(emission_rate(p, one, 5000.0) == emission_rate(p, one, 0.0));

  ModelParams flat = p;
  flat.detuning = 0.0;
  CHECK(emission_rate(flat, ReservoirState{17.0, 0.0}, 3.0) == doctest::Approx(17.0 * flat.b12).epsilon(1e-14));

  const ModelParams q = dye_preset(true);
  const double ratio = emission_rate(q, one, 1000.0) / emission_rate(p, one, 1000.0);
  CHECK(ratio == doctest::Approx(std::exp(-q.kerr * 1000.0 / q.temperature)).epsilon(1e-12));
}

TEST_CASE("absorption rate") {
  const ModelParams p = dye_preset(false);
  const double m = static_cast<double>(p.m_tot);
  CHECK(absorption_rate(p, ReservoirState{0.0, m}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(absorption_rate(p, ReservoirState{m, 0.0}) == 0.0);
  const ExcitationNumber ex = excitation_number(p, 1000.0, 0.99);
  const double g = absorption_rate(p, ReservoirState::from_excited(p, ex.m_up));
  CHECK(g == doctest::Approx(1.0 - ex.m_up / m).epsilon(1e-12));
}

TEST_CASE("effective reservoir size") {
  const ModelParams p = dye_preset(true);
  CHECK(effective_reservoir_size(p, 1000.0) == doctest::Approx(7.6e7).epsilon(0.02));
  ModelParams flat = dye_preset(false);
  flat.detuning = 0.0;
  CHECK(effective_reservoir_size(flat, 1000.0) == doctest::Approx(flat.m_tot / 4.0).epsilon(1e-12));
  CHECK(rel(effective_reservoir_size(dye_preset(false), 1000.0), effective_reservoir_size(p, 1000.0)) < 0.01);

  // monotone in |Delta + U n|
  double last = effective_reservoir_size(flat, 0.0);
  for (double d = 0.5; d < 6.0; d += 0.5) {
    flat.detuning = -d * flat.temperature;
    const double now = effective_reservoir_size(flat, 0.0);
    CHECK(now < last);
    last = now;
  }
}

TEST_CASE("excitation number in the fluctuation-free limit") {
  ModelParams p = dye_preset(false);
  p.kappa = 0.0;
  const double n = 1000.0;
  const ExcitationNumber ex = excitation_number(p, n, 0.0);
  const double m = static_cast<double>(p.m_tot);
  const double expect = p.b12 * m * n / (p.b21(n) * (n + 1.0) + p.b12 * n);
  CHECK(ex.m_up == doctest::Approx(expect).epsilon(1e-12));
  CHECK(ex.x == doctest::Approx(expect + n).epsilon(1e-12));
}

TEST_CASE("excitation number rejects unphysical input") {
  const ModelParams p = dye_preset(true);
  CHECK_THROWS_AS(excitation_number(p, 0.0, 0.5), UnphysicalParameters);
  ModelParams strong = p;
  strong.kerr = 1.0;  // beta U n^2 eta^2 swamps the denominator
  CHECK_THROWS_AS(excitation_number(strong, 1000.0, 1.0), UnphysicalParameters);
}

TEST_CASE("SI round trip is the identity") {
  const ModelParams p = dye_preset(true);
  const SiParams si = p.to_si();
  const ModelParams back = ModelParams::from_si(si);
  const SiParams si2 = back.to_si();
  CHECK(rel(si2.b12_hz, si.b12_hz) < 1e-12);
  CHECK(rel(si2.temperature_kelvin, si.temperature_kelvin) < 1e-12);
  CHECK(rel(si2.detuning_per_s, si.detuning_per_s) < 1e-12);
  CHECK(rel(si2.kerr_per_s, si.kerr_per_s) < 1e-12);
  CHECK(rel(si2.kappa_per_s, si.kappa_per_s) < 1e-12);
  CHECK(rel(back.temperature, p.temperature) < 1e-12);
  CHECK(rel(back.kerr, p.kerr) < 1e-12);
  CHECK(back.m_tot == p.m_tot);
  CHECK(si.temperature_kelvin == doctest::Approx(300.0).epsilon(1e-12));
}

TEST_CASE("validation") {
  ModelParams p = dye_preset(true);
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = dye_preset(true);
  p.temperature = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(model_preset("nope"), ConfigError);
}

TEST_CASE("ks side absorption agrees at n_bar") {
  ModelParams e = dye_preset(true);
  ModelParams a = e;
  a.ks_side = KsSide::absorption;
  const double n = e.n_bar;
  CHECK(a.b21(n) / a.b12_at(n) == doctest::Approx(e.b21(n) / e.b12_at(n)).epsilon(1e-12));
  // ratio B21/B12 is the same function of n on both sides
  for (double m : {0.0, 500.0, 2000.0})
    CHECK(a.b21(m) / a.b12_at(m) == doctest::Approx(e.b21(m) / e.b12_at(m)).epsilon(1e-12));
}

TEST_CASE("rotating frames") {
  ModelParams p = dye_preset(true);
  CHECK(p.frame_detuning() == doctest::Approx(-p.kerr * p.n_bar));
  p.frame = FrameChoice::vacuum;
  CHECK(p.frame_detuning() == 0.0);
  p.frame = FrameChoice::lab;
  CHECK(p.frame_detuning() == p.detuning);
  p.frame = FrameChoice::custom;
  p.custom_frame_detuning = 0.25;
  CHECK(p.frame_detuning() == 0.25);
}
