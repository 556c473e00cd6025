#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcl/config.hpp"
#include "pcl/estimators.hpp"
#include "pcl/oracle.hpp"
#include "pcl/rate_sim.hpp"

using namespace pcl;

namespace {

ModelParams dye_preset(bool interacting) {
  ModelParams p = model_preset("rhodamine6g-560nm");
  if (!interacting) p.kerr = 0.0;
  return p;
}

}  // namespace

TEST_CASE("empty system without pump is frozen") {
  ModelParams p = dye_preset(false);
  p.kappa = 0.0;
  RateSimulator sim(p, RateState{0, 0, 0.0}, RandomStream(1, 0, 0));
  CHECK_THROWS_AS(sim.step_event(), FrozenState);
  sim.advance_to(10.0);  // time still passes
  CHECK(sim.time() == 10.0);
}

TEST_CASE("dye events conserve the excitation number") {
  RateSimulator sim = make_rate_simulator(dye_preset(true), 7, 0);
  for (int i = 0; i < 20000; ++i) {
    const RateState before = sim.state();
    const auto step = sim.step_event();
    const RateState& after = sim.state();
    switch (step.event) {
      case RateEvent::emission:
        CHECK(after.n == before.n + 1);
        CHECK(after.excitations() == before.excitations());
        break;
      case RateEvent::absorption:
        CHECK(after.n == before.n - 1);
        CHECK(after.excitations() == before.excitations());
        break;
      case RateEvent::loss: CHECK(after.excitations() == before.excitations() - 1); break;
      case RateEvent::pump: CHECK(after.excitations() == before.excitations() + 1); break;
      case RateEvent::pump_discarded: CHECK(after.excitations() == before.excitations()); break;
    }
    CHECK(step.dt >= 0.0);
  }
}

TEST_CASE("event fractions follow the channel rates") {
  RateSimulator sim = make_rate_simulator(dye_preset(true), 3, 1);
  const int events = 1000000;
  double expect[4] = {0, 0, 0, 0};
  double var[4] = {0, 0, 0, 0};
  for (int i = 0; i < events; ++i) {
    const RateChannels r = sim.rates();
    const double tot = r.total();
    const double ps[4] = {r.absorption / tot, r.emission / tot, r.loss / tot, r.pump / tot};
    for (int c = 0; c < 4; ++c) {
      expect[c] += ps[c];
      var[c] += ps[c] * (1.0 - ps[c]);
    }
    sim.step_event();
  }
  const auto& counts = sim.event_counts();
  for (int c = 0; c < 4; ++c) {
    double observed = static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (c == 3) observed += static_cast<double>(counts[4]);
    CHECK(std::abs(observed - expect[c]) < 3.0 * std::sqrt(var[c]) + 1.0);
  }
}

TEST_CASE("without loss the excitation number never changes") {
  ModelParams p = dye_preset(false);
  p.kappa = 0.0;
  const TimeSeries ts = run_rate_trajectory(p, RunWindow{600.0, 100.0, 1.0}, 4, 0);
  const auto n = ts.column("n");
  const auto m = ts.column("M_up");
  for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i] + m[i] == n[0] + m[0]);
  CHECK(ts.columns == std::vector<std::string>{"t", "n", "M_up"});
}

TEST_CASE("same seed, same trajectory; checkpoint resumes exactly") {
  const ModelParams p = dye_preset(true);
  const RunWindow w{300.0, 50.0, 1.0};
  const TimeSeries a = run_rate_trajectory(p, w, 42, 3);
  const TimeSeries b = run_rate_trajectory(p, w, 42, 3);
  CHECK(a.rows == b.rows);
  CHECK(run_rate_trajectory(p, w, 42, 4).rows != a.rows);

  RateSimulator s1 = make_rate_simulator(p, 9, 0);
  s1.advance_to(100.0);
  const nlohmann::json cp = s1.checkpoint();
  s1.advance_to(200.0);
  RateSimulator s2 = make_rate_simulator(p, 1, 1);
  s2.restore(cp);
  s2.advance_to(200.0);
  CHECK(s1.sample() == s2.sample());
}

TEST_CASE("small instance converges to the oracle steady state") {
  const OracleInstance o = oracle_small_instance();
  const NumberDistribution ref = steady_state(make_birth_death(o.model, o.x, o.n_max));
  RateOptions opt;
  opt.excitations = o.x;
  RateSimulator sim = make_rate_simulator(o.model, 5, 0, opt);
  // event-weighted occupation times
  std::vector<double> occupancy(o.n_max + 1, 0.0);
  for (int i = 0; i < 1000000; ++i) {
    const std::int64_t n = sim.state().n;
    const auto step = sim.step_event();
    occupancy[static_cast<std::size_t>(n)] += step.dt;
  }
  NumberDistribution h{occupancy};
  h.normalize();
  CHECK(total_variation(h, ref) < 0.03);
  CHECK(sim.state().excitations() == o.x);
}

TEST_CASE("small-instance g2 estimate agrees with the oracle correlator") {
  const OracleInstance o = oracle_small_instance();
  const BirthDeathGenerator gen = make_birth_death(o.model, o.x, o.n_max);
  const NumberDistribution ss = steady_state(gen);
  RateOptions opt;
  opt.excitations = o.x;
  std::vector<std::vector<double>> series;
  for (std::uint64_t i = 0; i < 20; ++i)
    series.push_back(run_rate_trajectory(o.model, RunWindow{5000.0, 100.0, 0.5}, 17, i, opt).column("n"));
  const CorrelationEstimate est = g2_estimate(series, 0.5, 20.0);
  const CorrelationEstimate exact = g2_correlator(gen, ss, est.tau);
  int outside = 0;
  for (std::size_t k = 0; k < est.tau.size(); ++k)
    if (std::abs(est.values[k].real() - exact.values[k].real()) > 3.0 * est.std_error[k]) ++outside;
  CHECK(outside <= 2);
}

TEST_CASE("tau-leaping reproduces the small-instance statistics") {
  const OracleInstance o = oracle_small_instance();
  const NumberDistribution ref = steady_state(make_birth_death(o.model, o.x, o.n_max));
  RateOptions opt;
  opt.excitations = o.x;
  opt.tau_leap = true;
  std::vector<double> values;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto n = run_rate_trajectory(o.model, RunWindow{5000.0, 100.0, 1.0}, 8, i, opt).column("n");
    values.insert(values.end(), n.begin(), n.end());
  }
  CHECK(compare_histogram(values, ref).tv_integer < 0.05);
}
