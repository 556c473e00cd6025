#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pcl/estimators.hpp"

using namespace pcl;

namespace {

std::vector<double> ar1(std::mt19937_64& rng, std::size_t len, double mean, double phi, double sd) {
  std::normal_distribution<double> z(0.0, sd * std::sqrt(1.0 - phi * phi));
  std::normal_distribution<double> z0(0.0, sd);
  std::vector<double> x(len);
  double v = z0(rng);
  for (auto& e : x) {
    e = mean + v;
    v = phi * v + z(rng);
  }
  return x;
}

CorrelationEstimate synthetic(std::function<double(double)> f, double hi, std::size_t points, double noise,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, noise > 0.0 ? noise : 1.0);
  CorrelationEstimate e;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    e.tau.push_back(t);
    e.values.emplace_back(f(t) + (noise > 0.0 ? z(rng) : 0.0), 0.0);
    e.std_error.push_back(noise);
  }
  return e;
}

}  // namespace

TEST_CASE("FFT lag sums agree with direct summation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> x(1000);
  std::vector<cplx> c(777);
  for (auto& v : x) v = 5.0 + z(rng);
  for (auto& v : c) v = cplx(z(rng), z(rng));
  const auto a = lag_products(x, 300, LagMethod::fft);
  const auto b = lag_products(x, 300, LagMethod::direct);
  for (std::size_t k = 0; k <= 300; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-10));
  const auto ca = lag_products(c, 500, LagMethod::fft);
  const auto cb = lag_products(c, 500, LagMethod::direct);
  for (std::size_t k = 0; k <= 500; ++k) CHECK(std::abs(ca[k] - cb[k]) < 1e-9 * (1.0 + std::abs(cb[k])));
  CHECK_THROWS(lag_products(x, 1000));
}

TEST_CASE("constant series has g2 = 1") {
  const std::vector<std::vector<double>> s{std::vector<double>(500, 7.0), std::vector<double>(500, 7.0)};
  const CorrelationEstimate g = g2_estimate(s, 1.0, 100.0);
  for (const cplx& v : g.values) CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("g2 of an AR(1) process follows the geometric decay") {
  std::mt19937_64 rng(11);
  std::vector<std::vector<double>> s;
  const double mean = 100.0, sd = 30.0, phi = std::exp(-1.0 / 20.0);
  for (int i = 0; i < 200; ++i) s.push_back(ar1(rng, 4000, mean, phi, sd));
  const CorrelationEstimate g = g2_estimate(s, 1.0, 200.0, 100.0);
  CHECK(g.n_samples == 200);
  int outside = 0;
  for (std::size_t k = 0; k < g.tau.size(); k += 10) {
    const double expect = 1.0 + (sd * sd / (mean * mean)) * std::pow(phi, static_cast<double>(k));
    if (std::abs(g.values[k].real() - expect) > 3.0 * g.std_error[k]) ++outside;
  }
  CHECK(outside <= 2);
  // decorrelated tail within 3 stderr of one
  CHECK(std::abs(g.values.back().real() - 1.0) < 3.0 * g.std_error.back() + 1e-4);
  CHECK_THROWS_AS(g2_estimate(s, 1.0, 5000.0), EstimationError);
}

TEST_CASE("single trajectory is blocked for error bars") {
  std::mt19937_64 rng(5);
  const std::vector<std::vector<double>> s{ar1(rng, 8000, 50.0, 0.5, 5.0)};
  const CorrelationEstimate g = g2_estimate(s, 1.0, 50.0, 0.0, 8);
  CHECK(g.n_samples == 8);
  CHECK(g.std_error[3] > 0.0);
}

TEST_CASE("blocking error shrinks as one over root n") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  std::vector<double> ms, ses;
  for (std::size_t m : {4u, 40u, 400u, 4000u}) {
    std::vector<std::vector<double>> s(m, std::vector<double>(256));
    for (auto& row : s)
      for (auto& v : row) v = 10.0 + z(rng);
    const CorrelationEstimate g = g2_estimate(s, 1.0, 8.0);
    double se = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) se += g.std_error[k];
    ms.push_back(std::log(static_cast<double>(m)));
    ses.push_back(std::log(se / 8.0));
  }
  const double slope = (ses.back() - ses.front()) / (ms.back() - ms.front());
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("rotating phasor has unit coherence") {
  const double w = 0.013;
  std::vector<cplx> a(2000);
  for (std::size_t t = 0; t < a.size(); ++t) a[t] = std::polar(3.0, w * static_cast<double>(t));
  const std::vector<std::vector<cplx>> s{a, a};
  const CorrelationEstimate g = g1_estimate(s, 1.0, 300.0);
  for (std::size_t k = 0; k < g.tau.size(); ++k) {
    CHECK(std::abs(g.values[k]) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::arg(g.values[k]) == doctest::Approx(std::remainder(w * static_cast<double>(k), 2.0 * M_PI)).epsilon(1e-8));
  }
}

TEST_CASE("reversed series gives the conjugate g1") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  std::vector<cplx> a(3000);
  cplx v(1.0, 0.0);
  for (auto& e : a) {
    v = 0.95 * v + cplx(z(rng), z(rng));
    e = v;
  }
  std::vector<cplx> r(a.rbegin(), a.rend());
  const std::vector<std::vector<cplx>> fwd{a};
  const std::vector<std::vector<cplx>> rev{r};
  const CorrelationEstimate f = g1_estimate(fwd, 1.0, 100.0, 0.0, 1);
  const CorrelationEstimate b = g1_estimate(rev, 1.0, 100.0, 0.0, 1);
  for (std::size_t k = 0; k < f.tau.size(); ++k) CHECK(std::abs(b.values[k] - std::conj(f.values[k])) < 1e-10);
}

TEST_CASE("accumulators merge associatively") {
  std::mt19937_64 rng(21);
  std::vector<std::vector<double>> s;
  for (int i = 0; i < 6; ++i) s.push_back(ar1(rng, 600, 20.0, 0.8, 4.0));
  G2Accumulator all(40), left(40), right(40);
  for (int i = 0; i < 6; ++i) {
    all.add(s[i]);
    (i < 2 ? left : right).add(s[i]);
  }
  left.merge(right);
  const CorrelationEstimate a = all.finish(1.0);
  const CorrelationEstimate b = left.finish(1.0);
  for (std::size_t k = 0; k < a.tau.size(); ++k) {
    CHECK(a.values[k].real() == doctest::Approx(b.values[k].real()).epsilon(1e-12));
    CHECK(a.std_error[k] == doctest::Approx(b.std_error[k]).epsilon(1e-9));
  }
  G2Accumulator other(10);
  other.add(s[0]);
  CHECK_THROWS_AS(all.merge(other), EstimationError);
}

TEST_CASE("exponential fit recovers the rate") {
  const CorrelationEstimate e = synthetic([](double t) { return std::exp(-t / 5.0); }, 10.0, 101, 0.01, 1);
  const FitResult f = fit_decay(e, DecayModel::exponential, {0.0, 10.0});
  CHECK(f.coefficient == doctest::Approx(0.2).epsilon(0.05));
  CHECK(f.tau_c == doctest::Approx(5.0).epsilon(0.05));
  CHECK(f.coefficient_error > 0.0);
}

TEST_CASE("gaussian fit recovers the characteristic time") {
  const CorrelationEstimate e = synthetic([](double t) { return std::exp(-t * t / 50.0); }, 10.0, 101, 0.0, 1);
  const FitResult f = fit_decay(e, DecayModel::gaussian, {0.0, 10.0});
  CHECK(f.tau_c == doctest::Approx(std::sqrt(50.0)).epsilon(0.02));
  const FitResult x = fit_decay(e, DecayModel::exponential, {0.0, 10.0});
  CHECK(f.residual < x.residual);
}

TEST_CASE("whittaker fits") {
  const double g2r = 0.01, eta2 = 0.6;
  const CorrelationEstimate st = synthetic(
      [&](double t) { return std::exp(0.25 * eta2 * (std::expm1(-g2r * t) - g2r * t)); }, 500.0, 201, 0.0, 1);
  const FitResult f = fit_decay(st, DecayModel::whittaker_st, {0.0, 500.0}, g2r);
  CHECK(f.coefficient == doctest::Approx(eta2).epsilon(1e-6));
  CHECK_THROWS_AS(fit_decay(st, DecayModel::whittaker_st, {0.0, 500.0}), EstimationError);
}

TEST_CASE("fit window shrinks at non-positive values") {
  CorrelationEstimate e = synthetic([](double t) { return std::exp(-t); }, 10.0, 11, 0.0, 1);
  e.values[3] = cplx(-0.1, 0.0);
  CHECK_THROWS_AS(fit_decay(e, DecayModel::exponential, {0.0, 10.0}), EstimationError);
  e.values[3] = std::exp(-3.0);
  e.values[7] = cplx(0.0, 0.0);
  const FitResult f = fit_decay(e, DecayModel::exponential, {0.0, 10.0});
  CHECK(f.points == 7);
  CHECK(f.window_end == doctest::Approx(7.0));
}

TEST_CASE("variance decomposition") {
  const std::vector<MomentPair> same(5, MomentPair{100.0, 100.0});
  const VarianceDecomposition d = variance_decomposition(same);
  CHECK(d.inter == 0.0);
  CHECK(d.intra == 100.0);
  const std::vector<MomentPair> mixed{{1.0, 2.0}, {3.0, 4.0}, {8.0, 0.5}};
  const VarianceDecomposition m = variance_decomposition(mixed);
  CHECK(m.total == doctest::Approx(m.intra + m.inter).epsilon(1e-12));
  CHECK(m.inter == doctest::Approx(26.0 / 3.0));
  CHECK_THROWS_AS(variance_decomposition(std::vector<MomentPair>{{1.0, 1.0}}), EstimationError);
}

TEST_CASE("histograms") {
  const std::vector<double> delta(100, 4.0);
  const NumberDistribution h = histogram_pn(delta);
  CHECK(h.probabilities.size() == 5);
  CHECK(h.probabilities[4] == 1.0);

  NumberDistribution ref;
  for (int n = 0; n < 60; ++n) ref.probabilities.push_back(std::pow(0.9, n));
  ref.normalize();
  std::mt19937_64 rng(2);
  std::discrete_distribution<int> draw(ref.probabilities.begin(), ref.probabilities.end());
  std::vector<double> values(200000);
  for (auto& v : values) v = draw(rng);
  const HistogramComparison c = compare_histogram(values, ref, 10);
  CHECK(c.tv_integer < 0.01);
  CHECK(c.tv_binned < 0.01);
  CHECK(c.tv_binned <= c.tv_integer + 1e-12);

  std::vector<double> shifted = values;
  for (auto& v : shifted) v += 5.0;
  CHECK(compare_histogram(shifted, ref, 10).tv_binned > 0.2);
}
