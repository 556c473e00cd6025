#include "pcl/qt/fock_state.hpp"

#include <cmath>
#include <stdexcept>

namespace pcl {

FockVector::FockVector(int n_max) : amp_(Eigen::VectorXcd::Zero(n_max + 1)) {
  if (n_max < 1) throw std::invalid_argument("Fock truncation must be at least 1");
  amp_[0] = 1.0;
}

FockVector FockVector::number_state(int n, int n_max) {
  if (n < 0 || n > n_max) throw std::invalid_argument("number state outside truncation");
  FockVector v(n_max);
  v.amp_[0] = 0.0;
  v.amp_[n] = 1.0;
  v.lo_ = v.hi_ = n;
  return v;
}

FockVector FockVector::coherent(cplx alpha, int n_max) {
  FockVector v(n_max);
  const double mag2 = std::norm(alpha);
  // log-space recursion keeps large |alpha| finite
  const double log_mag = mag2 > 0.0 ? std::log(std::abs(alpha)) : 0.0;
  const double phase = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    if (mag2 == 0.0) {
      v.amp_[n] = n == 0 ? 1.0 : 0.0;
      continue;
    }
    const double log_c = -0.5 * mag2 + n * log_mag - 0.5 * std::lgamma(n + 1.0);
    v.amp_[n] = std::polar(std::exp(log_c), n * phase);
  }
  v.refresh_window();
  v.normalize();
  return v;
}

void FockVector::assign(const Eigen::VectorXcd& amp) {
  amp_ = amp;
  refresh_window();
}

void FockVector::refresh_window() {
  lo_ = 0;
  hi_ = n_max();
  while (lo_ < hi_ && amp_[lo_] == 0.0) ++lo_;
  while (hi_ > lo_ && amp_[hi_] == 0.0) --hi_;
}

double FockVector::norm_squared() const { return amp_.segment(lo_, hi_ - lo_ + 1).squaredNorm(); }

void FockVector::normalize() {
  const double nrm = std::sqrt(norm_squared());
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::runtime_error("Fock state lost its norm");
  amp_.segment(lo_, hi_ - lo_ + 1) /= nrm;
}

double FockVector::mean_n() const {
  double acc = 0.0;
  for (int n = lo_; n <= hi_; ++n) acc += n * std::norm(amp_[n]);
  return acc;
}

double FockVector::variance_n() const {
  const double m = mean_n();
  double acc = 0.0;
  for (int n = lo_; n <= hi_; ++n) acc += (n - m) * (n - m) * std::norm(amp_[n]);
  return acc;
}

cplx FockVector::expect_a() const {
  cplx acc = 0.0;
  for (int n = std::max(lo_, 1); n <= hi_; ++n) acc += std::sqrt(static_cast<double>(n)) * std::conj(amp_[n - 1]) * amp_[n];
  return acc;
}

double FockVector::tail_probability(int from) const {
  double acc = 0.0;
  for (int n = std::max(from, lo_); n <= hi_; ++n) acc += std::norm(amp_[n]);
  return acc;
}

void FockVector::ensure_capacity(int n) {
  if (n > n_max()) resize(std::max(n, n_max() + n_max() / 2));
}

void FockVector::resize(int n_max) {
  if (n_max < hi_) throw std::invalid_argument("cannot shrink Fock truncation below occupied levels");
  Eigen::VectorXcd next = Eigen::VectorXcd::Zero(n_max + 1);
  next.head(amp_.size()) = amp_;
  amp_ = std::move(next);
}

void FockVector::apply_a() {
  if (hi_ == 0) throw std::runtime_error("annihilation applied to the vacuum");
  for (int n = std::max(lo_, 1); n <= hi_; ++n) amp_[n - 1] = std::sqrt(static_cast<double>(n)) * amp_[n];
  amp_[hi_] = 0.0;
  lo_ = std::max(lo_ - 1, 0);
  --hi_;
}

void FockVector::apply_adag() {
  ensure_capacity(hi_ + 1);
  for (int n = hi_; n >= lo_; --n) amp_[n + 1] = std::sqrt(static_cast<double>(n + 1)) * amp_[n];
  amp_[lo_] = 0.0;
  ++lo_;
  ++hi_;
}

void FockVector::heterodyne_step(double kappa, double dt, cplx dz) {
  const int lo = std::max(lo_ - 1, 0);
  const cplx a_mean_conj = std::conj(expect_a());
  const cplx coeff = kappa * a_mean_conj * dt + std::sqrt(kappa) * std::conj(dz);
  Eigen::VectorXcd next = amp_.segment(lo, hi_ - lo + 1);
  for (int n = lo; n <= hi_; ++n) {
    cplx v = amp_[n] * (1.0 - 0.5 * kappa * n * dt);
    if (n + 1 <= hi_) v += coeff * std::sqrt(static_cast<double>(n + 1)) * amp_[n + 1];
    next[n - lo] = v;
  }
  amp_.segment(lo, hi_ - lo + 1) = next;
  lo_ = lo;
  normalize();
}

void FockVector::trim(double edge, double tail_limit) {
  while (lo_ < hi_ && std::norm(amp_[lo_]) < edge) amp_[lo_++] = 0.0;
  while (hi_ > lo_ && std::norm(amp_[hi_]) < edge) amp_[hi_--] = 0.0;
  const int from = static_cast<int>(0.9 * n_max());
  if (tail_probability(from) > tail_limit) resize(n_max() + n_max() / 2);
}

nlohmann::json FockVector::to_json() const {
  nlohmann::json j;
  j["n_max"] = n_max();
  j["lo"] = lo_;
  std::vector<double> flat;
  flat.reserve(2 * static_cast<std::size_t>(hi_ - lo_ + 1));
  for (int n = lo_; n <= hi_; ++n) {
    flat.push_back(amp_[n].real());
    flat.push_back(amp_[n].imag());
  }
  j["amp"] = flat;
  return j;
}

FockVector FockVector::from_json(const nlohmann::json& j) {
  FockVector v(j.at("n_max").get<int>());
  const int lo = j.at("lo").get<int>();
  const auto flat = j.at("amp").get<std::vector<double>>();
  v.amp_.setZero();
  const int count = static_cast<int>(flat.size() / 2);
  for (int k = 0; k < count; ++k) v.amp_[lo + k] = cplx(flat[2 * k], flat[2 * k + 1]);
  v.lo_ = lo;
  v.hi_ = lo + count - 1;
  return v;
}

}  // namespace pcl
