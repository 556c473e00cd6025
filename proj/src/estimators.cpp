#include "pcl/estimators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>

namespace pcl {

std::vector<double> CorrelationEstimate::magnitudes() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const cplx& v : values) out.push_back(std::abs(v));
  return out;
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * n))), size(n) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  T* data;
  std::size_t size;
};

struct FftwPlan {
  fftw_plan plan = nullptr;
  explicit FftwPlan(fftw_plan p) : plan(p) {
    if (!plan) throw std::runtime_error("FFTW plan creation failed");
  }
  ~FftwPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  void execute() const { fftw_execute(plan); }
};

std::size_t padded_length(std::size_t n) {
  std::size_t len = 1;
  while (len < n) len <<= 1;
  return len;
}

void check_lag(std::size_t n, std::size_t max_lag) {
  if (max_lag >= n) {
    std::ostringstream os;
    os << "maximum lag " << max_lag << " needs a series longer than " << n << " samples";
    throw EstimationError(os.str());
  }
}

}  // namespace

std::vector<double> lag_products(std::span<const double> x, std::size_t max_lag, LagMethod method) {
  const std::size_t n = x.size();
  check_lag(n, max_lag);
  std::vector<double> out(max_lag + 1, 0.0);
  if (method == LagMethod::direct) {
    for (std::size_t k = 0; k <= max_lag; ++k) {
      double acc = 0.0;
      for (std::size_t t = 0; t + k < n; ++t) acc += x[t] * x[t + k];
      out[k] = acc;
    }
    return out;
  }
  const std::size_t len = padded_length(n + max_lag);
  FftwBuffer<double> real(len);
  FftwBuffer<fftw_complex> spec(len / 2 + 1);
  std::unique_ptr<FftwPlan> forward, backward;
  {
    std::lock_guard lock(planner_mutex());
    forward = std::make_unique<FftwPlan>(fftw_plan_dft_r2c_1d(static_cast<int>(len), real.data, spec.data, FFTW_ESTIMATE));
    backward = std::make_unique<FftwPlan>(fftw_plan_dft_c2r_1d(static_cast<int>(len), spec.data, real.data, FFTW_ESTIMATE));
  }
  std::fill(real.data, real.data + len, 0.0);
  std::copy(x.begin(), x.end(), real.data);
  forward->execute();
  for (std::size_t i = 0; i < spec.size; ++i) {
    spec.data[i][0] = spec.data[i][0] * spec.data[i][0] + spec.data[i][1] * spec.data[i][1];
    spec.data[i][1] = 0.0;
  }
  backward->execute();
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = real.data[k] / static_cast<double>(len);
  return out;
}

std::vector<cplx> lag_products(std::span<const cplx> x, std::size_t max_lag, LagMethod method) {
  const std::size_t n = x.size();
  check_lag(n, max_lag);
  std::vector<cplx> out(max_lag + 1, 0.0);
  if (method == LagMethod::direct) {
    for (std::size_t k = 0; k <= max_lag; ++k) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t + k < n; ++t) acc += std::conj(x[t]) * x[t + k];
      out[k] = acc;
    }
    return out;
  }
  const std::size_t len = padded_length(n + max_lag);
  FftwBuffer<fftw_complex> buf(len);
  std::unique_ptr<FftwPlan> forward, backward;
  {
    std::lock_guard lock(planner_mutex());
    forward = std::make_unique<FftwPlan>(
        fftw_plan_dft_1d(static_cast<int>(len), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE));
    backward = std::make_unique<FftwPlan>(
        fftw_plan_dft_1d(static_cast<int>(len), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE));
  }
  for (std::size_t i = 0; i < len; ++i) {
    buf.data[i][0] = i < n ? x[i].real() : 0.0;
    buf.data[i][1] = i < n ? x[i].imag() : 0.0;
  }
  forward->execute();
  for (std::size_t i = 0; i < len; ++i) {
    buf.data[i][0] = buf.data[i][0] * buf.data[i][0] + buf.data[i][1] * buf.data[i][1];
    buf.data[i][1] = 0.0;
  }
  backward->execute();
  for (std::size_t k = 0; k <= max_lag; ++k)
    out[k] = cplx(buf.data[k][0], buf.data[k][1]) / static_cast<double>(len);
  return out;
}

void G2Accumulator::add(std::span<const double> n, LagMethod method) {
  const std::size_t len = n.size();
  const std::size_t lags = max_lag_ + 1;
  const std::vector<double> s = lag_products(n, max_lag_, method);
  if (pairs_.empty()) {
    pairs_.assign(lags, 0.0);
    head_.assign(lags, 0.0);
    tail_.assign(lags, 0.0);
    terms_.assign(lags, 0.0);
    ratio_sum_.assign(lags, 0.0);
    ratio_sq_.assign(lags, 0.0);
  }
  double total = 0.0;
  for (double v : n) total += v;
  double dropped_end = 0.0;
  double dropped_start = 0.0;
  for (std::size_t k = 0; k < lags; ++k) {
    if (k > 0) {
      dropped_end += n[len - k];
      dropped_start += n[k - 1];
    }
    const double count = static_cast<double>(len - k);
    pairs_[k] += s[k];
    head_[k] += total - dropped_end;
    tail_[k] += total - dropped_start;
    terms_[k] += count;
    const double r = s[k] / count;
    ratio_sum_[k] += r;
    ratio_sq_[k] += r * r;
  }
  ++count_;
}

void G2Accumulator::merge(const G2Accumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.max_lag_ != max_lag_) throw EstimationError("cannot merge g2 accumulators with different lag ranges");
  for (std::size_t k = 0; k <= max_lag_; ++k) {
    pairs_[k] += other.pairs_[k];
    head_[k] += other.head_[k];
    tail_[k] += other.tail_[k];
    terms_[k] += other.terms_[k];
    ratio_sum_[k] += other.ratio_sum_[k];
    ratio_sq_[k] += other.ratio_sq_[k];
  }
  count_ += other.count_;
}

CorrelationEstimate G2Accumulator::finish(double dt) const {
  if (count_ == 0) throw EstimationError("no data accumulated");
  CorrelationEstimate est;
  est.n_samples = static_cast<std::int64_t>(count_);
  const double m = static_cast<double>(count_);
  for (std::size_t k = 0; k <= max_lag_; ++k) {
    const double norm = (head_[k] / terms_[k]) * (tail_[k] / terms_[k]);
    est.tau.push_back(dt * static_cast<double>(k));
    est.values.emplace_back(pairs_[k] / terms_[k] / norm, 0.0);
    double se = std::numeric_limits<double>::quiet_NaN();
    if (count_ > 1) {
      const double var = std::max(0.0, (ratio_sq_[k] - ratio_sum_[k] * ratio_sum_[k] / m) / (m - 1.0));
      se = std::sqrt(var / m) / norm;
    }
    est.std_error.push_back(se);
  }
  return est;
}

void G1Accumulator::add(std::span<const cplx> alpha, LagMethod method) {
  const std::size_t len = alpha.size();
  const std::size_t lags = max_lag_ + 1;
  const std::vector<cplx> s = lag_products(alpha, max_lag_, method);
  if (pairs_.empty()) {
    pairs_.assign(lags, 0.0);
    terms_.assign(lags, 0.0);
    ratio_sum_.assign(lags, 0.0);
    ratio_sq_.assign(lags, 0.0);
  }
  for (const cplx& a : alpha) intensity_ += std::norm(a);
  points_ += static_cast<double>(len);
  for (std::size_t k = 0; k < lags; ++k) {
    const double count = static_cast<double>(len - k);
    pairs_[k] += s[k];
    terms_[k] += count;
    const cplx r = s[k] / count;
    ratio_sum_[k] += r;
    ratio_sq_[k] += std::norm(r);
  }
  ++count_;
}

void G1Accumulator::merge(const G1Accumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.max_lag_ != max_lag_) throw EstimationError("cannot merge g1 accumulators with different lag ranges");
  for (std::size_t k = 0; k <= max_lag_; ++k) {
    pairs_[k] += other.pairs_[k];
    terms_[k] += other.terms_[k];
    ratio_sum_[k] += other.ratio_sum_[k];
    ratio_sq_[k] += other.ratio_sq_[k];
  }
  intensity_ += other.intensity_;
  points_ += other.points_;
  count_ += other.count_;
}

CorrelationEstimate G1Accumulator::finish(double dt) const {
  if (count_ == 0) throw EstimationError("no data accumulated");
  if (!(intensity_ > 0.0)) throw EstimationError("field has zero intensity");
  CorrelationEstimate est;
  est.n_samples = static_cast<std::int64_t>(count_);
  const double m = static_cast<double>(count_);
  const double norm = intensity_ / points_;
  for (std::size_t k = 0; k <= max_lag_; ++k) {
    est.tau.push_back(dt * static_cast<double>(k));
    est.values.push_back(pairs_[k] / terms_[k] / norm);
    double se = std::numeric_limits<double>::quiet_NaN();
    if (count_ > 1) {
      const double var = std::max(0.0, (ratio_sq_[k] - std::norm(ratio_sum_[k]) / m) / (m - 1.0));
      se = std::sqrt(var / m) / norm;
    }
    est.std_error.push_back(se);
  }
  return est;
}

namespace {

template <class T>
std::vector<std::span<const T>> segments(std::span<const std::vector<T>> series, double dt, double burn_in,
                                         std::size_t max_lag, std::size_t blocks) {
  if (series.empty()) throw EstimationError("no trajectories supplied");
  const auto skip = static_cast<std::size_t>(std::ceil(burn_in / dt - 1e-9));
  std::vector<std::span<const T>> out;
  for (const auto& s : series) {
    if (s.size() <= skip + max_lag) {
      std::ostringstream os;
      os << "lag window " << max_lag * dt << " exceeds the stationary window of " << (s.size() - std::min(s.size(), skip)) * dt;
      throw EstimationError(os.str());
    }
    out.emplace_back(s.data() + skip, s.size() - skip);
  }
  if (out.size() == 1 && blocks > 1) {
    const std::span<const T> whole = out.front();
    const std::size_t len = whole.size() / blocks;
    if (len <= max_lag) throw EstimationError("single trajectory too short to block for error bars");
    out.clear();
    for (std::size_t b = 0; b < blocks; ++b) out.push_back(whole.subspan(b * len, len));
  }
  return out;
}

}  // namespace

CorrelationEstimate g2_estimate(std::span<const std::vector<double>> series, double dt, double max_tau, double burn_in,
                                std::size_t blocks) {
  const auto max_lag = static_cast<std::size_t>(std::llround(max_tau / dt));
  G2Accumulator acc(max_lag);
  for (const auto& seg : segments(series, dt, burn_in, max_lag, blocks)) acc.add(seg);
  return acc.finish(dt);
}

CorrelationEstimate g1_estimate(std::span<const std::vector<cplx>> series, double dt, double max_tau, double burn_in,
                                std::size_t blocks) {
  const auto max_lag = static_cast<std::size_t>(std::llround(max_tau / dt));
  G1Accumulator acc(max_lag);
  for (const auto& seg : segments(series, dt, burn_in, max_lag, blocks)) acc.add(seg);
  return acc.finish(dt);
}

std::string to_string(DecayModel m) {
  switch (m) {
    case DecayModel::exponential: return "exponential";
    case DecayModel::gaussian: return "gaussian";
    case DecayModel::whittaker_st: return "whittaker_st";
    case DecayModel::whittaker_henry: return "whittaker_henry";
  }
  return "unknown";
}

FitResult fit_decay(const CorrelationEstimate& est, DecayModel model, FitWindow window, double gamma2) {
  if ((model == DecayModel::whittaker_st || model == DecayModel::whittaker_henry) && !(gamma2 > 0.0))
    throw EstimationError("whittaker fits need gamma2 > 0");
  const bool real_valued = std::all_of(est.values.begin(), est.values.end(), [](const cplx& v) { return v.imag() == 0.0; });
  auto basis = [&](double tau) {
    const double x = gamma2 * tau;
    switch (model) {
      case DecayModel::exponential: return -tau;
      case DecayModel::gaussian: return -tau * tau;
      case DecayModel::whittaker_st: return 0.25 * (std::expm1(-x) - x);
      case DecayModel::whittaker_henry: return -(std::expm1(-x) + x) / (gamma2 * gamma2);
    }
    return 0.0;
  };

  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs, ys, ws;
  FitResult res;
  res.model = model;
  res.window_end = window.tau_max;
  for (std::size_t i = 0; i < est.tau.size(); ++i) {
    const double tau = est.tau[i];
    if (tau < window.tau_min || tau > window.tau_max) continue;
    const double v = real_valued ? est.values[i].real() : std::abs(est.values[i]);
    if (!(v > 0.0) || !std::isfinite(v)) {
      res.window_end = tau;
      break;
    }
    const double se = i < est.std_error.size() ? est.std_error[i] : 0.0;
    const double w = (se > 0.0 && std::isfinite(se)) ? (v / se) * (v / se) : 1.0;
    xs.push_back(basis(tau));
    ys.push_back(std::log(v));
    ws.push_back(w);
  }
  if (xs.size() < 5) {
    std::ostringstream os;
    os << to_string(model) << " fit has only " << xs.size() << " usable points in [" << window.tau_min << ", "
       << res.window_end << "]";
    throw EstimationError(os.str());
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
    sxx += ws[i] * xs[i] * xs[i];
    sxy += ws[i] * xs[i] * ys[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw EstimationError("degenerate fit design");
  const double b = (sw * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / sw;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - a - b * xs[i];
    chi2 += ws[i] * r * r;
  }
  const double dof = static_cast<double>(xs.size()) - 2.0;
  res.residual = chi2 / dof;
  res.coefficient = b;
  res.coefficient_error = std::sqrt(res.residual * sw / det);
  res.intercept = a;
  res.points = xs.size();
  switch (model) {
    case DecayModel::exponential:
      res.tau_c = 1.0 / b;
      res.tau_c_error = res.coefficient_error / (b * b);
      break;
    case DecayModel::gaussian:
      res.tau_c = 1.0 / std::sqrt(b);
      res.tau_c_error = 0.5 * res.coefficient_error * std::pow(b, -1.5);
      break;
    case DecayModel::whittaker_st:
      res.tau_c = 4.0 / (b * gamma2);
      res.tau_c_error = res.tau_c * res.coefficient_error / std::abs(b);
      break;
    case DecayModel::whittaker_henry:
      res.tau_c = std::sqrt(2.0 / b);
      res.tau_c_error = 0.5 * res.tau_c * res.coefficient_error / std::abs(b);
      break;
  }
  return res;
}

VarianceDecomposition variance_decomposition(std::span<const MomentPair> ensemble) {
  if (ensemble.size() < 2) throw EstimationError("variance decomposition needs at least two trajectories");
  const double m = static_cast<double>(ensemble.size());
  double mean = 0.0;
  double intra = 0.0;
  for (const auto& e : ensemble) {
    mean += e.mean;
    intra += e.variance;
  }
  mean /= m;
  double inter = 0.0;
  for (const auto& e : ensemble) inter += (e.mean - mean) * (e.mean - mean);
  VarianceDecomposition out;
  out.intra = intra / m;
  out.inter = inter / m;
  out.total = out.intra + out.inter;
  return out;
}

NumberDistribution histogram_pn(std::span<const double> values) {
  if (values.empty()) throw EstimationError("empty series");
  NumberDistribution d;
  for (double v : values) {
    const auto n = static_cast<std::size_t>(std::max<long long>(0, std::llround(v)));
    if (d.probabilities.size() <= n) d.probabilities.resize(n + 1, 0.0);
    d.probabilities[n] += 1.0;
  }
  d.normalize();
  return d;
}

HistogramComparison compare_histogram(std::span<const double> values, const NumberDistribution& reference,
                                      std::size_t bins) {
  HistogramComparison out;
  out.histogram = histogram_pn(values);
  out.tv_integer = total_variation(out.histogram, reference);

  out.edges.push_back(0);
  double cdf = 0.0;
  std::size_t next = 1;
  for (int n = 0; n <= reference.n_max() && next < bins; ++n) {
    cdf += reference.probabilities[static_cast<std::size_t>(n)];
    if (cdf >= static_cast<double>(next) / static_cast<double>(bins)) {
      if (n + 1 > out.edges.back()) out.edges.push_back(n + 1);
      while (next < bins && cdf >= static_cast<double>(next) / static_cast<double>(bins)) ++next;
    }
  }
  auto bin_mass = [&](const NumberDistribution& d, std::size_t b) {
    const int from = out.edges[b];
    const int to = b + 1 < out.edges.size() ? out.edges[b + 1] : std::numeric_limits<int>::max();
    double acc = 0.0;
    for (int n = from; n < to && n <= d.n_max(); ++n) acc += d.probabilities[static_cast<std::size_t>(n)];
    return acc;
  };
  double tv = 0.0;
  for (std::size_t b = 0; b < out.edges.size(); ++b) tv += std::abs(bin_mass(out.histogram, b) - bin_mass(reference, b));
  out.tv_binned = 0.5 * tv;
  return out;
}

}  // namespace pcl
