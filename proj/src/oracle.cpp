#include "pcl/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcl {

Eigen::MatrixXd BirthDeathGenerator::matrix() const {
  const auto n = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double up = up_rates[static_cast<std::size_t>(i)];
    const double down = down_rates[static_cast<std::size_t>(i)];
    l(i, i) = -(up + down);
    if (i + 1 < n) l(i + 1, i) = up;
    if (i > 0) l(i - 1, i) = down;
  }
  return l;
}

double BirthDeathGenerator::column_sum_error() const {
  const Eigen::MatrixXd l = matrix();
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  return l.colwise().sum().cwiseAbs().maxCoeff() / scale;
}

void BirthDeathGenerator::validate() const {
  if (up_rates.empty() || up_rates.size() != down_rates.size())
    throw std::invalid_argument("birth-death generator needs matching, non-empty rate arrays");
  for (std::size_t n = 0; n < up_rates.size(); ++n) {
    if (!(up_rates[n] >= 0.0) || !(down_rates[n] >= 0.0)) {
      std::ostringstream os;
      os << "negative or NaN rate at n = " << n;
      throw std::invalid_argument(os.str());
    }
  }
  if (down_rates.front() != 0.0) throw std::invalid_argument("down rate out of n = 0");
  if (up_rates.back() != 0.0) throw std::invalid_argument("up rate out of n = n_max");
}

BirthDeathGenerator CoherenceGenerator::populations() const {
  BirthDeathGenerator g;
  g.up_rates = gain;
  g.down_rates.resize(dimension());
  for (std::size_t n = 0; n < dimension(); ++n) g.down_rates[n] = absorption[n] + loss[n];
  return g;
}

Eigen::MatrixXcd CoherenceGenerator::block(int k) const {
  const auto dim = static_cast<int>(dimension());
  if (k < 0 || k >= dim) throw std::invalid_argument("coherence block index out of range");
  const int len = dim - k;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(len, len);
  auto at = [](const std::vector<double>& v, int i) { return v[static_cast<std::size_t>(i)]; };
  // x_n = rho_{n+k, n}
  for (int n = 0; n < len; ++n) {
    const int a = n + k;
    const int b = n;
    const double decay = 0.5 * (at(gain, a) + at(gain, b) + at(absorption, a) + at(absorption, b) + at(loss, a) + at(loss, b));
    m(n, n) = std::complex<double>(-decay, -(at(energy, a) - at(energy, b)));
    if (n > 0) m(n, n - 1) = std::sqrt(at(gain, a - 1) * at(gain, b - 1));
    if (n + 1 < len)
      m(n, n + 1) = std::sqrt(at(absorption, a + 1) * at(absorption, b + 1)) + std::sqrt(at(loss, a + 1) * at(loss, b + 1));
  }
  return m;
}

CoherenceGenerator make_coherence_generator(const ModelParams& p, std::int64_t x, int n_max) {
  if (n_max < 1) throw std::invalid_argument("oracle needs n_max >= 1");
  if (x < 0 || x > p.m_tot) throw UnphysicalParameters("excitation number outside [0, M_tot]");
  const auto dim = static_cast<std::size_t>(n_max) + 1;
  CoherenceGenerator g;
  g.gain.assign(dim, 0.0);
  g.absorption.assign(dim, 0.0);
  g.loss.assign(dim, 0.0);
  g.energy.assign(dim, 0.0);
  const double m_tot = static_cast<double>(p.m_tot);
  const double xd = static_cast<double>(x);
  const double frame = p.frame_detuning();
  for (std::size_t i = 0; i < dim; ++i) {
    const double n = static_cast<double>(i);
    const double m_up = std::max(0.0, xd - n);
    if (i + 1 < dim) g.gain[i] = p.b21(n) * m_up * (n + 1.0);
    if (i > 0) {
      const double m_down = std::min(m_tot, m_tot - xd + n);
      g.absorption[i] = p.b12_at(n - 1.0) * m_down * n;
      g.loss[i] = p.kappa * n;
    }
    g.energy[i] = frame * n + 0.5 * p.kerr * n * (n - 1.0);
  }
  return g;
}

BirthDeathGenerator make_birth_death(const ModelParams& p, std::int64_t x, int n_max) {
  return make_coherence_generator(p, x, n_max).populations();
}

namespace {

std::vector<int> reachable(const BirthDeathGenerator& gen, int start) {
  const int dim = static_cast<int>(gen.dimension());
  std::vector<int> seen(static_cast<std::size_t>(dim), 0);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    const auto un = static_cast<std::size_t>(n);
    if (n + 1 < dim && gen.up_rates[un] > 0.0 && !seen[un + 1]) {
      seen[un + 1] = 1;
      stack.push_back(n + 1);
    }
    if (n > 0 && gen.down_rates[un] > 0.0 && !seen[un - 1]) {
      seen[un - 1] = 1;
      stack.push_back(n - 1);
    }
  }
  return seen;
}

// Closed communicating classes, each as [first, last] (contiguous for a birth-death chain).
std::vector<std::pair<int, int>> closed_classes(const BirthDeathGenerator& gen) {
  const int dim = static_cast<int>(gen.dimension());
  std::vector<std::vector<int>> reach;
  for (int i = 0; i < dim; ++i) reach.push_back(reachable(gen, i));
  std::vector<std::pair<int, int>> out;
  std::vector<int> assigned(static_cast<std::size_t>(dim), 0);
  for (int i = 0; i < dim; ++i) {
    if (assigned[static_cast<std::size_t>(i)]) continue;
    bool closed = true;
    int lo = i;
    int hi = i;
    for (int j = 0; j < dim; ++j) {
      if (!reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
      if (reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        lo = std::min(lo, j);
        hi = std::max(hi, j);
        assigned[static_cast<std::size_t>(j)] = 1;
      } else {
        closed = false;
      }
    }
    if (closed) out.emplace_back(lo, hi);
  }
  return out;
}

void check_grid(std::span<const double> tau_grid) {
  if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
  if (tau_grid.front() < 0.0) throw std::invalid_argument("tau grid must start at tau >= 0");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1])) throw std::invalid_argument("tau grid must be strictly ascending");
}

void check_size(const BirthDeathGenerator& gen, const NumberDistribution& dist) {
  if (dist.probabilities.size() != gen.dimension())
    throw std::invalid_argument("distribution and generator dimensions differ");
}

// y(tau_i) = exp(A tau_i) y0 along an ascending grid; the propagator is reused for equal steps.
template <class Visit>
void propagate(const Eigen::MatrixXcd& a, Eigen::VectorXcd y, std::span<const double> tau_grid, Visit visit) {
  Eigen::MatrixXcd step;
  double last = -1.0;
  double t = 0.0;
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    const double dt = tau_grid[i] - t;
    if (dt > 0.0) {
      if (std::abs(dt - last) > 1e-12 * dt) {
        step = (a * dt).exp();
        last = dt;
      }
      y = step * y;
    }
    t = tau_grid[i];
    visit(i, y);
  }
}

CorrelationEstimate empty_estimate(std::span<const double> tau_grid) {
  CorrelationEstimate est;
  est.tau.assign(tau_grid.begin(), tau_grid.end());
  est.values.resize(tau_grid.size());
  est.std_error.assign(tau_grid.size(), 0.0);
  return est;
}

}  // namespace

NumberDistribution steady_state(const BirthDeathGenerator& gen) {
  gen.validate();
  const auto classes = closed_classes(gen);
  if (classes.size() != 1) {
    std::ostringstream os;
    os << "reducible chain with " << classes.size() << " absorbing sets:";
    for (const auto& [lo, hi] : classes) os << " {" << lo << (lo == hi ? "" : ".." + std::to_string(hi)) << "}";
    throw ReducibleChain(os.str());
  }
  const auto [lo, hi] = classes.front();
  const int len = hi - lo + 1;
  NumberDistribution d;
  d.probabilities.assign(gen.dimension(), 0.0);
  if (len == 1) {
    d.probabilities[static_cast<std::size_t>(lo)] = 1.0;
    return d;
  }
  Eigen::MatrixXd a = gen.matrix().block(lo, lo, len, len);
  // Replace the last balance equation with the normalization.
  a.row(len - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(len);
  rhs(len - 1) = 1.0;
  const Eigen::VectorXd p = a.fullPivLu().solve(rhs);
  for (int i = 0; i < len; ++i) d.probabilities[static_cast<std::size_t>(lo + i)] = std::max(0.0, p(i));
  d.normalize();
  return d;
}

CorrelationEstimate g2_correlator(const BirthDeathGenerator& gen, const NumberDistribution& dist,
                                  std::span<const double> tau_grid) {
  check_grid(tau_grid);
  check_size(gen, dist);
  int lo = -1;
  int hi = -1;
  for (int n = 0; n < static_cast<int>(gen.dimension()); ++n) {
    if (dist.probabilities[static_cast<std::size_t>(n)] > 0.0) {
      if (lo < 0) lo = n;
      hi = n;
    }
  }
  if (lo < 0) throw std::invalid_argument("empty distribution");
  const int len = hi - lo + 1;
  // S = P^-1/2 L P^1/2 is symmetric for a birth-death chain in detailed balance.
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(len, len);
  Eigen::VectorXd v(len);
  for (int i = 0; i < len; ++i) {
    const auto n = static_cast<std::size_t>(lo + i);
    s(i, i) = -(gen.up_rates[n] + gen.down_rates[n]);
    if (i + 1 < len) s(i, i + 1) = s(i + 1, i) = std::sqrt(gen.up_rates[n] * gen.down_rates[n + 1]);
    v(i) = static_cast<double>(n) * std::sqrt(dist.probabilities[n]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw ConvergenceError("g2_correlator: eigendecomposition failed");
  const Eigen::VectorXd w = eig.eigenvectors().transpose() * v;
  const double mean = dist.mean();
  CorrelationEstimate est = empty_estimate(tau_grid);
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < len; ++k) acc += w(k) * w(k) * std::exp(std::min(0.0, eig.eigenvalues()(k)) * tau_grid[i]);
    est.values[i] = acc / (mean * mean);
  }
  return est;
}

CorrelationEstimate g2_correlator_lindblad(const CoherenceGenerator& gen, const NumberDistribution& dist,
                                           std::span<const double> tau_grid) {
  check_grid(tau_grid);
  check_size(gen.populations(), dist);
  const auto dim = static_cast<Eigen::Index>(gen.dimension());
  Eigen::VectorXcd y(dim);
  for (Eigen::Index n = 0; n < dim; ++n) y(n) = static_cast<double>(n) * dist.probabilities[static_cast<std::size_t>(n)];
  const double mean = dist.mean();
  CorrelationEstimate est = empty_estimate(tau_grid);
  propagate(gen.block(0), y, tau_grid, [&](std::size_t i, const Eigen::VectorXcd& cur) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n < dim; ++n) acc += static_cast<double>(n) * cur(n);
    est.values[i] = acc.real() / (mean * mean);
  });
  return est;
}

CorrelationEstimate g1_correlator(const CoherenceGenerator& gen, const NumberDistribution& initial,
                                  std::span<const double> tau_grid) {
  check_grid(tau_grid);
  check_size(gen.populations(), initial);
  const auto& p = initial.probabilities;
  const double peak = *std::max_element(p.begin(), p.end());
  if (p.back() > 1e-10 * peak) {
    std::ostringstream os;
    os << "initial populations reach n_max = " << p.size() - 1 << " (P/P_peak = " << p.back() / peak << ")";
    throw TruncationError(os.str());
  }
  const auto dim = static_cast<Eigen::Index>(gen.dimension());

  // <n(tau)> from the population block
  std::vector<double> n_tau(tau_grid.size());
  Eigen::VectorXcd pop(dim);
  for (Eigen::Index n = 0; n < dim; ++n) pop(n) = p[static_cast<std::size_t>(n)];
  propagate(gen.block(0), pop, tau_grid, [&](std::size_t i, const Eigen::VectorXcd& cur) {
    double acc = 0.0;
    for (Eigen::Index n = 0; n < dim; ++n) acc += static_cast<double>(n) * cur(n).real();
    n_tau[i] = acc;
  });

  // x_n = (rho a^dag)_{n+1, n} = P(n+1) sqrt(n+1); <a^dag(0) a(tau)> = sum sqrt(n+1) x_n(tau)
  Eigen::VectorXcd x(dim - 1);
  for (Eigen::Index n = 0; n + 1 < dim; ++n)
    x(n) = p[static_cast<std::size_t>(n + 1)] * std::sqrt(static_cast<double>(n + 1));
  const double n0 = initial.mean();
  CorrelationEstimate est = empty_estimate(tau_grid);
  propagate(gen.block(1), x, tau_grid, [&](std::size_t i, const Eigen::VectorXcd& cur) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n + 1 < dim; ++n) acc += std::sqrt(static_cast<double>(n + 1)) * cur(n);
    est.values[i] = acc / std::sqrt(n0 * n_tau[i]);
  });
  if (tau_grid.front() == 0.0) est.values.front() /= std::abs(est.values.front());
  return est;
}

}  // namespace pcl
