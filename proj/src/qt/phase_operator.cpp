#include "pcl/qt/phase_operator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace pcl {

namespace {
constexpr double kPi = std::numbers::pi;
}

cplx pegg_barnett_element(int p, int n_max, double theta0) {
  const double dim = n_max + 1.0;
  if (p == 0) return theta0 + n_max * kPi / dim;
  return (2.0 * kPi / dim) * std::polar(1.0, p * theta0) / (std::polar(1.0, p * 2.0 * kPi / dim) - 1.0);
}

Eigen::MatrixXcd pegg_barnett_matrix(int n_max, double theta0) {
  Eigen::MatrixXcd m(n_max + 1, n_max + 1);
  for (int j = 0; j <= n_max; ++j)
    for (int k = 0; k <= n_max; ++k) m(j, k) = pegg_barnett_element(j - k, n_max, theta0);
  return m;
}

cplx pegg_barnett_square_element(int p, int n_max, double theta0, double center) {
  const int dim = n_max + 1;
  const cplx step = std::polar(1.0, p * 2.0 * kPi / dim);
  cplx phase = std::polar(1.0, p * theta0);
  cplx acc = 0.0;
  for (int m = 0; m < dim; ++m) {
    const double d = theta0 + 2.0 * kPi * m / dim - center;
    acc += d * d * phase;
    phase *= step;
  }
  return acc / static_cast<double>(dim);
}

namespace {

// Toeplitz elements f(p) for p in [-(w-1), w-1], stored at index p + w - 1.
std::vector<cplx> phase_toeplitz(int width, int n_max, double theta0) {
  std::vector<cplx> f(2 * static_cast<std::size_t>(width) - 1);
  for (int p = -(width - 1); p < width; ++p) f[static_cast<std::size_t>(p + width - 1)] = pegg_barnett_element(p, n_max, theta0);
  return f;
}

double phase_mean(const FockVector& psi, double theta0) {
  const int lo = psi.lo();
  const int w = psi.hi() - lo + 1;
  const auto f = phase_toeplitz(w, psi.n_max(), theta0);
  cplx acc = 0.0;
  for (int j = 0; j < w; ++j) {
    cplx row = 0.0;
    for (int k = 0; k < w; ++k) row += f[static_cast<std::size_t>(j - k + w - 1)] * psi[lo + k];
    acc += std::conj(psi[lo + j]) * row;
  }
  return acc.real();
}

}  // namespace

PhaseMoments phase_moments(const FockVector& psi, double theta0) {
  const int lo = psi.lo();
  const int w = psi.hi() - lo + 1;
  const auto f = phase_toeplitz(w, psi.n_max(), theta0);
  Eigen::VectorXcd v(w);
  for (int j = 0; j < w; ++j) {
    cplx row = 0.0;
    for (int k = 0; k < w; ++k) row += f[static_cast<std::size_t>(j - k + w - 1)] * psi[lo + k];
    v[j] = row;
  }
  const Eigen::VectorXcd c = psi.amplitudes().segment(lo, w);
  PhaseMoments out;
  out.mean_theta = c.dot(v).real();
  // Theta psi with Theta = theta_PB - mean
  const Eigen::VectorXcd centered = v - out.mean_theta * c;
  out.var_theta = centered.squaredNorm();
  const double mean_n = psi.mean_n();
  cplx acc = 0.0;
  for (int j = 0; j < w; ++j) acc += std::conj(c[j]) * (lo + j - mean_n) * centered[j];
  out.cov = acc.real();
  return out;
}

FockToGaussianResult fock_to_gaussian(const FockVector& psi, double theta_guess, double purity_limit, double tolerance,
                                      int max_iterations) {
  double theta0 = theta_guess - kPi;
  FockToGaussianResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    const double next = phase_mean(psi, theta0) - kPi;
    const double change = std::abs(next - theta0);
    theta0 = next;
    if (change < tolerance) {
      res.iterations = it;
      const PhaseMoments pm = phase_moments(psi, theta0);
      res.moments.mean_n = psi.mean_n();
      res.moments.var_n = psi.variance_n();
      res.moments.mean_theta = pm.mean_theta;
      res.moments.var_theta = pm.var_theta;
      res.moments.cov = pm.cov;
      res.purity_residual = res.moments.purity_residual();
      res.accepted = std::abs(res.purity_residual) <= purity_limit;
      return res;
    }
  }
  std::ostringstream os;
  os << "phase cut iteration did not converge in " << max_iterations << " steps (last theta0 = " << theta0 << ")";
  throw TransitionError(os.str());
}

FockVector gaussian_to_fock(const GaussianMoments& g, int n_max) {
  if (!(g.var_n > 0.0) || !(g.var_theta > 0.0)) throw TransitionError("Gaussian moments need positive variances");
  const double spread = std::sqrt(g.var_n);
  if (g.mean_n + 5.0 * spread >= n_max) throw TransitionError("Fock truncation too small for the Gaussian state");
  const int lo = std::max(0, static_cast<int>(std::floor(g.mean_n - 10.0 * spread - 10.0)));
  const int hi = std::min(n_max, static_cast<int>(std::ceil(g.mean_n + 10.0 * spread + 10.0)));
  const int w = hi - lo + 1;
  const double theta0 = g.mean_theta - kPi;

  std::vector<cplx> th(2 * static_cast<std::size_t>(w) - 1);
  std::vector<cplx> th2(th.size());
  for (int p = -(w - 1); p < w; ++p) {
    const auto idx = static_cast<std::size_t>(p + w - 1);
    th[idx] = pegg_barnett_element(p, n_max, theta0);
    th2[idx] = pegg_barnett_square_element(p, n_max, theta0, g.mean_theta);
  }
  Eigen::MatrixXcd h(w, w);
  for (int j = 0; j < w; ++j) {
    const double dj = lo + j - g.mean_n;
    for (int k = 0; k < w; ++k) {
      const double dk = lo + k - g.mean_n;
      const auto idx = static_cast<std::size_t>(j - k + w - 1);
      cplx theta_jk = th[idx];
      if (j == k) theta_jk -= g.mean_theta;
      h(j, k) = g.var_n * th2[idx] - g.cov * (dj + dk) * theta_jk;
      if (j == k) h(j, k) += g.var_theta * dj * dj;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver failed for Gaussian state (block " << lo << ".." << hi << ", var_n = " << g.var_n
       << ", var_theta = " << g.var_theta << ", cov = " << g.cov << ")";
    throw TransitionError(os.str());
  }
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n_max + 1);
  amp.segment(lo, w) = solver.eigenvectors().col(0);
  FockVector psi(n_max);
  psi.assign(amp);
  psi.normalize();
  return psi;
}

}  // namespace pcl
