#include "pcl/qt/wigner.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pcl {

// Iterative Laguerre recursion over the density-matrix elements W_mn.
Eigen::MatrixXd wigner_grid(const FockVector& psi, std::span<const double> x_values, std::span<const double> p_values) {
  const auto nx = static_cast<Eigen::Index>(x_values.size());
  const auto np = static_cast<Eigen::Index>(p_values.size());
  const int dim = psi.hi() + 1;
  Eigen::ArrayXXcd a(np, nx);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) a(i, j) = cplx(x_values[j], p_values[i]) / std::numbers::sqrt2;
  auto rho = [&](int m, int n) { return psi[m] * std::conj(psi[n]); };

  std::vector<Eigen::ArrayXXcd> w(static_cast<std::size_t>(dim));
  w[0] = (-2.0 * a.abs2()).exp() / std::numbers::pi;
  Eigen::ArrayXXd out = rho(0, 0).real() * w[0].real();
  for (int n = 1; n < dim; ++n) {
    w[n] = 2.0 * a * w[n - 1] / std::sqrt(static_cast<double>(n));
    out += 2.0 * (rho(0, n) * w[n]).real();
  }
  for (int m = 1; m < dim; ++m) {
    Eigen::ArrayXXcd temp = w[m];
    w[m] = (2.0 * a.conjugate() * temp - std::sqrt(static_cast<double>(m)) * w[m - 1]) / std::sqrt(static_cast<double>(m));
    out += (rho(m, m) * w[m]).real();
    for (int n = m + 1; n < dim; ++n) {
      Eigen::ArrayXXcd next = (2.0 * a * w[n - 1] - std::sqrt(static_cast<double>(m)) * temp) / std::sqrt(static_cast<double>(n));
      temp = w[n];
      w[n] = std::move(next);
      out += 2.0 * (rho(m, n) * w[n]).real();
    }
  }
  return out.matrix();
}

}  // namespace pcl
