#pragma once

// Pegg-Barnett phase operator on a truncated Fock space and the conversions
// between exact Fock states and number-phase Gaussian moments.

#include <Eigen/Dense>
#include <stdexcept>

#include "pcl/qt/fock_state.hpp"
#include "pcl/qt/gaussian_moments.hpp"

namespace pcl {

class TransitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// <j| theta_PB(theta0) |k> depends only on p = j - k; dimension is n_max + 1.
cplx pegg_barnett_element(int p, int n_max, double theta0);
Eigen::MatrixXcd pegg_barnett_matrix(int n_max, double theta0);

// <j| (theta_PB - center)^2 |k>, also a function of j - k only.
cplx pegg_barnett_square_element(int p, int n_max, double theta0, double center);

struct PhaseMoments {
  double mean_theta = 0.0;
  double var_theta = 0.0;
  double cov = 0.0;  // symmetrized with n
};
PhaseMoments phase_moments(const FockVector& psi, double theta0);

struct FockToGaussianResult {
  GaussianMoments moments;
  double purity_residual = 0.0;
  int iterations = 0;
  bool accepted = false;  // false: purity check failed, transition deferred
};

// Self-consistent phase cut theta0 = <theta_PB(theta0)> - pi.
FockToGaussianResult fock_to_gaussian(const FockVector& psi, double theta_guess, double purity_limit = 1e-1,
                                      double tolerance = 1e-6, int max_iterations = 100);

// Ground state of the number-phase quadratic form whose covariance equals
// the given moments.
FockVector gaussian_to_fock(const GaussianMoments& g, int n_max);

}  // namespace pcl
