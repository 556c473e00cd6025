#pragma once

// Brute-force master-equation reference for small instances: the photon-number
// birth-death chain at fixed excitation number X, its steady state, and
// quantum-regression correlators.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcl/analytics.hpp"
#include "pcl/estimators.hpp"
#include "pcl/model.hpp"

namespace pcl {

class ReducibleChain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// dP/dt = L P on n = 0..n_max. up_rates[n] is the n -> n+1 rate, down_rates[n]
// the n -> n-1 rate.
struct BirthDeathGenerator {
  std::vector<double> up_rates;
  std::vector<double> down_rates;

  std::size_t dimension() const { return up_rates.size(); }
  Eigen::MatrixXd matrix() const;
  // Largest |column sum| of matrix(), relative to the largest rate.
  double column_sum_error() const;
  // Throws on negative rates, mismatched sizes, or flow out of the boundaries.
  void validate() const;
};

// Per-channel rates and level energies needed for the coherence blocks.
struct CoherenceGenerator {
  std::vector<double> gain;        // n -> n+1, R(n) (n+1)
  std::vector<double> absorption;  // n -> n-1, gamma(n) n
  std::vector<double> loss;        // n -> n-1, kappa n
  std::vector<double> energy;      // Delta' n + (U/2) n (n-1)

  std::size_t dimension() const { return gain.size(); }
  BirthDeathGenerator populations() const;
  // Generator of the density-matrix band rho_{n+k, n}, k >= 0 (k = 0 is the
  // population block). Complex because of the Hamiltonian phase.
  Eigen::MatrixXcd block(int k) const;
};

// Fixed-X chain with M_up = X - n: R(n) = B21(n)(X - n), gamma(n) = B12(n-1)(M_tot - X + n).
// States above X have no gain and drain back below.
CoherenceGenerator make_coherence_generator(const ModelParams& p, std::int64_t x, int n_max);
BirthDeathGenerator make_birth_death(const ModelParams& p, std::int64_t x, int n_max);

// Normalized null vector of the generator. A chain with a single closed class
// returns the distribution supported on it; several closed classes throw
// ReducibleChain naming them.
NumberDistribution steady_state(const BirthDeathGenerator& gen);

// g2(tau) = sum n [exp(L tau)]_{nm} m P(m) / n_bar^2 via the symmetrized
// spectral decomposition. dist must be stationary for gen.
CorrelationEstimate g2_correlator(const BirthDeathGenerator& gen, const NumberDistribution& dist,
                                  std::span<const double> tau_grid);

// Same correlator from the k = 0 Lindblad block and a matrix exponential; used
// as a cross-check of the classical evaluation.
CorrelationEstimate g2_correlator_lindblad(const CoherenceGenerator& gen, const NumberDistribution& dist,
                                           std::span<const double> tau_grid);

// g1(tau) = <a^dag(0) a(tau)> / sqrt(<n(0)> <n(tau)>) starting from a state with
// populations `initial` (only the diagonal enters). Throws TruncationError when
// the initial populations reach n_max.
CorrelationEstimate g1_correlator(const CoherenceGenerator& gen, const NumberDistribution& initial,
                                  std::span<const double> tau_grid);

}  // namespace pcl
