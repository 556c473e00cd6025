#pragma once

// Truncated Fock-space amplitude vector. Only the active window [lo, hi]
// holds non-negligible amplitudes; everything outside it is exactly zero.

#include <Eigen/Dense>
#include <complex>
#include <json.hpp>

namespace pcl {

using cplx = std::complex<double>;

class FockVector {
 public:
  FockVector() = default;
  explicit FockVector(int n_max);

  static FockVector number_state(int n, int n_max);
  static FockVector coherent(cplx alpha, int n_max);

  int n_max() const { return static_cast<int>(amp_.size()) - 1; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  cplx operator[](int n) const { return amp_[n]; }

  // Replaces the amplitudes; the window is recomputed.
  void assign(const Eigen::VectorXcd& amp);

  double norm_squared() const;
  void normalize();
  double mean_n() const;
  double variance_n() const;
  // <a> = sum_n sqrt(n) conj(c_{n-1}) c_n
  cplx expect_a() const;
  double tail_probability(int from) const;

  void apply_a();
  void apply_adag();
  // c_n <- c_n * f(n) over the window
  template <class F>
  void scale(F&& f) {
    for (int n = lo_; n <= hi_; ++n) amp_[n] *= f(n);
  }

  // Heterodyne Euler-Maruyama increment kappa <a>* a dt + sqrt(kappa) a dz*
  // plus the -(kappa/2) n dt decay, followed by renormalization.
  void heterodyne_step(double kappa, double dt, cplx dz);

  // Drops negligible edge amplitudes and grows the capacity when the tail
  // above 0.9 n_max exceeds tail_limit.
  void trim(double edge = 1e-30, double tail_limit = 1e-8);
  void resize(int n_max);

  nlohmann::json to_json() const;
  static FockVector from_json(const nlohmann::json& j);

 private:
  void ensure_capacity(int n);
  void refresh_window();

  Eigen::VectorXcd amp_;
  int lo_ = 0;
  int hi_ = 0;
};

}  // namespace pcl
