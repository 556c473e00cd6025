#pragma once

// Hybrid quantum-trajectory engine: exact truncated-Fock evolution at low
// photon number, Gaussian moment evolution at high photon number, with
// hysteretic switching between the two.

#include <cstdint>
#include <optional>
#include <vector>

#include "pcl/model.hpp"
#include "pcl/qt/fock_state.hpp"
#include "pcl/qt/gaussian_moments.hpp"
#include "pcl/random.hpp"
#include "pcl/trajectory.hpp"

namespace pcl {

enum class Regime { exact = 0, variational = 1 };

struct QtOptions {
  double n_trans_down = 200.0;
  double n_trans_up = 240.0;
  int n_max = 400;
  double exact_dt_max = 0.05;
  double exact_kappa_dt = 0.005;  // kappa <n> dt bound for the heterodyne substep
  double variational_dt = 0.02;
  double broad_phase = 0.05;  // var_theta at which the variational step is halved
  double purity_fallback = 1e-2;  // per-step residual that sends the state back to Fock space
  double purity_defer = 1e-1;     // Fock -> Gaussian transition deferred above this residual
  double retry_interval = 1.0;    // time between deferred transition attempts
  FieldReconstruction field = FieldReconstruction::wick;
  InitialNumber initial = InitialNumber::sampled;
  std::int64_t excitations = -1;  // fixed X for the initial state; < 0 uses the stationary X
  bool record_wigner = false;
  int wigner_points = 61;
  double wigner_extent = 24.0;  // quadrature half-width of the raster
};

struct WignerDump {
  double t = 0.0;
  Regime from = Regime::exact;
  std::vector<double> x;
  std::vector<double> p;
  Eigen::MatrixXd values;
};

struct QtCounters {
  std::int64_t absorptions = 0;
  std::int64_t emissions = 0;
  std::int64_t pumps = 0;
  std::int64_t transitions_up = 0;
  std::int64_t transitions_down = 0;
  std::int64_t deferred = 0;
  std::int64_t fallbacks = 0;
};

class QtSimulator final : public Trajectory {
 public:
  // Starts in the exact regime.
  QtSimulator(const ModelParams& p, FockVector psi, std::int64_t m_up, RandomStream rng, QtOptions opt = {});
  // Starts in the variational regime.
  QtSimulator(const ModelParams& p, GaussianMoments g, std::int64_t m_up, RandomStream rng, QtOptions opt = {});

  Regime regime() const { return regime_; }
  const FockVector& fock() const { return psi_; }
  const GaussianMoments& moments() const { return gauss_; }
  std::int64_t m_up() const { return m_up_; }
  const QtCounters& counters() const { return counters_; }
  const std::vector<WignerDump>& wigner_dumps() const { return wigner_; }

  double mean_n() const;
  cplx field() const;

  // One integration step of at most dt in the current regime (may switch regime).
  void step(double dt);

  std::vector<std::string> columns() const override;
  double time() const override { return t_; }
  void advance_to(double t) override;
  std::vector<double> sample() const override;
  nlohmann::json checkpoint() const override;
  void restore(const nlohmann::json& state) override;

 private:
  void exact_step(double dt);
  void variational_step(double dt);
  void dye_no_jump(double s);
  void dye_jump();
  void apply_pump(double dt);
  void try_upward_transition();
  void downward_transition(const GaussianMoments& g);
  void dump_wigner();
  double absorption_rate(double n) const;
  double emission_rate(double n) const;
  cplx draw_dz(double dt);

  ModelParams params_;
  QtOptions opt_;
  Regime regime_ = Regime::exact;
  FockVector psi_;
  GaussianMoments gauss_;
  std::int64_t m_up_ = 0;
  double t_ = 0.0;
  double theta_track_ = 0.0;  // unwrapped arg <a> in the exact regime
  double hazard_left_ = 0.0;  // remaining Exp(1) budget for the next dye jump
  double next_attempt_ = 0.0;
  mutable double residual_max_ = 0.0;  // largest pre-closure purity residual since the last sample
  RandomStream rng_;
  QtCounters counters_;
  std::vector<WignerDump> wigner_;
};

QtSimulator make_qt_simulator(const ModelParams& p, std::uint64_t master_seed, std::uint64_t trajectory,
                              QtOptions opt = {});

TimeSeries run_qt_trajectory(const ModelParams& p, const RunWindow& window, std::uint64_t master_seed,
                             std::uint64_t trajectory, QtOptions opt = {});

}  // namespace pcl
