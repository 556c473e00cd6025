#pragma once

// Experiment configuration: INI files, named presets and the --scale shrink.

#include <cstdint>
#include <string>
#include <vector>

#include "pcl/hpm_sim.hpp"
#include "pcl/model.hpp"
#include "pcl/qt/qt_sim.hpp"
#include "pcl/rate_sim.hpp"
#include "pcl/trajectory.hpp"

namespace pcl {

enum class Engine { rate, hpm, qt };

std::string to_string(Engine e);
Engine parse_engine(const std::string& s);

struct AnalysisRequest {
  bool histogram = true;
  double g2_max_tau = 0.0;  // 0 disables
  double g1_max_tau = 0.0;
  std::size_t histogram_bins = 10;
};

struct ExperimentConfig {
  std::string name = "custom";
  ModelParams model;
  Engine engine = Engine::rate;
  std::size_t samples = 1;
  RunWindow window;
  std::uint64_t seed = 1;
  std::string output_dir = "pcl-output";
  double checkpoint_interval = 0.0;  // simulated time between checkpoints; 0 disables
  RateOptions rate;
  HpmOptions hpm;
  QtOptions qt;
  AnalysisRequest analysis;
  std::vector<std::int64_t> m_tot_sweep;  // one ensemble per entry when non-empty

  void validate() const;
  // Durations and sample counts multiplied by factor (0 < factor <= 1); burn-in
  // and sampling interval are kept, samples never drop below 1.
  ExperimentConfig scaled(double factor) const;
  // One config per sweep entry (or {*this}); each gets its own output subdirectory.
  std::vector<ExperimentConfig> expand() const;
  // Round-trippable INI text.
  std::string to_ini() const;
};

// Same parameters in internal units, M_tot replaced and B12 rescaled so that
// B12 M_tot stays the time unit.
ModelParams with_reservoir(const ModelParams& p, std::int64_t m_tot);

ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
// Throws ConfigError listing the valid names for an unknown preset.
ExperimentConfig preset(const std::string& name);

// Small fixed-X instance used by the oracle comparison.
struct OracleInstance {
  ModelParams model;
  std::int64_t x = 10;
  int n_max = 30;
};
OracleInstance oracle_small_instance();

// FNV-1a 64 of the canonical INI text.
std::uint64_t config_hash(const ExperimentConfig& c);

}  // namespace pcl
