#pragma once

// Parallel ensemble runner: one CSV per trajectory, periodic checkpoints,
// resumable runs and a JSON manifest.

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "pcl/config.hpp"
#include "pcl/trajectory.hpp"

namespace pcl {

enum class TrajectoryStatus { pending, completed, failed, interrupted };

std::string to_string(TrajectoryStatus s);

struct TrajectoryRecord {
  std::size_t index = 0;
  TrajectoryStatus status = TrajectoryStatus::pending;
  std::string file;
  std::string error;
  std::uint64_t dynamics_seed = 0;  // derive_seed(seed, index, 0)
  std::uint64_t initial_seed = 0;   // derive_seed(seed, index, 1)
  std::size_t samples_written = 0;
  bool resumed = false;
  double wall_seconds = 0.0;
};

struct RunManifest {
  std::string name;
  std::string config_hash;  // hex FNV-1a of the canonical config text
  std::string config_ini;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string started;
  std::string finished;
  double wall_seconds = 0.0;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<std::string> artifacts;

  std::size_t failures() const;
  std::size_t completed() const;
  // 0 when every trajectory completed, 2 otherwise.
  int exit_code() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

struct EnsembleOptions {
  unsigned workers = 0;  // 0: PCL_WORKERS env var, else hardware concurrency
  bool resume = true;    // continue from checkpoints found in the output directory
  // Test hook: each trajectory stops after writing this many checkpoints (0 = never).
  std::size_t interrupt_after_checkpoints = 0;
  bool quiet = true;
};

unsigned resolve_workers(unsigned requested);

// Fresh engine for trajectory `index`, seeded from (config.seed, index).
std::unique_ptr<Trajectory> make_trajectory(const ExperimentConfig& config, std::size_t index);

// Column holding the photon number for the configured engine.
std::string number_column(Engine e);

std::string trajectory_file(std::size_t index);

// Runs one (non-sweep) configuration into config.output_dir and writes manifest.json there.
RunManifest run_ensemble(const ExperimentConfig& config, const EnsembleOptions& options = {});

RunManifest load_manifest(const std::string& dir);

// Loads the completed trajectory CSVs listed in a manifest.
std::vector<TimeSeries> load_trajectories(const std::string& dir, const RunManifest& manifest);

}  // namespace pcl
