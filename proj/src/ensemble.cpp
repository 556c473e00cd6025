#include "pcl/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pcl/hpm_sim.hpp"
#include "pcl/qt/qt_sim.hpp"
#include "pcl/random.hpp"
#include "pcl/rate_sim.hpp"

namespace pcl {

namespace fs = std::filesystem;

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::pending: return "pending";
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::failed: return "failed";
    case TrajectoryStatus::interrupted: return "interrupted";
  }
  return "pending";
}

namespace {

TrajectoryStatus parse_status(const std::string& s) {
  if (s == "completed") return TrajectoryStatus::completed;
  if (s == "failed") return TrajectoryStatus::failed;
  if (s == "interrupted") return TrajectoryStatus::interrupted;
  return TrajectoryStatus::pending;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::string csv_row(const std::vector<double>& row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += format_double(row[i]);
  }
  line += '\n';
  return line;
}

std::string csv_header(const std::vector<std::string>& cols) {
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i];
  }
  line += '\n';
  return line;
}

struct Interrupted {};

// Runs or resumes one trajectory; returns the record.
TrajectoryRecord run_one(const ExperimentConfig& config, const std::string& hash, std::size_t index,
                         const EnsembleOptions& options) {
  TrajectoryRecord rec;
  rec.index = index;
  rec.file = trajectory_file(index);
  rec.dynamics_seed = derive_seed(config.seed, index, 0);
  rec.initial_seed = derive_seed(config.seed, index, 1);
  const fs::path dir(config.output_dir);
  const fs::path csv = dir / rec.file;
  const fs::path ckpt = dir / (rec.file + ".ckpt.json");
  const auto t0 = std::chrono::steady_clock::now();

  const RunWindow& w = config.window;
  const std::size_t total = w.sample_count();
  std::unique_ptr<Trajectory> traj = make_trajectory(config, index);
  std::size_t next = 0;
  std::uintmax_t offset = 0;

  if (options.resume && fs::exists(ckpt) && fs::exists(csv)) {
    std::ifstream in(ckpt);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.value("config_hash", "") == hash) {
      offset = j.at("bytes").get<std::uintmax_t>();
      if (fs::file_size(csv) >= offset) {
        next = j.at("next_sample").get<std::size_t>();
        if (j.value("complete", false) && next == total) {
          fs::resize_file(csv, offset);
          rec.status = TrajectoryStatus::completed;
          rec.samples_written = total;
          rec.resumed = true;
          return rec;
        }
        traj->restore(j.at("state"));
        fs::resize_file(csv, offset);
        rec.resumed = true;
      } else {
        next = 0;
        offset = 0;
      }
    }
  }

  std::ofstream out;
  if (next == 0) {
    out.open(csv, std::ios::binary | std::ios::trunc);
    out << csv_header(traj->columns());
  } else {
    out.open(csv, std::ios::binary | std::ios::app);
  }
  if (!out) throw std::runtime_error("cannot open " + csv.string());

  auto save = [&](bool complete) {
    out.flush();
    nlohmann::json j;
    j["config_hash"] = hash;
    j["next_sample"] = next;
    j["bytes"] = static_cast<std::uintmax_t>(out.tellp());
    j["complete"] = complete;
    j["state"] = complete ? nlohmann::json(nullptr) : traj->checkpoint();
    write_atomic(ckpt, j.dump());
  };

  std::size_t checkpoints = 0;
  double next_checkpoint = config.checkpoint_interval > 0.0 ? traj->time() + config.checkpoint_interval : 0.0;
  for (; next < total; ++next) {
    traj->advance_to(w.sample_time(next));
    out << csv_row(traj->sample());
    if (config.checkpoint_interval > 0.0 && traj->time() >= next_checkpoint && next + 1 < total) {
      ++next;
      save(false);
      --next;
      next_checkpoint = traj->time() + config.checkpoint_interval;
      if (options.interrupt_after_checkpoints > 0 && ++checkpoints >= options.interrupt_after_checkpoints) {
        rec.status = TrajectoryStatus::interrupted;
        rec.samples_written = next + 1;
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
      }
    }
  }
  save(true);
  rec.status = TrajectoryStatus::completed;
  rec.samples_written = total;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

std::size_t RunManifest::failures() const {
  std::size_t k = 0;
  for (const auto& t : trajectories) k += t.status != TrajectoryStatus::completed;
  return k;
}

std::size_t RunManifest::completed() const { return trajectories.size() - failures(); }

int RunManifest::exit_code() const { return failures() == 0 ? 0 : 2; }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["config_hash"] = config_hash;
  j["config"] = config_ini;
  j["seed"] = seed;
  j["seed_derivation"] = "derive_seed(seed, trajectory, channel); channel 0 dynamics, 1 initial state";
  j["workers"] = workers;
  j["started"] = started;
  j["finished"] = finished;
  j["wall_seconds"] = wall_seconds;
  j["completed"] = completed();
  j["failed"] = failures();
  j["artifacts"] = artifacts;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : trajectories) {
    nlohmann::json e;
    e["index"] = t.index;
    e["status"] = to_string(t.status);
    e["file"] = t.file;
    e["dynamics_seed"] = hex(t.dynamics_seed);
    e["initial_seed"] = hex(t.initial_seed);
    e["samples"] = t.samples_written;
    e["resumed"] = t.resumed;
    e["wall_seconds"] = t.wall_seconds;
    if (!t.error.empty()) e["error"] = t.error;
    list.push_back(e);
  }
  j["trajectories"] = list;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.name = j.value("name", "");
  m.config_hash = j.value("config_hash", "");
  m.config_ini = j.value("config", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.workers = j.value("workers", 1u);
  m.started = j.value("started", "");
  m.finished = j.value("finished", "");
  m.wall_seconds = j.value("wall_seconds", 0.0);
  m.artifacts = j.value("artifacts", std::vector<std::string>{});
  for (const auto& e : j.at("trajectories")) {
    TrajectoryRecord t;
    t.index = e.at("index").get<std::size_t>();
    t.status = parse_status(e.at("status").get<std::string>());
    t.file = e.at("file").get<std::string>();
    t.dynamics_seed = std::stoull(e.at("dynamics_seed").get<std::string>(), nullptr, 16);
    t.initial_seed = std::stoull(e.at("initial_seed").get<std::string>(), nullptr, 16);
    t.samples_written = e.value("samples", std::size_t{0});
    t.resumed = e.value("resumed", false);
    t.wall_seconds = e.value("wall_seconds", 0.0);
    t.error = e.value("error", "");
    m.trajectories.push_back(t);
  }
  return m;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PCL_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::unique_ptr<Trajectory> make_trajectory(const ExperimentConfig& config, std::size_t index) {
  switch (config.engine) {
    case Engine::rate:
      return std::make_unique<RateSimulator>(make_rate_simulator(config.model, config.seed, index, config.rate));
    case Engine::hpm:
      return std::make_unique<HpmSimulator>(make_hpm_simulator(config.model, config.seed, index, config.hpm));
    case Engine::qt:
      return std::make_unique<QtSimulator>(make_qt_simulator(config.model, config.seed, index, config.qt));
  }
  throw ConfigError("unknown engine");
}

std::string number_column(Engine e) { return e == Engine::qt ? "mean_n" : "n"; }

std::string trajectory_file(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj-%05zu.csv", index);
  return buf;
}

RunManifest run_ensemble(const ExperimentConfig& config, const EnsembleOptions& options) {
  config.validate();
  if (!config.m_tot_sweep.empty()) throw ConfigError("run_ensemble takes a single configuration; expand the sweep first");
  fs::create_directories(config.output_dir);
  const auto t0 = std::chrono::steady_clock::now();

  RunManifest m;
  m.name = config.name;
  m.config_ini = config.to_ini();
  m.config_hash = hex(config_hash(config));
  m.seed = config.seed;
  m.workers = resolve_workers(options.workers);
  m.started = utc_now();
  m.trajectories.resize(config.samples);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.samples) return;
      TrajectoryRecord rec;
      try {
        rec = run_one(config, m.config_hash, i, options);
      } catch (const std::exception& e) {
        rec.index = i;
        rec.file = trajectory_file(i);
        rec.status = TrajectoryStatus::failed;
        rec.error = e.what();
      }
      m.trajectories[i] = rec;
      const std::size_t k = ++done;
      if (!options.quiet) {
        std::lock_guard lock(log_mutex);
        std::cerr << "[" << config.name << "] trajectory " << i << " " << to_string(rec.status) << " (" << k << "/"
                  << config.samples << ")\n";
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(m.workers, static_cast<unsigned>(config.samples));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& t : m.trajectories)
    if (t.status == TrajectoryStatus::completed) m.artifacts.push_back(t.file);
  m.finished = utc_now();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic(fs::path(config.output_dir) / "manifest.json", m.to_json().dump(2) + "\n");
  write_atomic(fs::path(config.output_dir) / "config.ini", m.config_ini);
  return m;
}

RunManifest load_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir);
  return RunManifest::from_json(nlohmann::json::parse(in));
}

std::vector<TimeSeries> load_trajectories(const std::string& dir, const RunManifest& manifest) {
  std::vector<TimeSeries> out;
  for (const auto& t : manifest.trajectories) {
    if (t.status != TrajectoryStatus::completed) continue;
    std::ifstream in(fs::path(dir) / t.file);
    if (!in) throw std::runtime_error("missing trajectory file " + t.file);
    out.push_back(TimeSeries::read_csv(in));
  }
  return out;
}

}  // namespace pcl
