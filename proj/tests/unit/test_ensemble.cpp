#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pcl/ensemble.hpp"
#include "pcl/report.hpp"

using namespace pcl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pcl-unit-" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small(Engine e, const fs::path& dir) {
  ExperimentConfig c = preset("fig1-interacting");
  c.engine = e;
  c.samples = 3;
  c.window = RunWindow{400.0, 50.0, 1.0};
  c.checkpoint_interval = 100.0;
  c.output_dir = dir.string();
  return c;
}

void same_files(const fs::path& a, const fs::path& b, std::size_t samples) {
  for (std::size_t i = 0; i < samples; ++i) {
    const std::string fa = slurp(a / trajectory_file(i));
    CHECK(!fa.empty());
    CHECK(fa == slurp(b / trajectory_file(i)));
  }
}

}  // namespace

TEST_CASE("single tiny trajectory writes a CSV and a manifest") {
  const fs::path dir = scratch("tiny");
  ExperimentConfig c = small(Engine::rate, dir);
  c.samples = 1;
  const RunManifest m = run_ensemble(c, EnsembleOptions{1});
  CHECK(m.exit_code() == 0);
  CHECK(m.completed() == 1);
  CHECK(fs::exists(dir / "traj-00000.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  const RunManifest back = load_manifest(dir.string());
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.trajectories.at(0).dynamics_seed == derive_seed(c.seed, 0, 0));
  const auto runs = load_trajectories(dir.string(), back);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].size() == c.window.sample_count());
  fs::remove_all(dir);
}

TEST_CASE("reruns and worker counts give byte-identical trajectories") {
  for (Engine e : {Engine::rate, Engine::hpm, Engine::qt}) {
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    ExperimentConfig ca = small(e, a), cb = small(e, b);
    EnsembleOptions one{1};
    one.resume = false;
    EnsembleOptions three{3};
    three.resume = false;
    run_ensemble(ca, one);
    run_ensemble(cb, three);
    same_files(a, b, ca.samples);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("interrupted runs resume to the same bytes") {
  for (Engine e : {Engine::rate, Engine::hpm, Engine::qt}) {
    const fs::path a = scratch("res-a"), b = scratch("res-b");
    EnsembleOptions plain{1};
    plain.resume = false;
    run_ensemble(small(e, a), plain);

    EnsembleOptions cut{2};
    cut.interrupt_after_checkpoints = 2;
    const RunManifest partial = run_ensemble(small(e, b), cut);
    CHECK(partial.completed() == 0);
    CHECK(partial.exit_code() == 2);
    const RunManifest done = run_ensemble(small(e, b), EnsembleOptions{2});
    CHECK(done.completed() == 3);
    CHECK(done.trajectories[0].resumed);
    same_files(a, b, 3);

    // a finished run is not redone
    const RunManifest again = run_ensemble(small(e, b), EnsembleOptions{1});
    CHECK(again.completed() == 3);
    same_files(a, b, 3);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("failures are recorded and the ensemble continues") {
  const fs::path dir = scratch("fail");
  ExperimentConfig c = small(Engine::rate, dir);
  c.rate.excitations = c.model.m_tot + 10;
  const RunManifest m = run_ensemble(c, EnsembleOptions{1});
  CHECK(m.failures() == 3);
  CHECK(m.exit_code() == 2);
  CHECK_FALSE(m.trajectories[0].error.empty());
  fs::remove_all(dir);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(4) == 4);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("end-to-end analysis of a scaled preset") {
  const fs::path dir = scratch("e2e");
  ExperimentConfig c = preset("fig1-noninteracting").scaled(0.01);
  c.engine = Engine::hpm;
  c.analysis.g2_max_tau = 400.0;
  c.output_dir = dir.string();
  const RunManifest m = run_ensemble(c, EnsembleOptions{1});
  const EnsembleReport r = analyze_ensemble(c, load_trajectories(dir.string(), m));
  CHECK(r.trajectories == c.samples);
  CHECK(r.histogram.has_value());
  CHECK(r.g2.has_value());
  CHECK(r.eta_thermodynamic == 1.0);
  const auto files = write_report(dir.string(), r);
  CHECK(fs::exists(dir / "analysis.json"));
  CHECK(fs::exists(dir / "histogram.csv"));
  CHECK(fs::exists(dir / "g2.csv"));
  CHECK(files.size() >= 3);
  fs::remove_all(dir);
}
