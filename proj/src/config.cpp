#include "pcl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pcl {

namespace pt = boost::property_tree;

std::string to_string(Engine e) {
  switch (e) {
    case Engine::rate: return "rate";
    case Engine::hpm: return "hpm";
    case Engine::qt: return "qt";
  }
  return "rate";
}

Engine parse_engine(const std::string& s) {
  if (s == "rate") return Engine::rate;
  if (s == "hpm") return Engine::hpm;
  if (s == "qt") return Engine::qt;
  throw ConfigError("unknown engine '" + s + "' (valid: rate, hpm, qt)");
}

namespace {

std::string ks_name(KsSide k) { return k == KsSide::emission ? "emission" : "absorption"; }

KsSide parse_ks(const std::string& s) {
  if (s == "emission") return KsSide::emission;
  if (s == "absorption") return KsSide::absorption;
  throw ConfigError("ks_side must be emission or absorption, got '" + s + "'");
}

std::string frame_name(FrameChoice f) {
  switch (f) {
    case FrameChoice::mean_field: return "mean_field";
    case FrameChoice::vacuum: return "vacuum";
    case FrameChoice::lab: return "lab";
    case FrameChoice::custom: return "custom";
  }
  return "mean_field";
}

FrameChoice parse_frame(const std::string& s) {
  if (s == "mean_field") return FrameChoice::mean_field;
  if (s == "vacuum") return FrameChoice::vacuum;
  if (s == "lab") return FrameChoice::lab;
  if (s == "custom") return FrameChoice::custom;
  throw ConfigError("frame must be mean_field, vacuum, lab or custom, got '" + s + "'");
}

InitialNumber parse_initial(const std::string& s) {
  if (s == "sampled") return InitialNumber::sampled;
  if (s == "mean") return InitialNumber::mean;
  throw ConfigError("initial must be sampled or mean, got '" + s + "'");
}

std::string initial_name(InitialNumber i) { return i == InitialNumber::sampled ? "sampled" : "mean"; }

FieldReconstruction parse_field(const std::string& s) {
  if (s == "wick") return FieldReconstruction::wick;
  if (s == "simple") return FieldReconstruction::simple;
  throw ConfigError("qt field must be wick or simple, got '" + s + "'");
}

// Rhodamine 6G preset with n_bar = 1000 and the given Kerr constant.
ModelParams dye_preset(bool interacting) {
  ModelParams p = model_preset("rhodamine6g-560nm");
  if (!interacting) p.kerr = 0.0;
  return p;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError("bad value for " + key + ": " + e.what());
  }
}

std::vector<std::int64_t> parse_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::llround(std::stod(item)));
    } catch (const std::exception&) {
      throw ConfigError("bad list entry '" + item + "'");
    }
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  window.validate();
  if (!(window.burn_in > 0.0)) throw ConfigError("burn_in must be positive");
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (checkpoint_interval < 0.0) throw ConfigError("checkpoint_interval must be non-negative");
  if (engine == Engine::qt) {
    if (!(qt.n_trans_down < qt.n_trans_up)) throw ConfigError("qt thresholds must satisfy n_trans_down < n_trans_up");
    if (!(qt.n_trans_up < qt.n_max)) throw ConfigError("qt n_max must exceed n_trans_up");
    if (!(qt.variational_dt > 0.0 && qt.exact_dt_max > 0.0)) throw ConfigError("qt step sizes must be positive");
    if (!(qt.broad_phase > 0.0)) throw ConfigError("qt broad_phase must be positive");
  }
  if (engine == Engine::rate && rate.tau_leap && !(rate.leap_epsilon > 0.0 && rate.leap_epsilon < 1.0))
    throw ConfigError("leap_epsilon must lie in (0, 1)");
  const double span = window.duration - window.burn_in;
  if (analysis.g2_max_tau < 0.0 || analysis.g2_max_tau >= span) throw ConfigError("g2_max_tau must lie in [0, duration - burn_in)");
  if (analysis.g1_max_tau < 0.0 || analysis.g1_max_tau >= span) throw ConfigError("g1_max_tau must lie in [0, duration - burn_in)");
  if (analysis.histogram_bins < 2) throw ConfigError("histogram_bins must be at least 2");
  for (std::int64_t m : m_tot_sweep)
    if (m < 1) throw ConfigError("sweep M_tot entries must be positive");
}

ExperimentConfig ExperimentConfig::scaled(double factor) const {
  if (!(factor > 0.0 && factor <= 1.0)) throw ConfigError("scale must lie in (0, 1]");
  ExperimentConfig c = *this;
  c.samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(samples) * factor)));
  const double span = (window.duration - window.burn_in) * factor;
  c.window.duration = window.burn_in + std::max(span, 10.0 * window.sampling_dt);
  const double new_span = c.window.duration - c.window.burn_in;
  // lag windows are capped at half the shortened span
  auto shrink = [&](double tau) { return tau > 0.0 ? std::min(tau, 0.5 * new_span) : 0.0; };
  c.analysis.g2_max_tau = shrink(analysis.g2_max_tau);
  c.analysis.g1_max_tau = shrink(analysis.g1_max_tau);
  return c;
}

ModelParams with_reservoir(const ModelParams& p, std::int64_t m_tot) {
  ModelParams q = p;
  q.m_tot = m_tot;
  q.b12 = 1.0 / static_cast<double>(m_tot);
  q.b12_hz = p.b12_hz;
  return q;
}

std::vector<ExperimentConfig> ExperimentConfig::expand() const {
  if (m_tot_sweep.empty()) return {*this};
  std::vector<ExperimentConfig> out;
  for (std::int64_t m : m_tot_sweep) {
    ExperimentConfig c = *this;
    c.m_tot_sweep.clear();
    c.model = with_reservoir(model, m);
    c.name = name + "-mtot" + std::to_string(m);
    c.output_dir = output_dir + "/mtot-" + std::to_string(m);
    out.push_back(std::move(c));
  }
  return out;
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream os;
  const SiParams si = model.to_si();
  os << "[experiment]\n";
  os << "name = " << name << "\n\n";
  os << "[model]\n";
  os << "b12_hz = " << format_double(si.b12_hz) << "\n";
  os << "m_tot = " << model.m_tot << "\n";
  os << "b12 = " << format_double(model.b12) << "\n";
  os << "temperature = " << format_double(model.temperature) << "\n";
  os << "detuning_kt = " << format_double(model.detuning / model.temperature) << "\n";
  os << "kerr = " << format_double(model.kerr) << "\n";
  os << "kappa = " << format_double(model.kappa) << "\n";
  os << "w_up = " << format_double(model.w_up) << "\n";
  os << "w_down = " << format_double(model.w_down) << "\n";
  os << "n_bar = " << format_double(model.n_bar) << "\n";
  os << "ks_side = " << ks_name(model.ks_side) << "\n";
  os << "frame = " << frame_name(model.frame) << "\n";
  os << "frame_detuning = " << format_double(model.custom_frame_detuning) << "\n\n";
  os << "[run]\n";
  os << "engine = " << to_string(engine) << "\n";
  os << "samples = " << samples << "\n";
  os << "duration = " << format_double(window.duration) << "\n";
  os << "burn_in = " << format_double(window.burn_in) << "\n";
  os << "sampling_dt = " << format_double(window.sampling_dt) << "\n";
  os << "seed = " << seed << "\n";
  os << "output = " << output_dir << "\n";
  os << "checkpoint_interval = " << format_double(checkpoint_interval) << "\n";
  os << "initial = " << initial_name(rate.initial) << "\n";
  os << "excitations = " << rate.excitations << "\n\n";
  os << "[rate]\n";
  os << "tau_leap = " << (rate.tau_leap ? "true" : "false") << "\n";
  os << "leap_epsilon = " << format_double(rate.leap_epsilon) << "\n\n";
  os << "[hpm]\n";
  os << "rate_slack = " << format_double(hpm.rate_slack) << "\n\n";
  os << "[qt]\n";
  os << "n_trans_down = " << format_double(qt.n_trans_down) << "\n";
  os << "n_trans_up = " << format_double(qt.n_trans_up) << "\n";
  os << "n_max = " << qt.n_max << "\n";
  os << "exact_dt_max = " << format_double(qt.exact_dt_max) << "\n";
  os << "exact_kappa_dt = " << format_double(qt.exact_kappa_dt) << "\n";
  os << "variational_dt = " << format_double(qt.variational_dt) << "\n";
  os << "broad_phase = " << format_double(qt.broad_phase) << "\n";
  os << "purity_fallback = " << format_double(qt.purity_fallback) << "\n";
  os << "purity_defer = " << format_double(qt.purity_defer) << "\n";
  os << "field = " << (qt.field == FieldReconstruction::wick ? "wick" : "simple") << "\n\n";
  os << "[analysis]\n";
  os << "histogram = " << (analysis.histogram ? "true" : "false") << "\n";
  os << "histogram_bins = " << analysis.histogram_bins << "\n";
  os << "g2_max_tau = " << format_double(analysis.g2_max_tau) << "\n";
  os << "g1_max_tau = " << format_double(analysis.g1_max_tau) << "\n";
  if (!m_tot_sweep.empty()) {
    os << "\n[sweep]\nm_tot = ";
    for (std::size_t i = 0; i < m_tot_sweep.size(); ++i) os << (i ? ", " : "") << m_tot_sweep[i];
    os << "\n";
  }
  return os.str();
}

ExperimentConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  try {
    std::istringstream is(ini_text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  ExperimentConfig c;
  if (auto base = tree.get_optional<std::string>("experiment.preset")) c = preset(*base);
  c.name = get<std::string>(tree, "experiment.name", c.name);

  ModelParams& m = c.model;
  if (auto mp = tree.get_optional<std::string>("model.preset")) m = model_preset(*mp);
  // SI keys first, internal-unit keys override
  if (tree.get_child_optional("model.b12_hz") || tree.get_child_optional("model.temperature_k") ||
      tree.get_child_optional("model.kerr_per_s") || tree.get_child_optional("model.kappa_per_s")) {
    SiParams si = m.to_si();
    si.b12_hz = get(tree, "model.b12_hz", si.b12_hz);
    si.m_tot = get(tree, "model.m_tot", si.m_tot);
    si.temperature_kelvin = get(tree, "model.temperature_k", si.temperature_kelvin);
    si.kerr_per_s = get(tree, "model.kerr_per_s", si.kerr_per_s);
    si.kappa_per_s = get(tree, "model.kappa_per_s", si.kappa_per_s);
    const double detuning_kt = m.detuning / m.temperature;
    ModelParams q = ModelParams::from_si(si);
    q.detuning = detuning_kt * q.temperature;
    q.frame = m.frame;
    q.ks_side = m.ks_side;
    q.n_bar = m.n_bar;
    m = q;
  }
  m.m_tot = std::llround(get<double>(tree, "model.m_tot", static_cast<double>(m.m_tot)));
  m.b12 = get(tree, "model.b12", m.b12);
  m.temperature = get(tree, "model.temperature", m.temperature);
  m.detuning = get(tree, "model.detuning_kt", m.detuning / m.temperature) * m.temperature;
  m.kerr = get(tree, "model.kerr", m.kerr);
  m.kappa = get(tree, "model.kappa", m.kappa);
  m.w_up = get(tree, "model.w_up", m.w_up);
  m.w_down = get(tree, "model.w_down", m.w_down);
  m.n_bar = get(tree, "model.n_bar", m.n_bar);
  m.ks_side = parse_ks(get<std::string>(tree, "model.ks_side", ks_name(m.ks_side)));
  m.frame = parse_frame(get<std::string>(tree, "model.frame", frame_name(m.frame)));
  m.custom_frame_detuning = get(tree, "model.frame_detuning", m.custom_frame_detuning);

  c.engine = parse_engine(get<std::string>(tree, "run.engine", to_string(c.engine)));
  c.samples = get<std::size_t>(tree, "run.samples", c.samples);
  c.window.duration = get(tree, "run.duration", c.window.duration);
  c.window.burn_in = get(tree, "run.burn_in", c.window.burn_in);
  c.window.sampling_dt = get(tree, "run.sampling_dt", c.window.sampling_dt);
  c.seed = get<std::uint64_t>(tree, "run.seed", c.seed);
  c.output_dir = get<std::string>(tree, "run.output", c.output_dir);
  c.checkpoint_interval = get(tree, "run.checkpoint_interval", c.checkpoint_interval);
  const InitialNumber init = parse_initial(get<std::string>(tree, "run.initial", initial_name(c.rate.initial)));
  const std::int64_t x = get<std::int64_t>(tree, "run.excitations", c.rate.excitations);
  c.rate.initial = c.hpm.initial = c.qt.initial = init;
  c.rate.excitations = c.hpm.excitations = c.qt.excitations = x;

  c.rate.tau_leap = get(tree, "rate.tau_leap", c.rate.tau_leap);
  c.rate.leap_epsilon = get(tree, "rate.leap_epsilon", c.rate.leap_epsilon);
  c.hpm.rate_slack = get(tree, "hpm.rate_slack", c.hpm.rate_slack);
  c.qt.n_trans_down = get(tree, "qt.n_trans_down", c.qt.n_trans_down);
  c.qt.n_trans_up = get(tree, "qt.n_trans_up", c.qt.n_trans_up);
  c.qt.n_max = get(tree, "qt.n_max", c.qt.n_max);
  c.qt.exact_dt_max = get(tree, "qt.exact_dt_max", c.qt.exact_dt_max);
  c.qt.exact_kappa_dt = get(tree, "qt.exact_kappa_dt", c.qt.exact_kappa_dt);
  c.qt.variational_dt = get(tree, "qt.variational_dt", c.qt.variational_dt);
  c.qt.broad_phase = get(tree, "qt.broad_phase", c.qt.broad_phase);
  c.qt.purity_fallback = get(tree, "qt.purity_fallback", c.qt.purity_fallback);
  c.qt.purity_defer = get(tree, "qt.purity_defer", c.qt.purity_defer);
  c.qt.field = parse_field(get<std::string>(tree, "qt.field", c.qt.field == FieldReconstruction::wick ? "wick" : "simple"));

  c.analysis.histogram = get(tree, "analysis.histogram", c.analysis.histogram);
  c.analysis.histogram_bins = get(tree, "analysis.histogram_bins", c.analysis.histogram_bins);
  c.analysis.g2_max_tau = get(tree, "analysis.g2_max_tau", c.analysis.g2_max_tau);
  c.analysis.g1_max_tau = get(tree, "analysis.g1_max_tau", c.analysis.g1_max_tau);
  if (auto sweep = tree.get_optional<std::string>("sweep.m_tot")) c.m_tot_sweep = parse_list(*sweep);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> preset_names() {
  return {"fig1-noninteracting", "fig1-interacting", "fig3-g2", "fig6-g1", "fig7-reservoir-sweep", "oracle-small"};
}

OracleInstance oracle_small_instance() {
  OracleInstance o;
  o.model = with_reservoir(dye_preset(false), 10000);
  // Deep enough detuning that X = 10 holds a few photons (n_bar ~ 6) instead of the vacuum.
  o.model.detuning = -8.0 * o.model.temperature;
  o.model.kappa = 0.0;
  o.model.n_bar = 0.0;
  o.x = 10;
  o.n_max = 30;
  return o;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.output_dir = "pcl-output/" + name;
  c.seed = 20240101;
  c.window = RunWindow{1e5, 1e3, 10.0};
  c.samples = 1000;
  c.engine = Engine::rate;
  if (name == "fig1-noninteracting" || name == "fig1-interacting") {
    c.model = dye_preset(name == "fig1-interacting");
  } else if (name == "fig3-g2") {
    c.model = dye_preset(false);
    c.analysis.g2_max_tau = 5e4;
  } else if (name == "fig6-g1") {
    c.model = dye_preset(true);
    c.engine = Engine::qt;
    c.samples = 112;
    c.window = RunWindow{1e4, 100.0, 1.0};
    c.analysis.histogram = true;
    c.analysis.g1_max_tau = 2000.0;
  } else if (name == "fig7-reservoir-sweep") {
    c.model = dye_preset(false);
    c.engine = Engine::qt;
    c.samples = 84;
    c.window = RunWindow{1e4, 100.0, 1.0};
    c.analysis.histogram = false;
    c.analysis.g1_max_tau = 5000.0;
    c.m_tot_sweep = {100000, 10000000, 1000000000};
  } else if (name == "oracle-small") {
    const OracleInstance o = oracle_small_instance();
    c.model = o.model;
    c.samples = 20;
    c.window = RunWindow{2e4, 100.0, 1.0};
    c.rate.excitations = c.hpm.excitations = c.qt.excitations = o.x;
  } else {
    std::ostringstream os;
    os << "unknown preset '" << name << "' (valid:";
    for (const auto& n : preset_names()) os << " " << n;
    os << ")";
    throw ConfigError(os.str());
  }
  c.validate();
  return c;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : c.to_ini()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pcl
