#include "metalms/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metalms/csv.hpp"
#include "metalms/errors.hpp"
#include "metalms/trajectory_io.hpp"

namespace metalms {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw InvalidInput("config key '" + key + "' needs a section prefix");
  return {key.substr(0, dot), key.substr(dot + 1)};
}

Config from_tree(const pt::ptree& tree, std::string base_dir) {
  Config cfg = Config::parse("", std::move(base_dir));
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidInput("config entry '" + section + "' lies outside any section");
    for (const auto& [key, value] : body) cfg.set(section + "." + key, value.data());
  }
  return cfg;
}

}  // namespace

Config Config::load(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    if (!fs::exists(path)) throw IoError("cannot read config '" + path + "'");
    throw InvalidInput(std::string("malformed config: ") + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  return from_tree(tree, parent.empty() ? "." : parent.string());
}

Config Config::parse(const std::string& text, std::string base_dir) {
  Config cfg;
  cfg.base_dir_ = std::move(base_dir);
  if (text.empty()) return cfg;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidInput(std::string("malformed config: ") + e.what());
  }
  return from_tree(tree, cfg.base_dir_);
}

bool Config::has(const std::string& key) const {
  const auto [s, k] = split_key(key);
  const auto it = sections_.find(s);
  return it != sections_.end() && it->second.count(k) > 0;
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

std::string Config::get_string(const std::string& key) const {
  const auto [s, k] = split_key(key);
  const auto it = sections_.find(s);
  if (it == sections_.end() || !it->second.count(k)) throw InvalidInput("missing config key '" + key + "'");
  return it->second.at(k);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return parse_number(v);
  } catch (const InvalidInput&) {
    throw InvalidInput("config key '" + key + "' is not a number: '" + v + "'");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::optional<double> Config::get_optional(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

long Config::get_long(const std::string& key) const {
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw InvalidInput("config key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

long Config::get_long(const std::string& key, long fallback) const { return has(key) ? get_long(key) : fallback; }

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidInput("config key '" + key + "' must be a boolean");
}

Eigen::VectorXd Config::get_vector(const std::string& key) const { return parse_vector(get_string(key)); }

Eigen::VectorXd Config::get_vector(const std::string& key, const Eigen::VectorXd& fallback) const {
  return has(key) ? get_vector(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto [s, k] = split_key(key);
  if (!sections_.count(s)) order_.push_back(s);
  sections_[s][k] = value;
}

void Config::set(const std::string& key, double value) { set(key, format_number(value)); }

void Config::set(const std::string& key, const Eigen::VectorXd& value) { set(key, format_vector(value)); }

std::string Config::text() const {
  pt::ptree tree;
  for (const auto& s : order_)
    for (const auto& [k, v] : sections_.at(s)) tree.put(pt::ptree::path_type(s + "/" + k, '/'), v);
  std::ostringstream out;
  pt::write_ini(out, tree);
  return out.str();
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config '" + path + "'");
  out << text();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string Config::resolve_path(const std::string& relative) const {
  const fs::path p(relative);
  if (p.is_absolute()) return p.string();
  return (fs::path(base_dir_) / p).string();
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(parse_number(tok));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_number(v[i]);
  }
  return out;
}

namespace {

NoiseLaw noise_from(const Config& cfg, const std::string& prefix) {
  NoiseLaw law;
  law.kind = noise_kind_from_string(cfg.get_string(prefix + "_kind", "none"));
  law.scale = cfg.get_double(prefix + "_scale", 0.0);
  law.bound = cfg.get_double(prefix + "_bound", 0.0);
  law.validate();
  return law;
}

void noise_to(const NoiseLaw& law, Config& cfg, const std::string& prefix) {
  cfg.set(prefix + "_kind", to_string(law.kind));
  cfg.set(prefix + "_scale", law.scale);
  cfg.set(prefix + "_bound", law.bound);
}

}  // namespace

SystemSpec spec_from_config(const Config& cfg, const std::string& section) {
  const std::string s = section + ".";
  SystemSpec spec;
  spec.id = cfg.get_string(s + "id", "custom");
  spec.family = family_from_string(cfg.get_string(s + "family"));
  spec.alpha_star = cfg.get_vector(s + "alpha_star");
  spec.box = CompactBox(cfg.get_vector(s + "box_lo"), cfg.get_vector(s + "box_hi"));

  BetaSchedule& b = spec.beta;
  b.kind = beta_kind_from_string(cfg.get_string(s + "beta_kind", "constant"));
  b.base = cfg.get_vector(s + "beta_base", Eigen::VectorXd());
  b.amplitude = cfg.get_vector(s + "beta_amplitude", Eigen::VectorXd());
  b.period = cfg.get_double(s + "beta_period", 1.0);
  b.phase = cfg.get_double(s + "beta_phase", 0.0);
  b.boost = cfg.get_double(s + "beta_boost", 0.0);
  b.horizon = cfg.get_double(s + "beta_horizon", 1.0);

  RegressorDynamics& r = spec.regressor;
  r.kind = regressor_kind_from_string(cfg.get_string(s + "regressor_kind", "exogenous"));
  r.mean = cfg.get_vector(s + "regressor_mean", Eigen::VectorXd::Zero(1));
  r.slope = cfg.get_double(s + "regressor_slope", 0.0);
  r.innovation = noise_from(cfg, s + "innovation");
  r.gain = cfg.get_double(s + "regressor_gain", 100.0);
  r.init_mean = cfg.get_double(s + "init_mean", 0.0);
  r.init_std = cfg.get_double(s + "init_std", 1.0);
  r.y_lags = static_cast<int>(cfg.get_long(s + "y_lags", 1));
  r.u_lags = static_cast<int>(cfg.get_long(s + "u_lags", 0));
  r.input = noise_from(cfg, s + "input");
  spec.noise = noise_from(cfg, s + "noise");

  spec.p = r.dim();
  const auto [n, m] = family_dims(spec.family, spec.p, static_cast<int>(spec.alpha_star.size()));
  spec.n = n;
  spec.m = m;
  spec.ball_radius = cfg.get_double(s + "ball_radius", kInf);
  spec.feature_bound = cfg.get_double(s + "feature_bound", kInf);
  spec.output_bound = cfg.get_double(s + "output_bound", kInf);
  spec.lipschitz = cfg.get_optional(s + "lipschitz");
  spec.validate();
  return spec;
}

void spec_to_config(const SystemSpec& spec, Config& cfg, const std::string& section) {
  const std::string s = section + ".";
  cfg.set(s + "id", spec.id);
  cfg.set(s + "family", to_string(spec.family));
  cfg.set(s + "alpha_star", spec.alpha_star);
  cfg.set(s + "box_lo", spec.box.lo);
  cfg.set(s + "box_hi", spec.box.hi);
  const BetaSchedule& b = spec.beta;
  cfg.set(s + "beta_kind", to_string(b.kind));
  if (b.base.size()) cfg.set(s + "beta_base", b.base);
  if (b.amplitude.size()) cfg.set(s + "beta_amplitude", b.amplitude);
  cfg.set(s + "beta_period", b.period);
  cfg.set(s + "beta_phase", b.phase);
  cfg.set(s + "beta_boost", b.boost);
  cfg.set(s + "beta_horizon", b.horizon);
  const RegressorDynamics& r = spec.regressor;
  cfg.set(s + "regressor_kind", to_string(r.kind));
  if (r.mean.size()) cfg.set(s + "regressor_mean", r.mean);
  cfg.set(s + "regressor_slope", r.slope);
  noise_to(r.innovation, cfg, s + "innovation");
  cfg.set(s + "regressor_gain", r.gain);
  cfg.set(s + "init_mean", r.init_mean);
  cfg.set(s + "init_std", r.init_std);
  cfg.set(s + "y_lags", static_cast<double>(r.y_lags));
  cfg.set(s + "u_lags", static_cast<double>(r.u_lags));
  noise_to(r.input, cfg, s + "input");
  noise_to(spec.noise, cfg, s + "noise");
  cfg.set(s + "ball_radius", spec.ball_radius);
  cfg.set(s + "feature_bound", spec.feature_bound);
  cfg.set(s + "output_bound", spec.output_bound);
  if (spec.lipschitz) cfg.set(s + "lipschitz", *spec.lipschitz);
}

PredictorConfig predictor_from_config(const Config& cfg, const SystemSpec& spec, const std::string& section) {
  const std::string s = section + ".";
  PredictorConfig pc;
  pc.lambda = cfg.get_double(s + "lambda", 0.0);
  pc.gamma = cfg.get_double(s + "gamma", 0.5);
  pc.B = cfg.get_double(s + "B", spec.ball_radius);
  pc.A = cfg.get_double(s + "A", spec.feature_bound);
  pc.M_f = cfg.get_double(s + "M_f", spec.output_bound);
  pc.W_max = cfg.get_double(s + "W_max", spec.noise.max_abs());
  pc.d = cfg.get_double(s + "d");
  pc.m0 = cfg.get_optional(s + "m0");
  pc.claim_exp_concavity = cfg.get_bool(s + "claim_exp_concavity", false);
  const long N2 = cfg.get_long(s + "N2", 1);
  if (N2 < 1) throw InvalidInput("predictor N2 must be at least 1");
  const Eigen::VectorXd informed = cfg.has(s + "informed") ? cfg.get_vector(s + "informed") : spec.beta.at(0);
  if (informed.size() != spec.m) throw InvalidInput("informed initial estimate dimension differs from m");
  pc.beta0 = initial_estimates(informed, static_cast<int>(N2), pc.B, cfg.get_double(s + "init_mean", 0.0),
                               cfg.get_double(s + "init_sd", 1.0),
                               static_cast<std::uint64_t>(cfg.get_long(s + "init_seed", 0)));
  if (cfg.has(s + "w0")) pc.w0 = cfg.get_vector(s + "w0");
  pc.resolve();
  return pc;
}

BoundInputs bounds_from_config(const Config& cfg, const std::string& section) {
  const std::string s = section + ".";
  BoundInputs in;
  in.L = cfg.get_double(s + "L", in.L);
  in.n = static_cast<int>(cfg.get_long(s + "n", in.n));
  in.p = static_cast<int>(cfg.get_long(s + "p", in.p));
  in.R_M = cfg.get_double(s + "R_M", in.R_M);
  in.b1 = cfg.get_double(s + "b1", in.b1);
  in.b2 = cfg.get_double(s + "b2", in.b2);
  in.b1p = cfg.get_double(s + "b1p", in.b1p);
  in.b2p = cfg.get_double(s + "b2p", in.b2p);
  in.sigma_v = cfg.get_double(s + "sigma_v", in.sigma_v);
  in.eps_star = cfg.get_double(s + "eps_star", in.eps_star);
  in.kl = cfg.get_double(s + "kl", in.kl);
  in.N1 = cfg.get_long(s + "N1", in.N1);
  in.T = cfg.get_long(s + "T", in.T);
  in.empirical_offset = cfg.get_optional(s + "empirical_offset");
  in.L1 = cfg.get_double(s + "L1", in.L1);
  if (cfg.has(s + "L0_schedule")) {
    const Eigen::VectorXd v = cfg.get_vector(s + "L0_schedule");
    in.L0_schedule.assign(v.data(), v.data() + v.size());
  }
  in.L0T = cfg.get_double(s + "L0T", in.L0T);
  in.delta_T = cfg.get_double(s + "delta_T", in.delta_T);
  in.sigma_T2 = cfg.get_double(s + "sigma_T2", in.sigma_T2);
  in.A = cfg.get_double(s + "A", in.A);
  in.B = cfg.get_double(s + "B", in.B);
  in.gamma = cfg.get_double(s + "gamma", in.gamma);
  in.d = cfg.get_double(s + "d", in.d);
  in.W_max = cfg.get_double(s + "W_max", in.W_max);
  in.M_f = cfg.get_double(s + "M_f", in.M_f);
  in.lambda = cfg.get_optional(s + "lambda");
  return in;
}

bool chain_is_gaussian(const Config& cfg, const std::string& section) {
  const std::string type = cfg.get_string(section + ".type", "finite");
  if (type == "gaussian") return true;
  if (type == "finite") return false;
  throw InvalidInput("chain type must be 'finite' or 'gaussian'");
}

FiniteChain finite_chain_from_config(const Config& cfg, const std::string& section) {
  const std::string s = section + ".";
  const Eigen::VectorXd init = cfg.get_vector(s + "initial");
  const long S = init.size();
  const long T = cfg.get_long(s + "T");
  if (T < 1) throw InvalidInput("chain horizon T must be at least 1");
  auto kernel = [&](const std::string& key) {
    const Eigen::VectorXd v = cfg.get_vector(key);
    if (v.size() != S * S) throw InvalidInput("kernel '" + key + "' must hold S*S entries");
    return Eigen::MatrixXd(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), S, S));
  };
  FiniteChain c;
  c.initial = init;
  for (long t = 1; t < T; ++t) {
    const std::string k = s + "kernel_" + std::to_string(t);
    c.kernels.push_back(kernel(cfg.has(k) ? k : s + "kernel"));
  }
  c.validate();
  return c;
}

GaussianLinearChain gaussian_chain_from_config(const Config& cfg, const std::string& section) {
  const std::string s = section + ".";
  GaussianLinearChain::Step step;
  step.a = cfg.get_double(s + "a", 1.0);
  step.c = cfg.get_double(s + "c", 0.0);
  step.s = cfg.get_double(s + "s", 1.0);
  const long T = cfg.get_long(s + "T");
  if (T < 1) throw InvalidInput("chain horizon T must be at least 1");
  GaussianLinearChain c = GaussianLinearChain::homogeneous(cfg.get_double(s + "init_mean", 0.0),
                                                           cfg.get_double(s + "init_std", 1.0), step,
                                                           static_cast<int>(T));
  c.validate();
  return c;
}

DriftCase read_drift_csv(const std::string& path, DriftCaseId id) {
  const CsvDocument doc = read_csv(path);
  auto col = [&](const std::string& name) {
    const int c = doc.column(name);
    if (c < 0) throw InvalidInput("drift inputs lack column '" + name + "'");
    return c;
  };
  DriftCase dc;
  dc.id = id;
  if (id == DriftCaseId::Case1) {
    const int cK = col("K"), cB = col("B"), cM = col("M");
    for (const auto& row : doc.rows)
      dc.scalar_steps.push_back({parse_number(row[cK]), parse_number(row[cB]), parse_number(row[cM])});
    return dc;
  }
  int m = 0;
  while (doc.column("beta0_" + std::to_string(m)) >= 0) ++m;
  if (m == 0) throw InvalidInput("drift inputs lack beta0_0");
  const int cB = col("B"), cM = col("M");
  for (const auto& row : doc.rows) {
    DriftStepMatrix st;
    st.V.resize(m, m);
    st.beta0.resize(m);
    st.beta.resize(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c)
        st.V(r, c) = parse_number(row[col("V_" + std::to_string(r) + "_" + std::to_string(c))]);
      st.beta0[r] = parse_number(row[col("beta0_" + std::to_string(r))]);
      st.beta[r] = parse_number(row[col("beta_" + std::to_string(r))]);
    }
    st.B = parse_number(row[cB]);
    st.M = parse_number(row[cM]);
    dc.matrix_steps.push_back(std::move(st));
  }
  return dc;
}

MultiTrajectoryDataset load_dataset(const std::string& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  auto rel = [&](const std::string& f) { return fs::path(f).is_absolute() ? f : (dir / f).string(); };
  const SystemSpec spec = spec_from_config(Config::load(rel(m.spec_file)));
  MultiTrajectoryDataset ds;
  ds.spec = std::make_shared<const SystemSpec>(spec);
  ds.master_seed = m.seed;
  ds.seeds = m.seeds;
  for (const auto& f : m.files) ds.trajectories.push_back(read_trajectory_csv(rel(f)));
  if (static_cast<int>(ds.trajectories.size()) != m.N1)
    throw InvalidInput("manifest lists a different number of trajectories than N1");
  ds.validate();
  if (ds.horizon() != m.T) throw InvalidInput("manifest horizon differs from the trajectory files");
  return ds;
}

}  // namespace metalms
