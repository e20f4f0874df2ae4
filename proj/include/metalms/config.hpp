#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metalms/bounds.hpp"
#include "metalms/drift.hpp"
#include "metalms/kl.hpp"
#include "metalms/meta_lms.hpp"
#include "metalms/simulate.hpp"

namespace metalms {

// Flat `key = value` text grouped under `[section]` headers. Keys are
// addressed as "section.key". Vectors are comma or space separated.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text, std::string base_dir = ".");

  bool has(const std::string& key) const;
  bool has_section(const std::string& section) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_optional(const std::string& key) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Eigen::VectorXd get_vector(const std::string& key) const;
  Eigen::VectorXd get_vector(const std::string& key, const Eigen::VectorXd& fallback) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, const Eigen::VectorXd& value);
  void save(const std::string& path) const;
  std::string text() const;

  // Directory of the loaded file, for resolving relative paths.
  const std::string& base_dir() const { return base_dir_; }
  std::string resolve_path(const std::string& relative) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::vector<std::string> order_;
  std::string base_dir_ = ".";
};

Eigen::VectorXd parse_vector(const std::string& text);
std::string format_vector(const Eigen::VectorXd& v);

SystemSpec spec_from_config(const Config& cfg, const std::string& section = "system");
void spec_to_config(const SystemSpec& spec, Config& cfg, const std::string& section = "system");

// Bounds A, B, M_f, W_max default to those of `spec` when not given.
PredictorConfig predictor_from_config(const Config& cfg, const SystemSpec& spec,
                                      const std::string& section = "predictor");

BoundInputs bounds_from_config(const Config& cfg, const std::string& section = "bounds");

// `type = finite` (states, initial, kernel or kernel_<t>, T) or
// `type = gaussian` (init_mean, init_std, a, c, s, T).
bool chain_is_gaussian(const Config& cfg, const std::string& section);
FiniteChain finite_chain_from_config(const Config& cfg, const std::string& section);
GaussianLinearChain gaussian_chain_from_config(const Config& cfg, const std::string& section);

// Case 1 columns `K,B,M`; Case 2 columns `V_<r>_<c>..,beta0_<j>..,beta_<j>..,B,M`.
DriftCase read_drift_csv(const std::string& path, DriftCaseId id);

// Loads trajectories and the referenced system description from a manifest.
MultiTrajectoryDataset load_dataset(const std::string& manifest_path);

}  // namespace metalms
