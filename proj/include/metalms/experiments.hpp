#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metalms/bounds.hpp"
#include "metalms/config.hpp"

namespace metalms {

enum class Preset { CurveComparison, RateCheck, SettlingCheck, BoundsReport, DepmatrixDemo };
std::string to_string(Preset p);
Preset preset_from_string(const std::string& name);

struct ExperimentConfig {
  Preset preset = Preset::CurveComparison;
  int replications = 0;      // 0 selects the preset default
  std::uint64_t seed = 1;
  long T = 0;                // 0 selects the preset default
  std::vector<long> horizons;  // rate-check and depmatrix-demo sweeps
  std::string out_dir;         // empty: no files
  bool median = false;         // report medians instead of means
  // Optional overrides: [source], [target] and [predictor] for fig1-repro.
  std::optional<Config> overrides;

  // Reads an [experiment] section plus any override sections.
  static ExperimentConfig from_config(const Config& cfg);
  void validate() const;
};

// Per-step replication summary of one curve.
struct Band {
  std::vector<double> center;  // mean or median
  std::vector<double> p10;
  std::vector<double> p90;
};

struct ComparisonResult {
  Band J_meta;
  Band J_single;
  Band J_fixed;
  std::vector<long> prefixes;        // offline prefix lengths
  Band offline_error;                // ‖α̂_{T′} − α*‖ per prefix
  std::vector<double> final_meta;    // J_T per replication
  std::vector<double> final_single;
  std::vector<double> final_fixed;
};
ComparisonResult run_comparison(const ExperimentConfig& cfg);

struct RateResult {
  std::vector<long> horizons;
  std::vector<double> mean_error;
  std::vector<double> scaled;  // error·T/log T
  double slope = 0.0;          // log error against log(T/log T)
  double kl = 0.0;
};
RateResult run_rate_check(const ExperimentConfig& cfg);

struct SettlingResult {
  double sigma2 = 0.0;
  double epsilon = 0.0;
  double d = 0.0;
  std::vector<double> final_J;  // per replication
  double mean_J = 0.0;
  Band J;
};
SettlingResult run_settling_check(const ExperimentConfig& cfg);

struct BoundsCase {
  PredictionBound bound;
  BoundInputs inputs;
  double measured_J = 0.0;
  double measured_generalization = 0.0;
};
struct BoundsReportResult {
  std::vector<BoundsCase> cases;
};
// Random tanh-affine configurations with every constant taken from the
// simulator's hidden truth.
BoundsReportResult run_bounds_report(const ExperimentConfig& cfg);

struct DepmatrixResult {
  std::vector<long> horizons;
  std::vector<double> norm_sq;
  double slope = 0.0;
};
DepmatrixResult run_depmatrix_demo(const ExperimentConfig& cfg);

struct ExperimentSummary {
  TermList values;
  std::vector<std::string> files;
};
// Runs the preset and writes its CSV outputs under cfg.out_dir.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace metalms
