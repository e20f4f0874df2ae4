#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "metalms/system.hpp"

namespace metalms {

// Simulation-only record of the quantities the learner never sees.
struct HiddenTruth {
  RowMatrix beta;              // row t holds β_t, t = 0..T−1
  Eigen::VectorXd beta_final;  // β_T, needed for the last drift increment
  Eigen::VectorXd noise;       // noise(t) = w_{t+1}
  Eigen::VectorXd mismatch;    // mismatch(t) = ε_t; empty until an estimate is attached
};

// x(t, ·) = x_t and y(t) = y_{t+1}.
struct Trajectory {
  RowMatrix x;
  Eigen::VectorXd y;
  std::optional<HiddenTruth> truth;

  long length() const { return static_cast<long>(y.size()); }
  int regressor_dim() const { return static_cast<int>(x.cols()); }
};

struct MultiTrajectoryDataset {
  std::shared_ptr<const SystemSpec> spec;
  std::vector<Trajectory> trajectories;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;

  int count() const { return static_cast<int>(trajectories.size()); }
  long horizon() const { return trajectories.empty() ? 0 : trajectories.front().length(); }
  void validate() const;
};

// N₁ trajectories of y_{t+1} = β⁰(t)ᵀφ_t(α*, x_t) + v_{t+1}, one sub-stream each.
MultiTrajectoryDataset simulate_source(const SystemSpec& spec, int N1, long T, std::uint64_t seed);

// One target path y_{t+1} = β_tᵀφ_t(α*, x_t) + w_{t+1}. With an estimate the
// mismatch ε_t = β_tᵀ(φ_t(α*, x_t) − φ_t(α̂, x_t)) is recorded as well.
Trajectory simulate_target(const SystemSpec& spec, long T, std::uint64_t seed,
                           const std::optional<Eigen::VectorXd>& alpha_hat = std::nullopt);

void attach_mismatch(const SystemSpec& spec, Trajectory& traj, const Eigen::VectorXd& alpha_hat);

// (1/T)Σ‖β_{t+1} − β_t‖², (1/T)Σ‖β_{t+1} − β_t‖ and (1/T)Σw²_{t+1}.
double drift_energy(const HiddenTruth& truth);
double drift_mean(const HiddenTruth& truth);
double noise_power(const HiddenTruth& truth);

}  // namespace metalms
