#pragma once

#include <cstdint>
#include <vector>

#include "metalms/dependency.hpp"
#include "metalms/meta_lms.hpp"
#include "metalms/simulate.hpp"

namespace metalms::presets {

// Sigmoid-drift system: y = a σ_t(bx + c) + d + w with (b, c) = (1.5, −0.5),
// x_{t+1} = 100σ_t(x_t) + w′, x₀ ~ N(10, 1), unit Gaussian noises.
// The offline system holds (a, d) ≡ (20, −10).
SystemSpec sigmoid_source();
// Same dynamics with a_t = −50σ_t(t) + 1/t², d_t = 15σ_t(t) + 2/log(t + 1).
SystemSpec sigmoid_target();
inline constexpr long kSigmoidSegments = 50;
inline constexpr int kSigmoidModels = 500;
// N₂ = 500, λ = 10⁻³, d = 10³, B² = 10⁷, uniform weights, first model at
// (10, −10), the rest drawn from N(−3, 1) per component.
PredictorConfig sigmoid_predictor(std::uint64_t seed);
// The lone LMS model started at (10, −10).
PredictorConfig sigmoid_single_model();

// Scalar autoregression y_{t+1} = 2 tanh(α₀y_t + α₁u_t) + v_{t+1}, α* = (0.8, 1),
// with truncated-Gaussian u and v, trained from y₀ ~ N(0, 1). `shifted`
// starts from y₀ ~ N(1, 1), so the path laws differ by KL = 1/2.
struct RatePreset {
  SystemSpec train;
  SystemSpec shifted;
  long segments = 20;
  int levels = 4;
  int fresh = 4;  // evaluation trajectories per replication
  std::vector<long> horizons;
};
RatePreset rate_check();

// tanh-affine target whose β_t = (1 + 0.2/(1 + t/50))β⁰ settles on β⁰ while the
// regressor is i.i.d. and the noise uniform.
struct SettlingPreset {
  SystemSpec source;
  SystemSpec target;
  double gamma = 0.5;
  double epsilon = 0.0;  // 0.2σ²
  double d = 0.0;        // max(2A²/(1−γ)², 8A²W²/ε)
  int models = 8;
  long source_T = 1000;
  long segments = 40;
};
SettlingPreset settling();
PredictorConfig settling_predictor(const SettlingPreset& p, std::uint64_t seed);

// Small tanh-affine system with an i.i.d. truncated-Gaussian regressor and
// uniform noise; Lipschitz constant and all bounds are exact.
struct BoundsSystem {
  double beta_scale = 1.5;
  double drift = 0.2;  // sinusoid amplitude of β_t
  double period = 400.0;
  double noise = 0.5;  // uniform half-width
  double x_sd = 1.0;
  double x_bound = 3.0;
};
SystemSpec bounds_source(const BoundsSystem& b);
SystemSpec bounds_target(const BoundsSystem& b);

// Two-state chains: i.i.d. uniform, Z_t = Z_0 copy, and a symmetric flip
// chain with stay probability 0.55.
FiniteChain iid_chain(int T);
FiniteChain copy_chain(int T);
FiniteChain mixing_chain(int T);

}  // namespace metalms::presets
