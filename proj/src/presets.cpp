#include "metalms/presets.hpp"

#include <algorithm>
#include <cmath>

namespace metalms::presets {

namespace {

SystemSpec sigmoid_common() {
  SystemSpec s;
  s.family = FeatureFamily::SigmoidDrift;
  s.n = 2;
  s.m = 2;
  s.p = 1;
  s.alpha_star = Eigen::Vector2d(1.5, -0.5);
  s.box = CompactBox(Eigen::Vector2d(-3.5, -5.5), Eigen::Vector2d(6.5, 4.5));
  s.regressor.kind = RegressorDynamics::Kind::SigmoidMarkov;
  s.regressor.gain = 100.0;
  s.regressor.innovation = NoiseLaw::gaussian(1.0);
  s.regressor.init_mean = 10.0;
  s.regressor.init_std = 1.0;
  s.noise = NoiseLaw::gaussian(1.0);
  s.ball_radius = std::sqrt(1e7);
  s.feature_bound = std::sqrt(2.0);  // σ_t ∈ (0, 1]
  return s;
}

}  // namespace

SystemSpec sigmoid_source() {
  SystemSpec s = sigmoid_common();
  s.id = "sigmoid-source";
  s.beta = BetaSchedule::constant(Eigen::Vector2d(20.0, -10.0));
  s.output_bound = 30.0;
  return s;
}

SystemSpec sigmoid_target() {
  SystemSpec s = sigmoid_common();
  s.id = "sigmoid-target";
  s.beta = BetaSchedule::sigmoid_drift();
  s.output_bound = 50.0;
  return s;
}

PredictorConfig sigmoid_predictor(std::uint64_t seed) {
  PredictorConfig c;
  c.lambda = 1e-3;
  c.gamma = 0.5;
  c.d = 1e3;
  c.B = std::sqrt(1e7);
  c.A = std::sqrt(2.0);
  c.beta0 = initial_estimates(Eigen::Vector2d(10.0, -10.0), kSigmoidModels, c.B, -3.0, 1.0, seed);
  c.resolve();
  return c;
}

PredictorConfig sigmoid_single_model() {
  PredictorConfig c;
  c.lambda = 1e-3;
  c.gamma = 0.5;
  c.d = 1e3;
  c.B = std::sqrt(1e7);
  c.A = std::sqrt(2.0);
  c.beta0 = RowMatrix(1, 2);
  c.beta0 << 10.0, -10.0;
  c.resolve();
  return c;
}

RatePreset rate_check() {
  RatePreset p;
  SystemSpec s;
  s.id = "rate-train";
  s.family = FeatureFamily::TanhIndex;
  s.n = 2;
  s.m = 1;
  s.p = 2;
  s.alpha_star = Eigen::Vector2d(0.8, 1.0);
  s.box = CompactBox(Eigen::Vector2d(0.0, 0.2), Eigen::Vector2d(1.6, 1.8));
  s.beta = BetaSchedule::constant(Eigen::VectorXd::Constant(1, 2.0));
  s.regressor.kind = RegressorDynamics::Kind::Autoregressive;
  s.regressor.y_lags = 1;
  s.regressor.u_lags = 1;
  s.regressor.init_mean = 0.0;
  s.regressor.init_std = 1.0;
  s.regressor.input = NoiseLaw::truncated_gaussian(1.0, 5.0);
  s.noise = NoiseLaw::truncated_gaussian(1.0, 5.0);
  s.ball_radius = 2.0;
  s.feature_bound = 1.0;
  s.output_bound = 2.0;
  p.train = s;
  s.id = "rate-shifted";
  s.regressor.init_mean = 1.0;
  p.shifted = s;
  p.horizons = {250, 500, 1000, 2000, 4000, 8000};
  return p;
}

SettlingPreset settling() {
  SettlingPreset p;
  SystemSpec s;
  s.family = FeatureFamily::TanhAffine;
  s.n = 2;
  s.m = 2;
  s.p = 1;
  s.alpha_star = Eigen::Vector2d(1.013, 0.487);
  s.box = CompactBox(Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(2.0, 1.0));
  s.regressor.kind = RegressorDynamics::Kind::Exogenous;
  s.regressor.mean = Eigen::VectorXd::Zero(1);
  s.regressor.innovation = NoiseLaw::truncated_gaussian(1.0, 3.0);
  s.noise = NoiseLaw::uniform(1.0);
  const Eigen::Vector2d beta0(2.0, 1.0);
  s.ball_radius = 1.2 * beta0.norm() + 1e-9;
  s.feature_bound = std::sqrt(2.0);
  s.output_bound = 1.2 * (beta0.cwiseAbs().sum());
  p.source = s;
  p.source.id = "settling-source";
  p.source.beta = BetaSchedule::constant(beta0);
  p.target = s;
  p.target.id = "settling-target";
  p.target.beta.kind = BetaSchedule::Kind::DecayingScale;
  p.target.beta.base = beta0;
  p.target.beta.boost = 0.2;
  p.target.beta.horizon = 50.0;
  const double A = s.feature_bound, W = s.noise.max_abs();
  p.epsilon = 0.2 * s.noise.variance();
  p.d = std::max(2.0 * A * A / ((1.0 - p.gamma) * (1.0 - p.gamma)), 8.0 * A * A * W * W / p.epsilon);
  return p;
}

PredictorConfig settling_predictor(const SettlingPreset& p, std::uint64_t seed) {
  PredictorConfig c;
  c.gamma = p.gamma;
  c.d = p.d;
  c.B = p.target.ball_radius;
  c.A = p.target.feature_bound;
  c.M_f = p.target.output_bound;
  c.W_max = p.target.noise.max_abs();
  c.claim_exp_concavity = true;
  c.beta0 = initial_estimates(p.source.beta.at(0), p.models, c.B, 0.0, 1.0, seed);
  c.resolve();
  return c;
}

namespace {

SystemSpec bounds_common(const BoundsSystem& b) {
  SystemSpec s;
  s.family = FeatureFamily::TanhAffine;
  s.n = 2;
  s.m = 2;
  s.p = 1;
  s.alpha_star = Eigen::Vector2d(1.013, -0.287);
  s.box = CompactBox(Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(2.0, 1.0));
  s.regressor.kind = RegressorDynamics::Kind::Exogenous;
  s.regressor.mean = Eigen::VectorXd::Zero(1);
  s.regressor.innovation = NoiseLaw::truncated_gaussian(b.x_sd, b.x_bound);
  s.noise = NoiseLaw::uniform(b.noise);
  s.feature_bound = std::sqrt(2.0);
  // |∂f/∂α| = |β₀| sech²(·)‖(x, 1)‖ ≤ |β₀|·sqrt(X² + 1).
  s.lipschitz = b.beta_scale * std::sqrt(b.x_bound * b.x_bound + 1.0);
  return s;
}

Eigen::Vector2d bounds_beta0(const BoundsSystem& b) { return Eigen::Vector2d(b.beta_scale, 0.5 * b.beta_scale); }

}  // namespace

SystemSpec bounds_source(const BoundsSystem& b) {
  SystemSpec s = bounds_common(b);
  s.id = "bounds-source";
  const Eigen::Vector2d beta0 = bounds_beta0(b);
  s.beta = BetaSchedule::constant(beta0);
  s.ball_radius = beta0.norm();
  s.output_bound = beta0.cwiseAbs().sum();
  return s;
}

SystemSpec bounds_target(const BoundsSystem& b) {
  SystemSpec s = bounds_common(b);
  s.id = "bounds-target";
  const Eigen::Vector2d beta0 = bounds_beta0(b);
  s.beta.kind = BetaSchedule::Kind::Sinusoid;
  s.beta.base = beta0;
  s.beta.amplitude = Eigen::Vector2d(b.drift, -b.drift);
  s.beta.period = b.period;
  s.ball_radius = beta0.norm() + b.drift * std::sqrt(2.0);
  s.output_bound = beta0.cwiseAbs().sum() + 2.0 * b.drift;
  return s;
}

FiniteChain iid_chain(int T) {
  Eigen::Matrix2d K;
  K << 0.5, 0.5, 0.5, 0.5;
  return FiniteChain::homogeneous(Eigen::Vector2d(0.5, 0.5), K, T);
}

FiniteChain copy_chain(int T) {
  return FiniteChain::homogeneous(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity(), T);
}

FiniteChain mixing_chain(int T) {
  Eigen::Matrix2d K;
  K << 0.55, 0.45, 0.45, 0.55;
  return FiniteChain::homogeneous(Eigen::Vector2d(0.5, 0.5), K, T);
}

}  // namespace metalms::presets
