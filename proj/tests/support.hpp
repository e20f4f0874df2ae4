#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "metalms/meta_lms.hpp"
#include "metalms/rng.hpp"
#include "metalms/simulate.hpp"

namespace testsupport {

using namespace metalms;

// Fresh scratch directory under the build tree's temp area.
inline std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("metalms_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// y_{t+1} = β·α·x_t with x_t = t, no noise.
inline SystemSpec linear_ramp(double alpha, double beta) {
  SystemSpec s;
  s.id = "linear-ramp";
  s.family = FeatureFamily::LinearScalar;
  s.n = s.m = s.p = 1;
  s.alpha_star = Eigen::VectorXd::Constant(1, alpha);
  s.box = CompactBox(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 4.0));
  s.beta = BetaSchedule::constant(Eigen::VectorXd::Constant(1, beta));
  s.regressor.kind = RegressorDynamics::Kind::Exogenous;
  s.regressor.mean = Eigen::VectorXd::Zero(1);
  s.regressor.slope = 1.0;
  return s;
}

// Random tanh-affine system with i.i.d. bounded regressor and bounded noise,
// all declared bounds exact.
inline SystemSpec random_tanh_system(Rng& rng, bool drifting) {
  SystemSpec s;
  s.id = "random-tanh";
  s.family = FeatureFamily::TanhAffine;
  s.n = s.m = 2;
  s.p = 1;
  s.alpha_star = Eigen::Vector2d(uniform(rng, 0.3, 1.7), uniform(rng, -0.8, 0.8));
  s.box = CompactBox(Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(2.0, 1.0));
  const Eigen::Vector2d base(uniform(rng, 0.5, 2.0), uniform(rng, -1.0, 1.0));
  if (drifting) {
    s.beta.kind = BetaSchedule::Kind::Sinusoid;
    s.beta.base = base;
    s.beta.amplitude = Eigen::Vector2d(uniform(rng, 0.0, 0.4), uniform(rng, -0.4, 0.4));
    s.beta.period = uniform(rng, 20.0, 400.0);
    s.beta.phase = uniform(rng, 0.0, 6.0);
  } else {
    s.beta = BetaSchedule::constant(base);
  }
  s.regressor.kind = RegressorDynamics::Kind::Exogenous;
  s.regressor.mean = Eigen::VectorXd::Zero(1);
  s.regressor.innovation = NoiseLaw::truncated_gaussian(1.0, 3.0);
  s.noise = NoiseLaw::uniform(uniform(rng, 0.05, 1.0));
  const double bnorm = base.norm() + (drifting ? s.beta.amplitude.norm() : 0.0);
  s.ball_radius = 1.05 * bnorm;
  s.feature_bound = std::sqrt(2.0);
  s.output_bound = std::abs(base[0]) + std::abs(base[1]) + (drifting ? s.beta.amplitude.lpNorm<1>() : 0.0);
  return s;
}

// Predictor with N₂ random distinct models inside the ball, random positive
// weights and λ strictly below the exp-concavity threshold.
inline PredictorConfig random_predictor(Rng& rng, const SystemSpec& spec, int N2, double d_factor) {
  PredictorConfig c;
  c.gamma = uniform(rng, 0.2, 0.8);
  c.A = spec.feature_bound;
  c.B = spec.ball_radius;
  c.M_f = spec.output_bound;
  c.W_max = spec.noise.max_abs();
  c.d = d_factor * c.A * c.A / ((1.0 - c.gamma) * (1.0 - c.gamma));
  c.lambda = uniform(rng, 0.1, 0.99) * exp_concavity_threshold(c.M_f, c.A, c.B, c.W_max);
  c.claim_exp_concavity = true;
  c.beta0.resize(N2, spec.m);
  for (int i = 0; i < N2; ++i) {
    Eigen::VectorXd b(spec.m);
    for (int j = 0; j < spec.m; ++j) b[j] = uniform(rng, -c.B, c.B);
    c.beta0.row(i) = project_ball(b, c.B).transpose();
  }
  c.w0.resize(N2);
  for (int i = 0; i < N2; ++i) c.w0[i] = uniform(rng, 0.1, 1.0);
  c.w0 /= c.w0.sum();
  return c;
}

}  // namespace testsupport
