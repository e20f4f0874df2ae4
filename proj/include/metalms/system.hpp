#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>

#include "metalms/rng.hpp"

namespace metalms {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Axis-aligned parameter box M.
struct CompactBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  CompactBox() = default;
  CompactBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lo.size()); }
  // Half the diameter, ‖hi − lo‖/2.
  double radius() const { return 0.5 * (hi - lo).norm(); }
  bool contains(const VecRef& a, double tol = 1e-12) const;
  // Corner selected by the bits of `mask` (bit i set → hi_i).
  Eigen::VectorXd corner(unsigned long mask) const;
};

// D = {β : ‖β‖ ≤ B}.
struct BallDomain {
  double radius = 0.0;

  explicit BallDomain(double B);
  bool contains(const VecRef& beta, double rel_tol = 1e-12) const;
};

enum class NoiseKind { None, Gaussian, TruncatedGaussian, Uniform };

// Scalar zero-mean noise law. `scale` is the Gaussian standard deviation,
// `bound` the truncation level or the uniform half-width.
struct NoiseLaw {
  NoiseKind kind = NoiseKind::None;
  double scale = 0.0;
  double bound = 0.0;

  static NoiseLaw none() { return {}; }
  static NoiseLaw gaussian(double sigma);
  static NoiseLaw truncated_gaussian(double sigma, double bound);
  static NoiseLaw uniform(double half_width);

  double sample(Rng& rng) const;
  double max_abs() const;
  double variance() const;
  double sub_gaussian_proxy() const;
  void validate() const;
};

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

// Explicit feature maps φ_t(α, x); the model is f_t = βᵀφ_t(α, x).
enum class FeatureFamily {
  LinearScalar,     // φ = α₀x₀
  QuadraticScalar,  // φ = α₀²x₀
  SigmoidDrift,     // φ = (σ_t(α₀x₀ + α₁), 1) with σ_t(z) = 1/(t + e^{−z})
  TanhAffine,       // φ = (tanh(α₀x₀ + α₁), 1)
  TanhIndex,        // φ = tanh(Σ_{j<n} α_j x_j + Σ_{j≥n} x_j)
};

std::string to_string(FeatureFamily family);
FeatureFamily family_from_string(const std::string& name);

// Time index used by the time-varying families. The t = 0 step reuses the
// t = 1 values because the schedules involve 1/t² and 1/log(t+1).
inline long schedule_clock(long t) { return t < 1 ? 1 : t; }

// σ_t(z) = 1/(t + e^{−z}) on the clocked time index.
double clocked_sigmoid(long t, double z);

struct BetaSchedule {
  enum class Kind {
    Constant,       // β_t = base
    SigmoidDrift,     // (a_t, d_t) = (−50σ_t(t) + 1/t², 15σ_t(t) + 2/log(t+1))
    DecayingScale,  // β_t = (1 + boost/(1 + t/horizon))·base
    Sinusoid,       // β_t = base + amplitude·sin(2πt/period + phase)
  };
  Kind kind = Kind::Constant;
  Eigen::VectorXd base;
  Eigen::VectorXd amplitude;
  double period = 1.0;
  double phase = 0.0;
  double boost = 0.0;
  double horizon = 1.0;

  static BetaSchedule constant(Eigen::VectorXd value);
  static BetaSchedule sigmoid_drift();

  Eigen::VectorXd at(long t) const;
  int dim() const;
};

std::string to_string(BetaSchedule::Kind kind);
BetaSchedule::Kind beta_kind_from_string(const std::string& name);

struct RegressorDynamics {
  enum class Kind {
    Exogenous,      // x_t = mean + slope·t + innovation (i.i.d. innovations)
    SigmoidMarkov,  // x_{t+1} = gain·σ_t(x_t) + innovation, x₀ ~ N(init_mean, init_std²)
    Autoregressive  // x_t = (y_t, …, y_{t−y_lags+1}, u_t, …, u_{t−u_lags+1}), u i.i.d.
  };
  Kind kind = Kind::Exogenous;
  Eigen::VectorXd mean;
  double slope = 0.0;
  NoiseLaw innovation;
  double gain = 100.0;
  double init_mean = 0.0;
  double init_std = 1.0;
  int y_lags = 1;
  int u_lags = 0;
  NoiseLaw input;

  int dim() const;
};

std::string to_string(RegressorDynamics::Kind kind);
RegressorDynamics::Kind regressor_kind_from_string(const std::string& name);

struct SystemSpec {
  std::string id = "custom";
  FeatureFamily family = FeatureFamily::LinearScalar;
  int n = 1;  // dim α
  int m = 1;  // dim β
  int p = 1;  // dim x
  Eigen::VectorXd alpha_star;
  CompactBox box;
  BetaSchedule beta;
  RegressorDynamics regressor;
  NoiseLaw noise;
  double ball_radius = kInf;    // B
  double feature_bound = kInf;  // A
  double output_bound = kInf;   // M_f
  std::optional<double> lipschitz;

  // Throws InvalidInput when the pieces do not fit together.
  void validate() const;
};

// Dimensions (n, m) implied by a family for regressor dimension p.
std::pair<int, int> family_dims(FeatureFamily family, int p, int n_hint);

// φ_t(α, x) written into `out` (size m). No box check; this is the hot path.
void features_into(const SystemSpec& spec, const VecRef& alpha, const VecRef& x, long t,
                   Eigen::Ref<Eigen::VectorXd> out);
Eigen::VectorXd features(const SystemSpec& spec, const VecRef& alpha, const VecRef& x, long t);

// ∂φ/∂α, an m×n matrix.
Eigen::MatrixXd feature_jacobian(const SystemSpec& spec, const VecRef& alpha, const VecRef& x,
                                 long t);

// βᵀφ_t(α, x) with dimension and box checks.
double eval_model(const SystemSpec& spec, const VecRef& alpha, const VecRef& beta,
                  const VecRef& x, long t);

}  // namespace metalms
