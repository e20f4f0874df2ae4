#include "metalms/system.hpp"

#include <cmath>
#include <numbers>

#include "metalms/errors.hpp"

namespace metalms {

CompactBox::CompactBox(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.size() == 0) throw InvalidInput("box bounds must have equal nonzero length");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) throw InvalidInput("box bounds must be finite");
    if (lo[i] > hi[i]) throw InvalidInput("box requires lo <= hi in every coordinate");
  }
  if (!(radius() > 0.0)) throw InvalidInput("box radius must be positive");
}

bool CompactBox::contains(const VecRef& a, double tol) const {
  if (a.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double slack = tol * std::max(1.0, std::abs(hi[i] - lo[i]));
    if (!(a[i] >= lo[i] - slack && a[i] <= hi[i] + slack)) return false;
  }
  return true;
}

Eigen::VectorXd CompactBox::corner(unsigned long mask) const {
  Eigen::VectorXd c(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) c[i] = ((mask >> i) & 1UL) ? hi[i] : lo[i];
  return c;
}

BallDomain::BallDomain(double B) : radius(B) {
  if (!(B >= 0.0)) throw InvalidInput("ball radius must be nonnegative");
}

bool BallDomain::contains(const VecRef& beta, double rel_tol) const {
  return beta.norm() <= radius * (1.0 + rel_tol) + rel_tol;
}

NoiseLaw NoiseLaw::gaussian(double sigma) { return {NoiseKind::Gaussian, sigma, 0.0}; }
NoiseLaw NoiseLaw::truncated_gaussian(double sigma, double bound) {
  return {NoiseKind::TruncatedGaussian, sigma, bound};
}
NoiseLaw NoiseLaw::uniform(double half_width) { return {NoiseKind::Uniform, 0.0, half_width}; }

void NoiseLaw::validate() const {
  switch (kind) {
    case NoiseKind::None:
      return;
    case NoiseKind::Gaussian:
      if (!(scale > 0.0)) throw InvalidInput("gaussian noise needs scale > 0");
      return;
    case NoiseKind::TruncatedGaussian:
      if (!(scale > 0.0) || !(bound > 0.0) || !std::isfinite(bound))
        throw InvalidInput("truncated gaussian noise needs scale > 0 and a finite bound > 0");
      return;
    case NoiseKind::Uniform:
      if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidInput("uniform noise needs a finite bound > 0");
      return;
  }
}

double NoiseLaw::sample(Rng& rng) const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::Gaussian:
      return scale * standard_normal(rng);
    case NoiseKind::TruncatedGaussian:
      for (;;) {
        const double v = scale * standard_normal(rng);
        if (std::abs(v) <= bound) return v;
      }
    case NoiseKind::Uniform:
      return metalms::uniform(rng, -bound, bound);
  }
  return 0.0;
}

double NoiseLaw::max_abs() const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::Gaussian:
      return kInf;
    case NoiseKind::TruncatedGaussian:
    case NoiseKind::Uniform:
      return bound;
  }
  return kInf;
}

double NoiseLaw::variance() const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::Gaussian:
      return scale * scale;
    case NoiseKind::TruncatedGaussian: {
      const double c = bound / scale;
      const double pdf = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
      return scale * scale * (1.0 - 2.0 * c * pdf / std::erf(c / std::numbers::sqrt2));
    }
    case NoiseKind::Uniform:
      return bound * bound / 3.0;
  }
  return 0.0;
}

double NoiseLaw::sub_gaussian_proxy() const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::Gaussian:
    case NoiseKind::TruncatedGaussian:
      return scale;
    case NoiseKind::Uniform:
      return bound;  // Hoeffding: bounded in [−W, W]
  }
  return 0.0;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::TruncatedGaussian: return "truncated-gaussian";
    case NoiseKind::Uniform: return "uniform";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "truncated-gaussian") return NoiseKind::TruncatedGaussian;
  if (name == "uniform") return NoiseKind::Uniform;
  throw InvalidInput("unknown noise kind '" + name + "'");
}

std::string to_string(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::LinearScalar: return "linear-scalar";
    case FeatureFamily::QuadraticScalar: return "quadratic-scalar";
    case FeatureFamily::SigmoidDrift: return "sigmoid-drift";
    case FeatureFamily::TanhAffine: return "tanh-affine";
    case FeatureFamily::TanhIndex: return "tanh-index";
  }
  return "linear-scalar";
}

FeatureFamily family_from_string(const std::string& name) {
  if (name == "linear-scalar") return FeatureFamily::LinearScalar;
  if (name == "quadratic-scalar") return FeatureFamily::QuadraticScalar;
  if (name == "sigmoid-drift") return FeatureFamily::SigmoidDrift;
  if (name == "tanh-affine") return FeatureFamily::TanhAffine;
  if (name == "tanh-index") return FeatureFamily::TanhIndex;
  throw InvalidInput("unknown feature family '" + name + "'");
}

double clocked_sigmoid(long t, double z) {
  const double u = std::exp(-z);
  if (std::isinf(u)) return 0.0;
  return 1.0 / (static_cast<double>(schedule_clock(t)) + u);
}

BetaSchedule BetaSchedule::constant(Eigen::VectorXd value) {
  BetaSchedule s;
  s.kind = Kind::Constant;
  s.base = std::move(value);
  return s;
}

BetaSchedule BetaSchedule::sigmoid_drift() {
  BetaSchedule s;
  s.kind = Kind::SigmoidDrift;
  return s;
}

int BetaSchedule::dim() const { return kind == Kind::SigmoidDrift ? 2 : static_cast<int>(base.size()); }

Eigen::VectorXd BetaSchedule::at(long t) const {
  switch (kind) {
    case Kind::Constant:
      return base;
    case Kind::SigmoidDrift: {
      const double tau = static_cast<double>(schedule_clock(t));
      const double s = clocked_sigmoid(t, tau);
      Eigen::VectorXd b(2);
      b << -50.0 * s + 1.0 / (tau * tau), 15.0 * s + 2.0 / std::log(tau + 1.0);
      return b;
    }
    case Kind::DecayingScale:
      return (1.0 + boost / (1.0 + static_cast<double>(t) / horizon)) * base;
    case Kind::Sinusoid:
      return base + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
  }
  return base;
}

std::string to_string(BetaSchedule::Kind kind) {
  switch (kind) {
    case BetaSchedule::Kind::Constant: return "constant";
    case BetaSchedule::Kind::SigmoidDrift: return "sigmoid-drift";
    case BetaSchedule::Kind::DecayingScale: return "decaying-scale";
    case BetaSchedule::Kind::Sinusoid: return "sinusoid";
  }
  return "constant";
}

BetaSchedule::Kind beta_kind_from_string(const std::string& name) {
  if (name == "constant") return BetaSchedule::Kind::Constant;
  if (name == "sigmoid-drift") return BetaSchedule::Kind::SigmoidDrift;
  if (name == "decaying-scale") return BetaSchedule::Kind::DecayingScale;
  if (name == "sinusoid") return BetaSchedule::Kind::Sinusoid;
  throw InvalidInput("unknown beta schedule '" + name + "'");
}

int RegressorDynamics::dim() const {
  switch (kind) {
    case Kind::Exogenous: return static_cast<int>(mean.size());
    case Kind::SigmoidMarkov: return 1;
    case Kind::Autoregressive: return y_lags + u_lags;
  }
  return 0;
}

std::string to_string(RegressorDynamics::Kind kind) {
  switch (kind) {
    case RegressorDynamics::Kind::Exogenous: return "exogenous";
    case RegressorDynamics::Kind::SigmoidMarkov: return "sigmoid-markov";
    case RegressorDynamics::Kind::Autoregressive: return "autoregressive";
  }
  return "exogenous";
}

RegressorDynamics::Kind regressor_kind_from_string(const std::string& name) {
  if (name == "exogenous") return RegressorDynamics::Kind::Exogenous;
  if (name == "sigmoid-markov") return RegressorDynamics::Kind::SigmoidMarkov;
  if (name == "autoregressive") return RegressorDynamics::Kind::Autoregressive;
  throw InvalidInput("unknown regressor dynamics '" + name + "'");
}

std::pair<int, int> family_dims(FeatureFamily family, int p, int n_hint) {
  switch (family) {
    case FeatureFamily::LinearScalar:
    case FeatureFamily::QuadraticScalar:
      return {1, 1};
    case FeatureFamily::SigmoidDrift:
    case FeatureFamily::TanhAffine:
      return {2, 2};
    case FeatureFamily::TanhIndex:
      if (n_hint < 1 || n_hint > p) throw InvalidInput("tanh-index needs 1 <= n <= p");
      return {n_hint, 1};
  }
  return {1, 1};
}

void SystemSpec::validate() const {
  const auto [n_req, m_req] = family_dims(family, p, n);
  if (n != n_req || m != m_req)
    throw InvalidInput("dimensions (n, m) do not match family " + to_string(family));
  if ((family == FeatureFamily::LinearScalar || family == FeatureFamily::QuadraticScalar ||
       family == FeatureFamily::SigmoidDrift || family == FeatureFamily::TanhAffine) &&
      p != 1)
    throw InvalidInput("family " + to_string(family) + " uses a scalar regressor (p = 1)");
  if (box.dim() != n) throw InvalidInput("parameter box dimension differs from n");
  if (alpha_star.size() != n) throw InvalidInput("alpha_star dimension differs from n");
  if (!box.contains(alpha_star)) throw InvalidInput("alpha_star lies outside the parameter box");
  if (beta.dim() != m) throw InvalidInput("beta schedule dimension differs from m");
  if (beta.kind == BetaSchedule::Kind::Sinusoid && beta.amplitude.size() != m)
    throw InvalidInput("sinusoid amplitude dimension differs from m");
  if (beta.kind == BetaSchedule::Kind::Sinusoid && !(beta.period > 0.0))
    throw InvalidInput("sinusoid period must be positive");
  if (beta.kind == BetaSchedule::Kind::DecayingScale && !(beta.horizon > 0.0))
    throw InvalidInput("decaying-scale horizon must be positive");
  if (regressor.dim() != p) throw InvalidInput("regressor dimension differs from p");
  if (regressor.kind == RegressorDynamics::Kind::Autoregressive && regressor.y_lags < 0)
    throw InvalidInput("autoregressive lags must be nonnegative");
  if (regressor.kind == RegressorDynamics::Kind::SigmoidMarkov && !(regressor.init_std >= 0.0))
    throw InvalidInput("sigmoid-markov init_std must be nonnegative");
  noise.validate();
  regressor.innovation.validate();
  regressor.input.validate();
  if (!(ball_radius >= 0.0)) throw InvalidInput("ball radius must be nonnegative");
  if (!(feature_bound > 0.0)) throw InvalidInput("feature bound A must be positive");
  if (!(output_bound >= 0.0)) throw InvalidInput("output bound M_f must be nonnegative");
  if (lipschitz && !(*lipschitz >= 0.0)) throw InvalidInput("Lipschitz constant must be nonnegative");
}

void features_into(const SystemSpec& spec, const VecRef& a, const VecRef& x, long t,
                   Eigen::Ref<Eigen::VectorXd> out) {
  switch (spec.family) {
    case FeatureFamily::LinearScalar:
      out[0] = a[0] * x[0];
      return;
    case FeatureFamily::QuadraticScalar:
      out[0] = a[0] * a[0] * x[0];
      return;
    case FeatureFamily::SigmoidDrift:
      out[0] = clocked_sigmoid(t, a[0] * x[0] + a[1]);
      out[1] = 1.0;
      return;
    case FeatureFamily::TanhAffine:
      out[0] = std::tanh(a[0] * x[0] + a[1]);
      out[1] = 1.0;
      return;
    case FeatureFamily::TanhIndex: {
      double z = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) z += (j < a.size() ? a[j] : 1.0) * x[j];
      out[0] = std::tanh(z);
      return;
    }
  }
}

Eigen::VectorXd features(const SystemSpec& spec, const VecRef& alpha, const VecRef& x, long t) {
  Eigen::VectorXd out(spec.m);
  features_into(spec, alpha, x, t, out);
  return out;
}

Eigen::MatrixXd feature_jacobian(const SystemSpec& spec, const VecRef& a, const VecRef& x, long t) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(spec.m, spec.n);
  switch (spec.family) {
    case FeatureFamily::LinearScalar:
      J(0, 0) = x[0];
      break;
    case FeatureFamily::QuadraticScalar:
      J(0, 0) = 2.0 * a[0] * x[0];
      break;
    case FeatureFamily::SigmoidDrift: {
      const double s = clocked_sigmoid(t, a[0] * x[0] + a[1]);
      // dσ/dz = e^{−z}σ² = σ(1 − τσ)
      const double ds = s * (1.0 - static_cast<double>(schedule_clock(t)) * s);
      J(0, 0) = ds * x[0];
      J(0, 1) = ds;
      break;
    }
    case FeatureFamily::TanhAffine: {
      const double th = std::tanh(a[0] * x[0] + a[1]);
      const double sech2 = 1.0 - th * th;
      J(0, 0) = sech2 * x[0];
      J(0, 1) = sech2;
      break;
    }
    case FeatureFamily::TanhIndex: {
      double z = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) z += (j < a.size() ? a[j] : 1.0) * x[j];
      const double th = std::tanh(z);
      for (Eigen::Index j = 0; j < a.size(); ++j) J(0, j) = (1.0 - th * th) * x[j];
      break;
    }
  }
  return J;
}

double eval_model(const SystemSpec& spec, const VecRef& alpha, const VecRef& beta, const VecRef& x,
                  long t) {
  if (alpha.size() != spec.n || beta.size() != spec.m || x.size() != spec.p)
    throw InvalidInput("eval_model: dimension mismatch");
  if (!spec.box.contains(alpha)) throw InvalidInput("eval_model: alpha outside the parameter box");
  return beta.dot(features(spec, alpha, x, t));
}

}  // namespace metalms
