#include "metalms/simulate.hpp"

#include <cmath>
#include <deque>

#include "metalms/errors.hpp"

namespace metalms {

namespace {

constexpr std::uint64_t kSourceStream = 0;
constexpr std::uint64_t kTargetStream = 1;

class RegressorState {
 public:
  RegressorState(const RegressorDynamics& dyn, Rng& rng) : dyn_(dyn), x_(dyn.dim()) {
    switch (dyn_.kind) {
      case RegressorDynamics::Kind::Exogenous:
        draw_exogenous(0, rng);
        break;
      case RegressorDynamics::Kind::SigmoidMarkov:
        x_[0] = dyn_.init_mean + dyn_.init_std * standard_normal(rng);
        break;
      case RegressorDynamics::Kind::Autoregressive:
        for (int k = 0; k < dyn_.y_lags; ++k) ys_.push_back(dyn_.init_mean + dyn_.init_std * standard_normal(rng));
        for (int k = 0; k < dyn_.u_lags; ++k) us_.push_back(dyn_.input.sample(rng));
        pack();
        break;
    }
  }

  const Eigen::VectorXd& current() const { return x_; }

  void advance(long t, double y_next, Rng& rng) {
    switch (dyn_.kind) {
      case RegressorDynamics::Kind::Exogenous:
        draw_exogenous(t + 1, rng);
        break;
      case RegressorDynamics::Kind::SigmoidMarkov:
        x_[0] = dyn_.gain * clocked_sigmoid(t, x_[0]) + dyn_.innovation.sample(rng);
        break;
      case RegressorDynamics::Kind::Autoregressive:
        if (dyn_.y_lags > 0) {
          ys_.pop_back();
          ys_.push_front(y_next);
        }
        if (dyn_.u_lags > 0) {
          us_.pop_back();
          us_.push_front(dyn_.input.sample(rng));
        }
        pack();
        break;
    }
  }

 private:
  void draw_exogenous(long t, Rng& rng) {
    for (Eigen::Index j = 0; j < x_.size(); ++j)
      x_[j] = dyn_.mean[j] + dyn_.slope * static_cast<double>(t) + dyn_.innovation.sample(rng);
  }

  void pack() {
    Eigen::Index j = 0;
    for (double v : ys_) x_[j++] = v;
    for (double v : us_) x_[j++] = v;
  }

  const RegressorDynamics& dyn_;
  Eigen::VectorXd x_;
  std::deque<double> ys_;
  std::deque<double> us_;
};

Trajectory run_system(const SystemSpec& spec, long T, Rng& rng) {
  Trajectory traj;
  traj.x.resize(T, spec.p);
  traj.y.resize(T);
  HiddenTruth truth;
  truth.beta.resize(T, spec.m);
  truth.noise.resize(T);

  RegressorState state(spec.regressor, rng);
  Eigen::VectorXd phi(spec.m);
  for (long t = 0; t < T; ++t) {
    const Eigen::VectorXd& x = state.current();
    if (!x.allFinite()) throw ContractViolation("simulation produced a non-finite regressor", t);
    const Eigen::VectorXd beta = spec.beta.at(t);
    if (std::isfinite(spec.ball_radius) && !BallDomain(spec.ball_radius).contains(beta))
      throw ContractViolation("beta_t left the ball of radius B", t);
    features_into(spec, spec.alpha_star, x, t, phi);
    const double f = beta.dot(phi);
    if (std::abs(f) > spec.output_bound * (1.0 + 1e-12))
      throw ContractViolation("|f_t| exceeded the declared bound M_f", t);
    const double w = spec.noise.sample(rng);
    const double y = f + w;
    if (!std::isfinite(y)) throw ContractViolation("simulation produced a non-finite output", t);

    traj.x.row(t) = x.transpose();
    traj.y[t] = y;
    truth.beta.row(t) = beta.transpose();
    truth.noise[t] = w;
    state.advance(t, y, rng);
  }
  truth.beta_final = spec.beta.at(T);
  traj.truth = std::move(truth);
  return traj;
}

}  // namespace

void MultiTrajectoryDataset::validate() const {
  if (!spec) throw InvalidInput("dataset has no system spec");
  if (trajectories.empty()) throw InvalidInput("dataset is empty");
  const long T = trajectories.front().length();
  for (const auto& tr : trajectories) {
    if (tr.length() != T || tr.x.rows() != T) throw InvalidInput("dataset trajectories differ in length");
    if (tr.regressor_dim() != spec->p) throw InvalidInput("dataset regressor dimension differs from spec");
  }
  if (T < 1) throw InvalidInput("dataset horizon must be at least 1");
}

MultiTrajectoryDataset simulate_source(const SystemSpec& spec, int N1, long T, std::uint64_t seed) {
  if (N1 < 1) throw InvalidInput("simulate_source: N1 must be at least 1");
  if (T < 1) throw InvalidInput("simulate_source: T must be at least 1");
  spec.validate();
  MultiTrajectoryDataset ds;
  ds.spec = std::make_shared<const SystemSpec>(spec);
  ds.master_seed = seed;
  for (int i = 0; i < N1; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i), kSourceStream);
    Rng rng(s);
    ds.seeds.push_back(s);
    ds.trajectories.push_back(run_system(spec, T, rng));
  }
  return ds;
}

Trajectory simulate_target(const SystemSpec& spec, long T, std::uint64_t seed,
                           const std::optional<Eigen::VectorXd>& alpha_hat) {
  if (T < 1) throw InvalidInput("simulate_target: T must be at least 1");
  spec.validate();
  Rng rng = make_stream(seed, 0, kTargetStream);
  Trajectory traj = run_system(spec, T, rng);
  if (alpha_hat) attach_mismatch(spec, traj, *alpha_hat);
  return traj;
}

void attach_mismatch(const SystemSpec& spec, Trajectory& traj, const Eigen::VectorXd& alpha_hat) {
  if (!traj.truth) throw InvalidInput("attach_mismatch: trajectory carries no hidden truth");
  if (alpha_hat.size() != spec.n) throw InvalidInput("attach_mismatch: estimate dimension differs from n");
  const long T = traj.length();
  auto& truth = *traj.truth;
  truth.mismatch.resize(T);
  Eigen::VectorXd phi_star(spec.m), phi_hat(spec.m);
  for (long t = 0; t < T; ++t) {
    features_into(spec, spec.alpha_star, traj.x.row(t).transpose(), t, phi_star);
    features_into(spec, alpha_hat, traj.x.row(t).transpose(), t, phi_hat);
    truth.mismatch[t] = truth.beta.row(t).dot(phi_star - phi_hat);
  }
}

namespace {
template <class F>
double drift_average(const HiddenTruth& truth, F&& g) {
  const long T = truth.beta.rows();
  if (T == 0) return 0.0;
  double acc = 0.0;
  for (long t = 0; t < T; ++t) {
    const Eigen::VectorXd next = (t + 1 < T) ? Eigen::VectorXd(truth.beta.row(t + 1).transpose()) : truth.beta_final;
    acc += g((next - truth.beta.row(t).transpose()).norm());
  }
  return acc / static_cast<double>(T);
}
}  // namespace

double drift_energy(const HiddenTruth& truth) {
  return drift_average(truth, [](double d) { return d * d; });
}

double drift_mean(const HiddenTruth& truth) {
  return drift_average(truth, [](double d) { return d; });
}

double noise_power(const HiddenTruth& truth) {
  return truth.noise.size() == 0 ? 0.0 : truth.noise.squaredNorm() / static_cast<double>(truth.noise.size());
}

}  // namespace metalms
