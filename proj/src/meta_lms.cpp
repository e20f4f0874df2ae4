#include "metalms/meta_lms.hpp"

#include <cmath>

#include "metalms/errors.hpp"

namespace metalms {

double exp_concavity_threshold(double M_f, double A, double B, double W_max) {
  const double r = M_f + A * B + W_max;
  if (!std::isfinite(r)) return 0.0;
  return 1.0 / (2.0 * r * r);
}

double default_lambda(double M_f, double A, double B, double W_max) {
  return 0.9 * exp_concavity_threshold(M_f, A, B, W_max);
}

void PredictorConfig::resolve() {
  if (lambda <= 0.0) {
    lambda = default_lambda(M_f, A, B, W_max);
    if (!(lambda > 0.0)) throw InvalidInput("default lambda needs finite M_f, A, B and W_max");
  }
  if (w0.size() == 0 && beta0.rows() > 0) w0 = Eigen::VectorXd::Constant(beta0.rows(), 1.0 / static_cast<double>(beta0.rows()));
  validate();
}

void PredictorConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("gamma must lie in (0, 1)");
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
  if (!(A > 0.0) || !std::isfinite(A)) throw InvalidInput("feature bound A must be finite and positive");
  const double dmin = A * A / ((1.0 - gamma) * (1.0 - gamma));
  if (!(d > dmin)) throw InvalidInput("d must exceed A^2/(1-gamma)^2");
  if (!(B >= 0.0)) throw InvalidInput("ball radius B must be nonnegative");
  const int N2 = models();
  if (N2 < 1) throw InvalidInput("at least one model is required");
  if (w0.size() != N2) throw InvalidInput("initial weights must have one entry per model");
  if ((w0.array() <= 0.0).any()) throw InvalidInput("initial weights must be positive");
  if (std::abs(w0.sum() - 1.0) > 1e-10) throw InvalidInput("initial weights must sum to one");
  const BallDomain ball(B);
  for (int i = 0; i < N2; ++i) {
    if (!ball.contains(beta0.row(i).transpose())) throw InvalidInput("initial estimate outside the ball");
    for (int j = 0; j < i; ++j)
      if (beta0.row(i) == beta0.row(j)) throw InvalidInput("initial estimates must be pairwise distinct");
  }
  if (m0 && !(*m0 >= 0.0 && *m0 <= A / (1.0 - gamma) * (1.0 + 1e-12)))
    throw InvalidInput("m0 must lie in [0, A/(1-gamma)]");
  if (claim_exp_concavity) {
    const double thr = exp_concavity_threshold(M_f, A, B, W_max);
    if (!(lambda < thr)) throw InvalidInput("lambda is not below the exp-concavity threshold");
  }
}

RowMatrix initial_estimates(const Eigen::VectorXd& informed, int N2, double B, double mean, double sd,
                            std::uint64_t seed) {
  if (N2 < 1) throw InvalidInput("initial_estimates: N2 must be at least 1");
  RowMatrix out(N2, informed.size());
  out.row(0) = project_ball(informed, B).transpose();
  Rng rng = make_stream(seed, 0, 0xbe7a);
  for (int i = 1; i < N2; ++i) {
    Eigen::VectorXd b(informed.size());
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = mean + sd * standard_normal(rng);
    out.row(i) = project_ball(b, B).transpose();
  }
  return out;
}

Eigen::VectorXd project_ball(const VecRef& beta, double B) {
  if (!(B >= 0.0)) throw InvalidInput("project_ball: B must be nonnegative");
  const double nrm = beta.norm();
  if (nrm <= B) return beta;
  return beta * (B / nrm);
}

Eigen::VectorXd lms_step(const VecRef& beta, const VecRef& phi, double y, double d, double m, double B) {
  const double denom = d + m * m;
  if (!(denom > 0.0)) throw InvalidInput("lms_step: d + m^2 must be positive");
  if (beta.size() != phi.size()) throw InvalidInput("lms_step: dimension mismatch");
  return project_ball(beta + phi * ((y - beta.dot(phi)) / denom), B);
}

double advance_envelope(double m, double phi_norm, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("advance_envelope: gamma must lie in (0, 1)");
  if (!(m >= 0.0)) throw InvalidInput("advance_envelope: m must be nonnegative");
  return gamma * m + phi_norm;
}

Eigen::VectorXd update_weights(const VecRef& w, const VecRef& losses, double lambda) {
  if (w.size() != losses.size()) throw InvalidInput("update_weights: dimension mismatch");
  if (!(lambda > 0.0)) throw InvalidInput("update_weights: lambda must be positive");
  const double lmin = losses.minCoeff();
  Eigen::VectorXd out(w.size());
  if (!std::isfinite(lmin)) {
    out = w;
  } else {
    for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = w[i] * std::exp(-lambda * (losses[i] - lmin));
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) s += out[i];
  return out / s;
}

StepPrediction predict_step(const EnsembleState& state, const VecRef& phi) {
  if (phi.size() != state.beta.cols()) throw InvalidInput("predict_step: feature dimension mismatch");
  StepPrediction p;
  p.per_model = state.beta * phi;
  double agg = 0.0;
  for (Eigen::Index i = 0; i < p.per_model.size(); ++i) agg += state.w[i] * p.per_model[i];
  p.aggregate = agg;
  return p;
}

MetaLmsPredictor::MetaLmsPredictor(PredictorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.resolve();
  state_.beta = cfg_.beta0;
  state_.w = cfg_.w0;
  losses_ = Eigen::VectorXd::Zero(cfg_.models());
}

const StepPrediction& MetaLmsPredictor::predict(const VecRef& phi) {
  if (pending_) throw InvalidInput("predict called twice without observe");
  if (phi.size() != state_.beta.cols()) throw InvalidInput("feature dimension differs from model dimension");
  const double nrm = phi.norm();
  if (!(nrm <= cfg_.A * (1.0 + 1e-12))) throw ContractViolation("feature norm exceeds the bound A", state_.t);
  if (state_.t == 0) {
    state_.m = cfg_.m0.value_or(nrm);
    if (state_.m < nrm) throw ContractViolation("m0 is below the initial feature norm", 0);
  } else {
    state_.m = advance_envelope(state_.m, nrm, cfg_.gamma);
  }
  phi_ = phi;
  pred_ = predict_step(state_, phi_);
  pending_ = true;
  return pred_;
}

void MetaLmsPredictor::observe(double y) {
  if (!pending_) throw InvalidInput("observe called before predict");
  const Eigen::Index N2 = state_.beta.rows();
  for (Eigen::Index i = 0; i < N2; ++i) {
    const double r = y - pred_.per_model[i];
    losses_[i] = r * r;
  }
  state_.w = update_weights(state_.w, losses_, cfg_.lambda);
  const double gain = 1.0 / (cfg_.d + state_.m * state_.m);
  for (Eigen::Index i = 0; i < N2; ++i) {
    auto row = state_.beta.row(i);
    row += (gain * (y - pred_.per_model[i])) * phi_.transpose();
    const double nrm = row.norm();
    if (nrm > cfg_.B) row *= cfg_.B / nrm;
  }
  ++state_.t;
  pending_ = false;
}

PredictionTrace run_online(const Trajectory& traj, const Eigen::VectorXd& alpha_hat, const PredictorConfig& cfg,
                           const SystemSpec& spec, const TraceOptions& opts) {
  if (alpha_hat.size() != spec.n) throw InvalidInput("run_online: estimate dimension differs from n");
  if (traj.regressor_dim() != spec.p) throw InvalidInput("run_online: regressor dimension differs from p");
  if (cfg.beta0.cols() != spec.m) throw InvalidInput("run_online: model dimension differs from m");
  MetaLmsPredictor pred(cfg);
  const long T = traj.length();
  const int N2 = pred.config().models();
  PredictionTrace tr;
  tr.y = traj.y;
  tr.y_pred.resize(T);
  tr.loss.resize(T);
  tr.J_running.resize(T);
  tr.envelope.resize(T);
  tr.phi_norm.resize(T);
  if (opts.model_predictions) tr.model_pred.resize(T, N2);
  if (opts.weights) tr.weights.resize(T, N2);
  tr.model_cumulative = Eigen::VectorXd::Zero(N2);

  Eigen::VectorXd phi(spec.m);
  for (long t = 0; t < T; ++t) {
    features_into(spec, alpha_hat, traj.x.row(t).transpose(), t, phi);
    if (opts.weights) tr.weights.row(t) = pred.state().w.transpose();
    const StepPrediction& p = pred.predict(phi);
    if (opts.model_predictions) tr.model_pred.row(t) = p.per_model.transpose();
    const double y = traj.y[t];
    const double e = y - p.aggregate;
    tr.y_pred[t] = p.aggregate;
    tr.loss[t] = e * e;
    tr.aggregate_cumulative += e * e;
    tr.J_running[t] = tr.aggregate_cumulative / static_cast<double>(t + 1);
    tr.envelope[t] = pred.state().m;
    tr.phi_norm[t] = phi.norm();
    pred.observe(y);
    tr.model_cumulative += pred.last_losses();
  }
  return tr;
}

}  // namespace metalms
