#pragma once

#include <cstdint>
#include <optional>

#include "metalms/simulate.hpp"

namespace metalms {

struct PredictorConfig {
  double lambda = 0.0;  // ≤ 0 selects the default 0.9/(2(M_f + AB + W_max)²)
  double gamma = 0.5;
  double d = 0.0;
  double B = kInf;
  double A = kInf;
  double M_f = kInf;
  double W_max = kInf;
  Eigen::VectorXd w0;  // empty selects uniform weights
  RowMatrix beta0;     // row i is β̂_{0,i}
  std::optional<double> m0;
  bool claim_exp_concavity = false;

  int models() const { return static_cast<int>(beta0.rows()); }
  // Fills defaults (λ, w₀) and checks every precondition of the algorithm.
  void resolve();
  void validate() const;
};

// 1/(2(M_f + AB + W_max)²); zero when any bound is infinite.
double exp_concavity_threshold(double M_f, double A, double B, double W_max);
double default_lambda(double M_f, double A, double B, double W_max);

// First row `informed`, the remaining N₂−1 rows N(mean, sd²) per component,
// every row projected into the ball of radius B.
RowMatrix initial_estimates(const Eigen::VectorXd& informed, int N2, double B, double mean, double sd,
                            std::uint64_t seed);

struct EnsembleState {
  long t = 0;
  RowMatrix beta;     // N₂ × m
  Eigen::VectorXd w;  // N₂
  double m = 0.0;
};

struct StepPrediction {
  Eigen::VectorXd per_model;
  double aggregate = 0.0;
};

Eigen::VectorXd project_ball(const VecRef& beta, double B);
Eigen::VectorXd lms_step(const VecRef& beta, const VecRef& phi, double y, double d, double m, double B);
double advance_envelope(double m, double phi_norm, double gamma);
Eigen::VectorXd update_weights(const VecRef& w, const VecRef& losses, double lambda);
StepPrediction predict_step(const EnsembleState& state, const VecRef& phi);

// The online loop one step at a time: predict(φ_t) then observe(y_{t+1}).
class MetaLmsPredictor {
 public:
  explicit MetaLmsPredictor(PredictorConfig cfg);

  const StepPrediction& predict(const VecRef& phi);
  void observe(double y);

  const EnsembleState& state() const { return state_; }
  const PredictorConfig& config() const { return cfg_; }
  const Eigen::VectorXd& last_losses() const { return losses_; }

 private:
  PredictorConfig cfg_;
  EnsembleState state_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd losses_;
  StepPrediction pred_;
  bool pending_ = false;
};

struct TraceOptions {
  bool model_predictions = false;
  bool weights = false;
};

struct PredictionTrace {
  Eigen::VectorXd y;
  Eigen::VectorXd y_pred;
  Eigen::VectorXd loss;
  Eigen::VectorXd J_running;
  Eigen::VectorXd envelope;
  Eigen::VectorXd phi_norm;
  RowMatrix model_pred;  // T × N₂ when requested
  RowMatrix weights;     // weights used at step t, when requested
  Eigen::VectorXd model_cumulative;
  double aggregate_cumulative = 0.0;

  long length() const { return static_cast<long>(y.size()); }
  double J_T() const { return length() ? aggregate_cumulative / static_cast<double>(length()) : 0.0; }
};

PredictionTrace run_online(const Trajectory& traj, const Eigen::VectorXd& alpha_hat, const PredictorConfig& cfg,
                           const SystemSpec& spec, const TraceOptions& opts = {});

}  // namespace metalms
