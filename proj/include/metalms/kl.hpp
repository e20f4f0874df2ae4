#pragma once

#include <vector>

#include <Eigen/Dense>

namespace metalms {

// (a−b)²/(2σ²).
double kl_gaussian_same_var(double a, double b, double sigma);
// D(N(mp, sp²) ‖ N(mq, sq²)).
double kl_gaussian(double mp, double sp, double mq, double sq);
// Σ p log(p/q); +inf when p puts mass where q has none.
double kl_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Finite-state chain on {0..S−1}: kernels[t−1] maps Z_{t−1} to Z_t, so the
// horizon is kernels.size() + 1.
struct FiniteChain {
  Eigen::VectorXd initial;
  std::vector<Eigen::MatrixXd> kernels;

  static FiniteChain homogeneous(const Eigen::VectorXd& initial, const Eigen::MatrixXd& kernel, int T);
  int states() const { return static_cast<int>(initial.size()); }
  int horizon() const { return static_cast<int>(kernels.size()) + 1; }
  // Marginal law of Z_t.
  Eigen::VectorXd marginal(int t) const;
  void validate() const;
};

// Scalar chain x₀ ~ N(init_mean, init_std²), x_t = a_t x_{t−1} + c_t + N(0, s_t²).
struct GaussianLinearChain {
  struct Step {
    double a = 1.0;
    double c = 0.0;
    double s = 1.0;
  };
  double init_mean = 0.0;
  double init_std = 1.0;
  std::vector<Step> steps;

  static GaussianLinearChain homogeneous(double init_mean, double init_std, Step step, int T);
  int horizon() const { return static_cast<int>(steps.size()) + 1; }
  void validate() const;
};

// D(P_T ‖ Q_T) by the chain rule D(init) + Σ_t E_P[D(P(·|x_{t−1}) ‖ Q(·|x_{t−1}))].
double kl_chain(const FiniteChain& P, const FiniteChain& Q);
double kl_chain(const GaussianLinearChain& P, const GaussianLinearChain& Q);

}  // namespace metalms
