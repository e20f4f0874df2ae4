#include "metalms/kl.hpp"

#include <cmath>

#include "metalms/errors.hpp"
#include "metalms/system.hpp"

namespace metalms {

double kl_gaussian_same_var(double a, double b, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("kl_gaussian_same_var: sigma must be positive");
  const double d = a - b;
  return d * d / (2.0 * sigma * sigma);
}

double kl_gaussian(double mp, double sp, double mq, double sq) {
  if (!(sp > 0.0) || !(sq > 0.0)) throw InvalidInput("kl_gaussian: standard deviations must be positive");
  const double d = mp - mq;
  return std::log(sq / sp) + (sp * sp + d * d) / (2.0 * sq * sq) - 0.5;
}

double kl_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw InvalidInput("kl_discrete: size mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

FiniteChain FiniteChain::homogeneous(const Eigen::VectorXd& initial, const Eigen::MatrixXd& kernel, int T) {
  if (T < 1) throw InvalidInput("chain horizon must be at least 1");
  FiniteChain c;
  c.initial = initial;
  c.kernels.assign(static_cast<std::size_t>(T - 1), kernel);
  return c;
}

Eigen::VectorXd FiniteChain::marginal(int t) const {
  Eigen::RowVectorXd mu = initial.transpose();
  for (int k = 0; k < t; ++k) mu = mu * kernels[static_cast<std::size_t>(k)];
  return mu.transpose();
}

namespace {
void check_distribution(const Eigen::VectorXd& p, const char* what) {
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9)
    throw InvalidInput(std::string(what) + " must be a probability vector");
}
}  // namespace

void FiniteChain::validate() const {
  const int S = states();
  if (S < 1) throw InvalidInput("chain needs at least one state");
  check_distribution(initial, "initial distribution");
  for (const auto& K : kernels) {
    if (K.rows() != S || K.cols() != S) throw InvalidInput("kernel must be S x S");
    for (int s = 0; s < S; ++s) check_distribution(K.row(s).transpose(), "kernel row");
  }
}

GaussianLinearChain GaussianLinearChain::homogeneous(double init_mean, double init_std, Step step, int T) {
  if (T < 1) throw InvalidInput("chain horizon must be at least 1");
  GaussianLinearChain c;
  c.init_mean = init_mean;
  c.init_std = init_std;
  c.steps.assign(static_cast<std::size_t>(T - 1), step);
  return c;
}

void GaussianLinearChain::validate() const {
  if (!(init_std > 0.0)) throw InvalidInput("gaussian chain needs init_std > 0");
  for (const auto& s : steps)
    if (!(s.s > 0.0)) throw InvalidInput("gaussian chain needs step noise s > 0");
}

double kl_chain(const FiniteChain& P, const FiniteChain& Q) {
  P.validate();
  Q.validate();
  if (P.states() != Q.states() || P.horizon() != Q.horizon())
    throw InvalidInput("kl_chain: chains differ in state count or horizon");
  double total = kl_discrete(P.initial, Q.initial);
  if (std::isinf(total)) return kInf;
  Eigen::RowVectorXd mu = P.initial.transpose();
  for (std::size_t k = 0; k < P.kernels.size(); ++k) {
    const auto& KP = P.kernels[k];
    const auto& KQ = Q.kernels[k];
    for (int s = 0; s < P.states(); ++s) {
      if (mu[s] <= 0.0) continue;
      const double d = kl_discrete(KP.row(s).transpose(), KQ.row(s).transpose());
      if (std::isinf(d)) return kInf;
      total += mu[s] * d;
    }
    mu = mu * KP;
  }
  return total;
}

double kl_chain(const GaussianLinearChain& P, const GaussianLinearChain& Q) {
  P.validate();
  Q.validate();
  if (P.horizon() != Q.horizon()) throw InvalidInput("kl_chain: chains differ in horizon");
  double total = kl_gaussian(P.init_mean, P.init_std, Q.init_mean, Q.init_std);
  double mean = P.init_mean;
  double var = P.init_std * P.init_std;
  for (std::size_t k = 0; k < P.steps.size(); ++k) {
    const auto& sp = P.steps[k];
    const auto& sq = Q.steps[k];
    // The conditional means differ by (a_P − a_Q)x + (c_P − c_Q); average its
    // square over x ~ N(mean, var).
    const double da = sp.a - sq.a;
    const double dc = sp.c - sq.c;
    const double msq = da * da * (var + mean * mean) + 2.0 * da * dc * mean + dc * dc;
    total += std::log(sq.s / sp.s) + (sp.s * sp.s + msq) / (2.0 * sq.s * sq.s) - 0.5;
    mean = sp.a * mean + sp.c;
    var = sp.a * sp.a * var + sp.s * sp.s;
  }
  return total;
}

}  // namespace metalms
