#include "metalms/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "metalms/errors.hpp"

namespace metalms {

Quadrature gauss_legendre_unit(int k) {
  if (k < 1) throw InvalidInput("quadrature needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
  for (int j = 1; j < k; ++j) {
    const double b = j / std::sqrt(4.0 * j * j - 1.0);
    J(j - 1, j) = b;
    J(j, j - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Quadrature q;
  q.nodes = (es.eigenvalues().array() + 1.0) * 0.5;
  q.weights = es.eigenvectors().row(0).transpose().array().square();
  return q;
}

Eigen::VectorXd model_gradient(const SystemSpec& spec, const VecRef& alpha, const VecRef& x, long t,
                               GradientMode mode) {
  const Eigen::VectorXd beta = spec.beta.at(t);
  if (mode == GradientMode::Analytic) return feature_jacobian(spec, alpha, x, t).transpose() * beta;
  Eigen::VectorXd g(spec.n), a = alpha, phi(spec.m);
  for (int j = 0; j < spec.n; ++j) {
    const double h = 1e-6 * std::max(std::abs(alpha[j]), 1.0);
    a[j] = alpha[j] + h;
    features_into(spec, a, x, t, phi);
    const double fp = beta.dot(phi);
    a[j] = alpha[j] - h;
    features_into(spec, a, x, t, phi);
    const double fm = beta.dot(phi);
    a[j] = alpha[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

ExcitationResult excitation_margin(const SystemSpec& spec, const MultiTrajectoryDataset& ds,
                                   const std::vector<Eigen::VectorXd>& alpha_grid, int quadrature_nodes,
                                   GradientMode mode, int trajectory) {
  ds.validate();
  if (alpha_grid.empty()) throw InvalidInput("excitation_margin: empty alpha grid");
  if (trajectory < 0 || trajectory >= ds.count()) throw InvalidInput("excitation_margin: no such trajectory");
  const Quadrature q = gauss_legendre_unit(quadrature_nodes);
  const Trajectory& tr = ds.trajectories[trajectory];
  const long T = tr.length();
  const Eigen::VectorXd& star = spec.alpha_star;

  ExcitationResult res;
  res.margin = kInf;
  res.log_T = std::log(static_cast<double>(T));
  for (const auto& ap : alpha_grid) {
    if (ap.size() != spec.n) throw InvalidInput("excitation_margin: grid point dimension differs from n");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(spec.n, spec.n);
    Eigen::VectorXd F(spec.n);
    for (long t = 0; t < T; ++t) {
      F.setZero();
      const Eigen::VectorXd x = tr.x.row(t).transpose();
      for (Eigen::Index k = 0; k < q.nodes.size(); ++k) {
        const Eigen::VectorXd a = ap + q.nodes[k] * (star - ap);
        F += q.weights[k] * model_gradient(spec, a, x, t, mode);
      }
      G.selfadjointView<Eigen::Lower>().rankUpdate(F);
    }
    G = G.selfadjointView<Eigen::Lower>();
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues()[0];
    if (lmin < res.margin) {
      res.margin = lmin;
      res.argmin = ap;
    }
  }
  return res;
}

double martingale_offset(const MultiTrajectoryDataset& ds, const VecRef& alpha_hat) {
  ds.validate();
  const SystemSpec& spec = *ds.spec;
  if (alpha_hat.size() != spec.n) throw InvalidInput("martingale_offset: estimate dimension differs from n");
  Eigen::VectorXd ph(spec.m), ps(spec.m);
  double cross = 0.0, sq = 0.0;
  long count = 0;
  for (const auto& tr : ds.trajectories) {
    if (!tr.truth) throw InvalidInput("martingale_offset: trajectory carries no hidden truth");
    const HiddenTruth& h = *tr.truth;
    for (long t = 0; t < tr.length(); ++t) {
      const Eigen::VectorXd x = tr.x.row(t).transpose();
      features_into(spec, alpha_hat, x, t, ph);
      features_into(spec, spec.alpha_star, x, t, ps);
      const double diff = h.beta.row(t).dot(ph - ps);
      cross += h.noise[t] * diff;
      sq += diff * diff;
      ++count;
    }
  }
  return (4.0 * cross - sq) / static_cast<double>(count);
}

double generalization_error(const SystemSpec& spec, const VecRef& alpha_hat, long T, int count,
                            std::uint64_t seed) {
  if (alpha_hat.size() != spec.n) throw InvalidInput("generalization_error: estimate dimension differs from n");
  const MultiTrajectoryDataset ds = simulate_source(spec, count, T, seed);
  Eigen::VectorXd ph(spec.m), ps(spec.m);
  double acc = 0.0;
  for (const auto& tr : ds.trajectories) {
    const HiddenTruth& h = *tr.truth;
    for (long t = 0; t < T; ++t) {
      const Eigen::VectorXd x = tr.x.row(t).transpose();
      features_into(spec, alpha_hat, x, t, ph);
      features_into(spec, spec.alpha_star, x, t, ps);
      const double diff = h.beta.row(t).dot(ps - ph);
      acc += diff * diff;
    }
  }
  return acc / (static_cast<double>(T) * count);
}

}  // namespace metalms
