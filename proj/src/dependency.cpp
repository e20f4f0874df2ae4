#include "metalms/dependency.hpp"

#include <cmath>
#include <vector>

#include "metalms/errors.hpp"

namespace metalms {

namespace {

double count_atoms(int S, int length) { return std::pow(static_cast<double>(S), length); }

// Decodes `code` into a path of `length` states, first state most significant.
void decode(std::size_t code, int S, int length, std::vector<int>& path) {
  path.resize(static_cast<std::size_t>(length));
  for (int k = length - 1; k >= 0; --k) {
    path[static_cast<std::size_t>(k)] = static_cast<int>(code % static_cast<std::size_t>(S));
    code /= static_cast<std::size_t>(S);
  }
}

// Probability of the suffix path z_j..z_{T−1} given the law `start` of Z_j.
double suffix_probability(const FiniteChain& c, int j, const std::vector<int>& b, const Eigen::VectorXd& start) {
  double p = start[b[0]];
  for (std::size_t k = 1; k < b.size() && p > 0.0; ++k)
    p *= c.kernels[static_cast<std::size_t>(j) + k - 1](b[k - 1], b[k]);
  return p;
}

double prefix_probability(const FiniteChain& c, const std::vector<int>& a) {
  double p = c.initial[a[0]];
  for (std::size_t k = 1; k < a.size() && p > 0.0; ++k) p *= c.kernels[k - 1](a[k - 1], a[k]);
  return p;
}

// Law of Z_j given Z_i = s.
Eigen::VectorXd propagate(const FiniteChain& c, int i, int j, int s) {
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(c.states());
  mu[s] = 1.0;
  for (int k = i; k < j; ++k) mu = mu * c.kernels[static_cast<std::size_t>(k)];
  return mu.transpose();
}

double exact_entry(const FiniteChain& c, int i, int j) {
  const int S = c.states();
  const int T = c.horizon();
  const int plen = i + 1;
  const int slen = T - j;
  const auto n_prefix = static_cast<std::size_t>(count_atoms(S, plen));
  const auto n_suffix = static_cast<std::size_t>(count_atoms(S, slen));
  const Eigen::VectorXd pi = c.marginal(i);
  std::vector<Eigen::VectorXd> cond(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) cond[static_cast<std::size_t>(s)] = propagate(c, i, j, s);

  // Suffix atom b has P(b | Z_i = s) = cond_s(b₀)·R(b), with R the kernel
  // product along b, and P(b) = Σ_s' π_i(s')·P(b | Z_i = s'). The difference is
  // accumulated term by term so identical conditionals cancel exactly.
  std::vector<int> b;
  std::vector<double> R(n_suffix);
  std::vector<int> first(n_suffix);
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(S);
  for (std::size_t code = 0; code < n_suffix; ++code) {
    decode(code, S, slen, b);
    R[code] = suffix_probability(c, j, b, unit);
    first[code] = b[0];
  }
  // The conditional suffix law depends on a prefix atom only through its last
  // state (Markov property), so the total variation is cached per state.
  std::vector<double> tv_by_state(static_cast<std::size_t>(S), -1.0);
  std::vector<int> a;
  double sup = 0.0;
  for (std::size_t code = 0; code < n_prefix; ++code) {
    decode(code, S, plen, a);
    if (prefix_probability(c, a) <= 0.0) continue;
    const auto last = static_cast<std::size_t>(a.back());
    double& tv = tv_by_state[last];
    if (tv < 0.0) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_suffix; ++k) {
        if (R[k] == 0.0) continue;
        double diff = 0.0;
        for (int u = 0; u < S; ++u) {
          const auto uu = static_cast<std::size_t>(u);
          if (pi[u] > 0.0) diff += pi[u] * (cond[last][first[k]] - cond[uu][first[k]]);
        }
        acc += std::abs(diff) * R[k];
      }
      tv = 0.5 * acc;
    }
    sup = std::max(sup, tv);
  }
  return std::sqrt(2.0 * sup);
}

double atom_entry(const FiniteChain& c, int i, int j) {
  const int S = c.states();
  const Eigen::VectorXd pi = c.marginal(i);
  const Eigen::VectorXd pj = c.marginal(j);
  double sup = 0.0;
  for (int s = 0; s < S; ++s) {
    if (pi[s] <= 0.0) continue;
    const Eigen::VectorXd cond = propagate(c, i, j, s);
    for (int u = 0; u < S; ++u) sup = std::max(sup, std::abs(cond[u] - pj[u]));
  }
  return std::sqrt(2.0 * sup);
}

}  // namespace

DependencyResult dependency_matrix(const FiniteChain& chain, std::size_t max_events, bool atom_lower_bound) {
  chain.validate();
  const int T = chain.horizon();
  const int S = chain.states();
  if (!atom_lower_bound) {
    // The largest enumeration is the full prefix (i = T−2) or suffix (j = 1).
    const double worst = count_atoms(S, std::max(T - 1, 1));
    if (T > 1 && worst > static_cast<double>(max_events))
      throw InvalidInput("dependency_matrix: event enumeration exceeds the cap; use the atom lower bound");
  }
  DependencyResult r;
  r.lower_bound = atom_lower_bound;
  r.gamma = Eigen::MatrixXd::Identity(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = i + 1; j < T; ++j) r.gamma(i, j) = atom_lower_bound ? atom_entry(chain, i, j) : exact_entry(chain, i, j);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.gamma);
  const double s = svd.singularValues()[0];
  r.norm_sq = s * s;
  return r;
}

}  // namespace metalms
