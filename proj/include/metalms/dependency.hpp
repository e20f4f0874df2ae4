#pragma once

#include <cstddef>

#include "metalms/kl.hpp"

namespace metalms {

struct DependencyResult {
  Eigen::MatrixXd gamma;  // upper triangular, unit diagonal
  double norm_sq = 1.0;   // ‖Γ‖² in the operator norm
  bool lower_bound = false;
};

// Γ_ij = sqrt(2 sup |P(B|A) − P(B)|) over A ∈ σ(Z_{0:i}), B ∈ σ(Z_{j:T−1}).
//
// Exact mode enumerates every prefix atom a ∈ S^{i+1} and every suffix atom
// b ∈ S^{T−j}. For fixed A the supremum over B is the total-variation distance
// between P(·|A) and P(·), and P(·|A) is a mixture of the atom conditionals, so
// by convexity the supremum over A is attained on a prefix atom. Requests whose
// atom count S^{max(i+1, T−j)} exceeds `max_events` are refused.
//
// With `atom_lower_bound` only the events {Z_i = s} and {Z_j = s'} are used,
// which never exceeds the exact value and has no size limit.
DependencyResult dependency_matrix(const FiniteChain& chain, std::size_t max_events = 1u << 16,
                                   bool atom_lower_bound = false);

}  // namespace metalms
