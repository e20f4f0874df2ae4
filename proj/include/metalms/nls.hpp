#pragma once

#include <cstdint>
#include <string>

#include "metalms/simulate.hpp"

namespace metalms {

enum class NlsMethod { Grid, Random, RefinedGrid };
enum class CertificateKind { Deterministic, Statistical, Uncertified };

std::string to_string(NlsMethod method);
std::string to_string(CertificateKind kind);

struct NlsEstimate {
  Eigen::VectorXd alpha;
  double loss = 0.0;
  double eps_cert = 0.0;
  CertificateKind cert_kind = CertificateKind::Uncertified;
  NlsMethod method = NlsMethod::Grid;
  long segments = 0;       // grid resolution per dimension
  long budget = 0;         // random samples (corners excluded)
  long evaluations = 0;
  double half_diagonal = 0.0;  // grid cell half-diagonal h
  // Random search only: expected fraction of M (by volume) whose loss is
  // below the returned one, 1/(budget + 1).
  double coverage = 0.0;
};

// Mean squared residual (1/(N₁T))ΣΣ(y_{t+1,i} − β⁰(t)ᵀφ_t(α, x_{t,i}))². The
// β⁰ schedule is tabulated once so repeated calls only pay for φ.
class LossEvaluator {
 public:
  explicit LossEvaluator(const MultiTrajectoryDataset& ds);
  double operator()(const VecRef& alpha) const;
  long samples() const { return samples_; }

 private:
  const MultiTrajectoryDataset& ds_;
  RowMatrix beta0_;
  long samples_ = 0;
};

double empirical_loss(const MultiTrajectoryDataset& ds, const VecRef& alpha);

// Uniform grid with `segments` cells per dimension; ties go to the
// lexicographically smallest grid point.
NlsEstimate grid_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long segments);

// Grid search followed by `levels − 1` regrids of the ±2-cell box around the
// incumbent. Cheap in several dimensions but only locally exhaustive, so the
// result carries no certificate.
NlsEstimate refined_grid_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long segments,
                                    int levels);

// All 2ⁿ corners plus `budget` uniform draws; draws for a larger budget
// extend the sequence for a smaller one.
NlsEstimate random_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long budget,
                              std::uint64_t seed);

struct EpsCertificate {
  double value = 0.0;
  CertificateKind kind = CertificateKind::Uncertified;
  bool warning = false;
};

// Lipschitz composition bound for a grid estimate: with h the cell
// half-diagonal every α ∈ M has a grid point within h, so
//   loss(α̂) ≤ inf_M loss + 2Lh·√loss(α̂) + L²h².
// Non-grid estimates pass their statistical certificate through with a warning.
EpsCertificate certify_epsilon(const NlsEstimate& est, const MultiTrajectoryDataset& ds,
                               const CompactBox& box, double L);

}  // namespace metalms
