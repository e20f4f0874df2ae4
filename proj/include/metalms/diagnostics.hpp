#pragma once

#include <cstdint>
#include <vector>

#include "metalms/simulate.hpp"

namespace metalms {

// Gauss-Legendre nodes and weights on [0, 1].
struct Quadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
Quadrature gauss_legendre_unit(int k);

enum class GradientMode { Analytic, CentralDifference };

// ∇_α β⁰(t)ᵀφ_t(α, x). Central differences use the step 1e−6·max(|α_j|, 1).
Eigen::VectorXd model_gradient(const SystemSpec& spec, const VecRef& alpha, const VecRef& x, long t,
                               GradientMode mode = GradientMode::Analytic);

struct ExcitationResult {
  double margin = 0.0;   // min over the grid of λ_min(Σ_t F_tF_tᵀ)
  double log_T = 0.0;
  Eigen::VectorXd argmin;
};

// F_t(α*, α′) = ∫₀¹ ∇_α f_t(α′ + s(α* − α′), β⁰(t), x_t) ds on one trajectory.
ExcitationResult excitation_margin(const SystemSpec& spec, const MultiTrajectoryDataset& ds,
                                   const std::vector<Eigen::VectorXd>& alpha_grid, int quadrature_nodes,
                                   GradientMode mode = GradientMode::Analytic, int trajectory = 0);

// (4/(N₁T))ΣΣ v·h − (1/(N₁T))ΣΣ h² with h = f_t(α̂, x) − f_t(α*, x) on the recorded noises.
double martingale_offset(const MultiTrajectoryDataset& ds, const VecRef& alpha_hat);

// (1/T)Σ_t (f_t(α*, x_t) − f_t(α̂, x_t))² averaged over `count` fresh trajectories of `spec`.
double generalization_error(const SystemSpec& spec, const VecRef& alpha_hat, long T, int count,
                            std::uint64_t seed);

}  // namespace metalms
