#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metalms {

using TermList = std::vector<std::pair<std::string, double>>;

// Every constant feeding the generalization bound and the prediction bound.
struct BoundInputs {
  // Offline phase.
  double L = 1.0;      // Lipschitz constant of f_t in α
  int n = 1;           // dim α
  int p = 1;           // dim x
  double R_M = 1.0;    // radius of M
  double b1 = 1.0;     // ‖Γ_dep‖² ≤ b₁T^{b₂} on the training law
  double b2 = 0.0;
  double b1p = 1.0;    // same for the new-data law
  double b2p = 0.0;
  double sigma_v = 1.0;  // sub-Gaussian proxy of the training noise
  double eps_star = 0.0;
  double kl = 0.0;       // D(P_T ‖ P_T′)
  long N1 = 1;
  long T = 1;
  // Replaces the expectation bound C₀σ_v²log(N₁T)/(N₁T) on the offset when set.
  std::optional<double> empirical_offset;

  // Online phase.
  double L1 = 0.0;
  std::vector<double> L0_schedule;  // t ↦ L₀(t); L0T is used when empty
  double L0T = 0.0;
  double delta_T = 0.0;  // ((1/T)Σ‖β_{t+1} − β_t‖²)^{1/2}
  double sigma_T2 = 0.0;  // (1/T)ΣE w²_{t+1}
  double A = 1.0;
  double B = 1.0;
  double gamma = 0.5;
  double d = 1.0;
  double W_max = 0.0;
  double M_f = 0.0;
  std::optional<double> lambda;

  double L0_average() const;
  void validate_offline() const;
  void validate() const;
};

// 8√8·L·R_M·(6√8·L·R_M)ⁿ: an r-net of the model class has at most C/r^{n+1} points.
double covering_constant(double L, int n, double R_M);

struct GeneralizationBound {
  double total = 0.0;
  double sample_term = 0.0;  // C₁ log(N₁T)/(N₁T^{1−b₂})
  double offset_term = 0.0;  // 8 × (martingale offset or its expectation bound)
  double shift_term = 0.0;   // 8L²R_M²b₁′ KL/T^{1−b₂′}
  double opt_term = 0.0;     // 16ε*
  double C1 = 0.0;
  double C0 = 0.0;
  double gamma0 = 0.0;
  double covering = 0.0;
  double radius_sq = 0.0;
  double bad_event_prob = 0.0;
  double N0 = 0.0;
  bool pre_asymptotic = false;

  TermList terms() const;
};

// Assembly used here, with s = N₁T:
//   γ₀ = 2·16b₁L²R_M²(n+3), r² = γ₀ log s/(N₁T^{1−b₂});
//   the bad event of the covering argument has probability at most
//   C r^{−(n+1)} s^{−γ₀/(32b₁L²R_M²)};
//   N₀ is the first s ≥ 3 from which 4L²R_M² times that probability stays
//   below log s/s, so past N₀ the r² and bad-event terms together are at most
//   C₁ log s/(N₁T^{1−b₂}) with C₁ = 2γ₀ + 2;
//   with the covering at scale 1/s the offset satisfies
//   E sup M ≤ 4σ_v p/s + 1/s² + 4σ_v²(n+1) log(C s)/s ≤ C₀σ_v² log s/s for s ≥ N₀.
GeneralizationBound generalization_bound(const BoundInputs& in);

struct PredictionBound {
  double J_mis = 0.0;
  double J_opt = 0.0;
  double J_est = 0.0;
  double total = 0.0;
  double C_d = 0.0;
  double C_base = 0.0;
  double M_d = 0.0;
  double N_d = 0.0;
  double coef_eps = 0.0;
  double coef_drift = 0.0;     // on Bδ_T, δ_T² and B²/T
  double coef_noise = 0.0;
  double C_online = 0.0;
  double eps_sq_bound = 0.0;   // bound on (1/T)ΣEε_t²
  GeneralizationBound generalization;

  TermList terms() const;
};

PredictionBound prediction_bound(const BoundInputs& in);

// (1 + A²/d)²(1 + A²/((1−γ)²d)).
double lms_base_constant(double A, double gamma, double d);

// Pathwise projected-LMS regret bound for one model:
//   Σ(β̃ᵀφ)² ≤ C′·Σ[(1 + 1/d)w² + (1 + d)ε²] + 16dBTδ_T + 4dTδ_T² + 16dB².
double lms_regret_rhs(double A, double gamma, double d, double B, long T, double sum_w2, double sum_eps2,
                      double delta_rms);

// Expectation version under martingale-difference noise:
//   ΣE(β̃ᵀφ)² ≤ 4ΣEε² + 8(d + A²)BTδ_T + 2(d + A²)Tδ_T² + 16dB² + (4A²/d)T W_max².
double lms_regret_rhs_mds(double A, double d, double B, long T, double sum_eps2, double delta_rms,
                          double W_max);

}  // namespace metalms
