#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace metalms {

enum class DriftCaseId { Case1, Case2Eigvec, Case2General };

std::string to_string(DriftCaseId id);
DriftCaseId drift_case_from_string(const std::string& name);

// Case 1: ‖β_tβ_tᵀ − K_tβ⁰β⁰ᵀ‖ ≤ B_t with scalar K_t.
struct DriftStepScalar {
  double K = 0.0;
  double B = 0.0;
  double M = 0.0;  // bound on E‖φ_t(α*, x_t) − φ_t(α̂, x_t)‖²
};

// Case 2: ‖β_t − V_tβ⁰_t‖ ≤ B_t.
struct DriftStepMatrix {
  Eigen::MatrixXd V;
  Eigen::VectorXd beta0;
  Eigen::VectorXd beta;
  double B = 0.0;
  double M = 0.0;
};

struct DriftCase {
  DriftCaseId id = DriftCaseId::Case1;
  std::vector<DriftStepScalar> scalar_steps;
  std::vector<DriftStepMatrix> matrix_steps;
};

struct DriftResult {
  double L1 = 0.0;
  std::vector<double> L0;
  std::vector<double> k;    // per-step multiplier used
  std::vector<double> rho;  // per-step spectral radius term (Case 2)
  std::vector<DriftCaseId> branch;

  double L0_mean() const;
};

// a = ‖Vβ⁰‖, b = ‖β⁰‖ and r = β⁰ᵀVβ⁰/(ab).
struct Case2Geometry {
  double a = 0.0;
  double b = 0.0;
  double r = 0.0;
};

Case2Geometry case2_geometry(const Eigen::MatrixXd& V, const Eigen::VectorXd& beta0);

// k* = a²r²/b², ρ* = (a²/2)(1 − r² + sqrt((1 − r²)(1 + 3r²))), the spectral
// radius of Vβ⁰β⁰ᵀVᵀ − k*β⁰β⁰ᵀ.
std::pair<double, double> case2_closed_form(const Case2Geometry& g);

// Spectral radius of Vβ⁰β⁰ᵀVᵀ − kβ⁰β⁰ᵀ from its 2×2 restriction to span{β⁰, Vβ⁰}.
double case2_spectral_radius(const Case2Geometry& g, double k);

DriftResult drift_characterize(const DriftCase& dc);

}  // namespace metalms
