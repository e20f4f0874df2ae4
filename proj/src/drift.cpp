#include "metalms/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metalms/errors.hpp"

namespace metalms {

std::string to_string(DriftCaseId id) {
  switch (id) {
    case DriftCaseId::Case1: return "case1";
    case DriftCaseId::Case2Eigvec: return "case2-eigvec";
    case DriftCaseId::Case2General: return "case2";
  }
  return "case1";
}

DriftCaseId drift_case_from_string(const std::string& name) {
  if (name == "case1") return DriftCaseId::Case1;
  if (name == "case2-eigvec") return DriftCaseId::Case2Eigvec;
  if (name == "case2" || name == "case2-general") return DriftCaseId::Case2General;
  throw InvalidInput("unknown drift case '" + name + "'");
}

double DriftResult::L0_mean() const {
  if (L0.empty()) return 0.0;
  return std::accumulate(L0.begin(), L0.end(), 0.0) / static_cast<double>(L0.size());
}

Case2Geometry case2_geometry(const Eigen::MatrixXd& V, const Eigen::VectorXd& beta0) {
  if (V.rows() != V.cols() || V.cols() != beta0.size()) throw InvalidInput("V must be m x m with m = dim beta0");
  const Eigen::VectorXd vb = V * beta0;
  Case2Geometry g;
  g.a = vb.norm();
  g.b = beta0.norm();
  if (!(g.b > 0.0)) throw InvalidInput("beta0 must be nonzero");
  g.r = g.a > 0.0 ? std::clamp(beta0.dot(vb) / (g.a * g.b), -1.0, 1.0) : 0.0;
  return g;
}

std::pair<double, double> case2_closed_form(const Case2Geometry& g) {
  const double a2 = g.a * g.a;
  const double r2 = g.r * g.r;
  const double k = a2 * r2 / (g.b * g.b);
  const double rho = 0.5 * a2 * (1.0 - r2 + std::sqrt((1.0 - r2) * (1.0 + 3.0 * r2)));
  return {k, rho};
}

double case2_spectral_radius(const Case2Geometry& g, double k) {
  const double a2 = g.a * g.a;
  const double s = std::sqrt(std::max(0.0, 1.0 - g.r * g.r));
  Eigen::Matrix2d M;
  M << a2 * g.r * g.r - k * g.b * g.b, a2 * g.r * s, a2 * g.r * s, a2 * s * s;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

constexpr double kCollinearTol = 1e-12;

void eigvec_step(const DriftStepMatrix& st, DriftResult& out) {
  const double b2 = st.beta0.squaredNorm();
  const Eigen::VectorXd vb = st.V * st.beta0;
  const double lambda = st.beta0.dot(vb) / b2;
  if ((vb - lambda * st.beta0).norm() > 1e-9 * std::max(1.0, vb.norm()))
    throw InvalidInput("case2-eigvec: beta0 is not an eigenvector of V");
  out.k.push_back(lambda * lambda);
  out.rho.push_back(0.0);
  out.L0.push_back(st.B * st.M * (st.beta.norm() + vb.norm()));
  out.branch.push_back(DriftCaseId::Case2Eigvec);
}

void check_matrix_step(const DriftStepMatrix& st) {
  if (st.beta.size() != st.beta0.size()) throw InvalidInput("beta and beta0 differ in dimension");
  if (!(st.B >= 0.0) || !(st.M >= 0.0)) throw InvalidInput("B_t and M_t must be nonnegative");
  if ((st.beta - st.V * st.beta0).norm() > st.B * (1.0 + 1e-9) + 1e-12)
    throw InvalidInput("||beta_t - V_t beta0_t|| exceeds B_t");
}

}  // namespace

DriftResult drift_characterize(const DriftCase& dc) {
  DriftResult out;
  out.branch.reserve(std::max(dc.scalar_steps.size(), dc.matrix_steps.size()));
  switch (dc.id) {
    case DriftCaseId::Case1:
      if (dc.scalar_steps.empty()) throw InvalidInput("case1 needs at least one step");
      for (const auto& st : dc.scalar_steps) {
        if (!(st.B >= 0.0) || !(st.M >= 0.0)) throw InvalidInput("B_t and M_t must be nonnegative");
        out.k.push_back(std::abs(st.K));
        out.rho.push_back(0.0);
        out.L0.push_back(st.B * st.M);
        out.branch.push_back(DriftCaseId::Case1);
      }
      break;
    case DriftCaseId::Case2Eigvec:
      if (dc.matrix_steps.empty()) throw InvalidInput("case2 needs at least one step");
      for (const auto& st : dc.matrix_steps) {
        check_matrix_step(st);
        eigvec_step(st, out);
      }
      break;
    case DriftCaseId::Case2General:
      if (dc.matrix_steps.empty()) throw InvalidInput("case2 needs at least one step");
      for (const auto& st : dc.matrix_steps) {
        check_matrix_step(st);
        const Case2Geometry g = case2_geometry(st.V, st.beta0);
        if (g.a == 0.0 || 1.0 - std::abs(g.r) <= kCollinearTol) {
          eigvec_step(st, out);
          continue;
        }
        const auto [k, rho] = case2_closed_form(g);
        out.k.push_back(k);
        out.rho.push_back(rho);
        out.L0.push_back((rho + st.B * (st.beta.norm() + g.a)) * st.M);
        out.branch.push_back(DriftCaseId::Case2General);
      }
      break;
  }
  out.L1 = *std::max_element(out.k.begin(), out.k.end());
  return out;
}

}  // namespace metalms
