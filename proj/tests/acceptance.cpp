// Acceptance run: one PASS/FAIL line per criterion at its stated tolerance.
// `--criterion N` runs a single criterion; the exit status is nonzero when
// any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "metalms/bounds.hpp"
#include "metalms/dependency.hpp"
#include "metalms/diagnostics.hpp"
#include "metalms/drift.hpp"
#include "metalms/experiments.hpp"
#include "metalms/kl.hpp"
#include "metalms/meta_lms.hpp"
#include "metalms/nls.hpp"
#include "metalms/presets.hpp"
#include "support.hpp"

using namespace metalms;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
  return buf;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

// Random aggregation instance shared by criteria 1 and 2: a drifting or fixed
// tanh-affine target, a perturbed estimate and a random ensemble.
struct AggregationRun {
  PredictorConfig cfg;
  Eigen::VectorXd y, y_pred;
  RowMatrix model_pred;
};

std::vector<AggregationRun> aggregation_suite() {
  std::vector<AggregationRun> runs;
  Rng rng(20261018);
  for (int k = 0; k < 240; ++k) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, k % 2 == 0);
    const int N2 = 1 + static_cast<int>(uniform(rng, 0.0, 8.0));
    const long T = 1 + static_cast<long>(uniform(rng, 0.0, 500.0));
    Eigen::VectorXd alpha_hat = spec.alpha_star;
    for (int j = 0; j < alpha_hat.size(); ++j) alpha_hat[j] += uniform(rng, -0.2, 0.2);
    alpha_hat = alpha_hat.cwiseMax(spec.box.lo).cwiseMin(spec.box.hi);
    AggregationRun run;
    run.cfg = testsupport::random_predictor(rng, spec, N2, uniform(rng, 1.0, 50.0));
    run.cfg.resolve();
    const Trajectory traj = simulate_target(spec, T, static_cast<std::uint64_t>(1000 + k), alpha_hat);
    const PredictionTrace tr = run_online(traj, alpha_hat, run.cfg, spec, {true, false});
    run.y = tr.y;
    run.y_pred = tr.y_pred;
    run.model_pred = tr.model_pred;
    runs.push_back(std::move(run));
  }
  return runs;
}

Outcome criterion1() {
  const auto runs = aggregation_suite();
  int violations = 0;
  double worst = -kInf;
  for (const auto& r : runs) {
    const double agg = (r.y - r.y_pred).squaredNorm();
    double max_model = 0.0;
    for (int i = 0; i < r.model_pred.cols(); ++i)
      max_model = std::max(max_model, (r.y - r.model_pred.col(i)).squaredNorm());
    worst = std::max(worst, agg - max_model);
    violations += agg > max_model + 1e-9;
  }
  return {violations == 0, fmt("%.0f instances, %.0f violations, max(aggregate - max model) = %.3g",
                               static_cast<double>(runs.size()), violations, worst)};
}

Outcome criterion2() {
  const auto runs = aggregation_suite();
  int violations = 0;
  double worst = -kInf;
  for (const auto& r : runs) {
    const double agg = (r.y - r.y_pred).squaredNorm();
    double best = kInf;
    for (int i = 0; i < r.model_pred.cols(); ++i)
      best = std::min(best, (r.y - r.model_pred.col(i)).squaredNorm() + std::log(1.0 / r.cfg.w0[i]) / r.cfg.lambda);
    worst = std::max(worst, agg - best);
    violations += agg > best + 1e-9;
  }
  return {violations == 0, fmt("%.0f instances, %.0f violations, max(aggregate - regret bound) = %.3g",
                               static_cast<double>(runs.size()), violations, worst)};
}

Outcome criterion3() {
  Rng rng(77);
  int checked = 0, violations = 0;
  double min_slack = kInf;
  for (int path = 0; path < 100; ++path) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, true);
    const long T = 200 + static_cast<long>(uniform(rng, 0.0, 1800.0));
    Eigen::VectorXd alpha_hat = spec.alpha_star;
    for (int j = 0; j < alpha_hat.size(); ++j) alpha_hat[j] += uniform(rng, -0.3, 0.3);
    alpha_hat = alpha_hat.cwiseMax(spec.box.lo).cwiseMin(spec.box.hi);
    const Trajectory traj = simulate_target(spec, T, static_cast<std::uint64_t>(5000 + path), alpha_hat);
    const HiddenTruth& truth = *traj.truth;
    const double sum_w2 = truth.noise.squaredNorm();
    const double sum_eps2 = truth.mismatch.squaredNorm();
    const double delta = std::sqrt(drift_energy(truth));
    for (double factor : {2.0, 10.0, 100.0}) {
      PredictorConfig cfg = testsupport::random_predictor(rng, spec, 3, factor);
      cfg.resolve();
      const PredictionTrace tr = run_online(traj, alpha_hat, cfg, spec, {true, false});
      for (int i = 0; i < cfg.models(); ++i) {
        double lhs = 0.0;
        for (long t = 0; t < T; ++t) {
          const Eigen::VectorXd phi = features(spec, alpha_hat, traj.x.row(t).transpose(), t);
          const double e = truth.beta.row(t).dot(phi) - tr.model_pred(t, i);
          lhs += e * e;
        }
        const double rhs = lms_regret_rhs(cfg.A, cfg.gamma, cfg.d, cfg.B, T, sum_w2, sum_eps2, delta);
        min_slack = std::min(min_slack, (rhs - lhs) / rhs);
        violations += lhs > rhs * (1.0 + 1e-8);
        ++checked;
      }
    }
  }
  return {violations == 0,
          fmt("%.0f model runs, %.0f violations, min relative slack %.3g", checked, violations, min_slack)};
}

Outcome criterion4() {
  ExperimentConfig cfg;
  cfg.preset = Preset::CurveComparison;
  cfg.replications = 50;
  cfg.T = 5000;
  cfg.seed = 1;
  const ComparisonResult r = run_comparison(cfg);
  int early_bad = 0;
  for (std::size_t t = 0; t < 500; ++t) early_bad += r.J_meta.center[t] > r.J_single.center[t];
  const double meta = r.J_meta.center.back(), fixed = r.J_fixed.center.back();
  const bool a = early_bad == 0, b = fixed >= 5.0 * meta, c = meta >= 0.8 && meta <= 3.0;
  return {a && b && c, fmt("(a) %.0f of 500 steps with meta above single; (b) J_fixed/J_meta = %.3g; (c) J_meta = %.4g",
                           early_bad, fixed / meta, meta)};
}

Outcome criterion5() {
  ExperimentConfig cfg;
  cfg.preset = Preset::RateCheck;
  cfg.replications = 30;
  cfg.horizons = {250, 500, 1000, 2000, 4000, 8000};
  cfg.seed = 1;
  const RateResult r = run_rate_check(cfg);
  // Independent refit of the slope from the reported mean errors.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.horizons.size(); ++i) {
    const double T = static_cast<double>(r.horizons[i]);
    lx.push_back(std::log(T / std::log(T)));
    ly.push_back(std::log(r.mean_error[i]));
  }
  const double slope = ls_slope(lx, ly);
  const bool ok = slope >= -1.3 && slope <= -0.7 && std::abs(slope - r.slope) < 1e-9;
  return {ok, fmt("slope %.4f (reported %.4f), mean error at T = 8000 is %.3g", slope, r.slope, r.mean_error.back())};
}

// Spectral radius of Vβ⁰β⁰ᵀVᵀ − kβ⁰β⁰ᵀ by a full symmetric eigensolve.
double full_spectral_radius(const Eigen::MatrixXd& V, const Eigen::VectorXd& b0, double k) {
  const Eigen::VectorXd vb = V * b0;
  const Eigen::MatrixXd M = vb * vb.transpose() - k * b0 * b0.transpose();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

Outcome criterion6() {
  Rng rng(606);
  int mismatches = 0;
  double worst_k = 0.0, worst_rho = 0.0, worst_alt = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int m = 2 + inst % 4;
    Eigen::MatrixXd V(m, m);
    Eigen::VectorXd b0(m);
    for (int i = 0; i < m; ++i) {
      b0[i] = uniform(rng, -2.0, 2.0);
      for (int j = 0; j < m; ++j) V(i, j) = uniform(rng, -1.5, 1.5);
    }
    const double a = (V * b0).norm(), b = b0.norm();
    // Bracket [0, 4a²/b²] holds every minimizer: past a²/b² the negative
    // eigenvalue only grows in magnitude.
    const double hi = 4.0 * a * a / (b * b);
    const int G = 1000;
    int best = 0;
    double best_rho = kInf;
    for (int g = 0; g < G; ++g) {
      const double rho = full_spectral_radius(V, b0, hi * g / (G - 1));
      if (rho < best_rho) best_rho = rho, best = g;
    }
    // Golden-section refinement inside the neighbouring grid cells.
    double lo_k = hi * std::max(best - 1, 0) / (G - 1), hi_k = hi * std::min(best + 1, G - 1) / (G - 1);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && hi_k - lo_k > 1e-14 * hi; ++it) {
      const double k1 = hi_k - phi * (hi_k - lo_k), k2 = lo_k + phi * (hi_k - lo_k);
      if (full_spectral_radius(V, b0, k1) <= full_spectral_radius(V, b0, k2))
        hi_k = k2;
      else
        lo_k = k1;
    }
    const double k_num = 0.5 * (lo_k + hi_k);
    const double rho_num = full_spectral_radius(V, b0, k_num);
    const auto [k_cf, rho_cf] = case2_closed_form(case2_geometry(V, b0));
    const double dk = std::abs(k_cf - k_num), drho = std::abs(rho_cf - rho_num);
    worst_k = std::max(worst_k, dk);
    worst_rho = std::max(worst_rho, drho);
    mismatches += dk > 1e-6 || drho > 1e-6;
    // Where the numerical minimum actually sits: k = a²/b², ρ = a²·sqrt(1 − r²).
    const Case2Geometry geo = case2_geometry(V, b0);
    worst_alt = std::max({worst_alt, std::abs(k_num - a * a / (b * b)),
                          std::abs(rho_num - a * a * std::sqrt(std::max(1.0 - geo.r * geo.r, 0.0)))});
  }
  return {mismatches == 0, fmt("%.0f of 100 instances differ beyond 1e-6; max |dk| = %.3g, max |drho| = %.3g",
                               mismatches, worst_k, worst_rho) +
                              fmt("; the search agrees with k = a^2/b^2, rho = a^2 sqrt(1 - r^2) to %.3g", worst_alt)};
}

Outcome criterion7() {
  bool iid_ok = true;
  for (int T = 2; T <= 6; ++T) {
    const DependencyResult r = dependency_matrix(presets::iid_chain(T));
    iid_ok = iid_ok && r.gamma == Eigen::MatrixXd::Identity(T, T);
  }
  bool copy_ok = true;
  for (int T = 2; T <= 6; ++T) copy_ok = copy_ok && dependency_matrix(presets::copy_chain(T)).gamma(0, 1) == 1.0;
  std::vector<double> Ts, norms;
  for (int T = 3; T <= 8; ++T) {
    Ts.push_back(T);
    norms.push_back(dependency_matrix(presets::mixing_chain(T)).norm_sq);
  }
  const double slope = ls_slope(Ts, norms);
  const bool ok = iid_ok && copy_ok && std::abs(slope) <= 0.1;
  return {ok, std::string("iid identity ") + (iid_ok ? "exact" : "NOT exact") + ", copy Gamma_01 " +
                  (copy_ok ? "= 1" : "!= 1") + fmt(", mixing norm slope %.4f (T = 8 norm %.4f)", slope, norms.back())};
}

double enumerate_kl(const FiniteChain& P, const FiniteChain& Q) {
  const int S = P.states(), T = P.horizon();
  long paths = 1;
  for (int t = 0; t < T; ++t) paths *= S;
  double kl = 0.0;
  std::vector<int> z(T);
  for (long code = 0; code < paths; ++code) {
    long c = code;
    for (int t = 0; t < T; ++t) z[t] = static_cast<int>(c % S), c /= S;
    double p = P.initial[z[0]], q = Q.initial[z[0]];
    for (int t = 1; t < T; ++t) {
      p *= P.kernels[t - 1](z[t - 1], z[t]);
      q *= Q.kernels[t - 1](z[t - 1], z[t]);
    }
    if (p > 0) kl += p * std::log(p / q);
  }
  return kl;
}

Outcome criterion8() {
  double worst_gauss = 0.0;
  for (int T = 1; T <= 20; ++T) {
    const GaussianLinearChain::Step step{0.7, 0.3, 1.2};
    const double kl = kl_chain(GaussianLinearChain::homogeneous(10.0, 1.0, step, T),
                               GaussianLinearChain::homogeneous(0.0, 1.0, step, T));
    worst_gauss = std::max(worst_gauss, std::abs(kl - 50.0));
  }
  Rng rng(808);
  auto random_chain = [&rng]() {
    FiniteChain c;
    const double p0 = uniform(rng, 0.05, 0.95);
    c.initial = Eigen::Vector2d(p0, 1.0 - p0);
    for (int t = 0; t < 3; ++t) {
      Eigen::Matrix2d K;
      for (int i = 0; i < 2; ++i) {
        const double s = uniform(rng, 0.05, 0.95);
        K(i, 0) = s;
        K(i, 1) = 1.0 - s;
      }
      c.kernels.push_back(K);
    }
    return c;
  };
  double worst_fin = 0.0;
  for (int i = 0; i < 50; ++i) {
    const FiniteChain P = random_chain(), Q = random_chain();
    worst_fin = std::max(worst_fin, std::abs(kl_chain(P, Q) - enumerate_kl(P, Q)));
  }
  return {worst_gauss <= 1e-9 && worst_fin <= 1e-12,
          fmt("Gaussian max |KL - 50| = %.3g, finite max |chain rule - enumeration| = %.3g", worst_gauss, worst_fin)};
}

Outcome criterion9() {
  ExperimentConfig cfg;
  cfg.preset = Preset::BoundsReport;
  cfg.replications = 200;
  cfg.seed = 1;
  const BoundsReportResult r = run_bounds_report(cfg);
  int dominated = 0, gen_ok = 0;
  double min_ratio = kInf;
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    const BoundsCase& c = r.cases[i];
    if (i < 50) {
      dominated += c.bound.total >= c.measured_J;
      min_ratio = std::min(min_ratio, c.bound.total / c.measured_J);
    }
    gen_ok += c.bound.generalization.total >= c.measured_generalization;
  }
  const bool ok = dominated == 50 && gen_ok >= 190;
  return {ok, fmt("prediction bound dominates %.0f of 50 (min ratio %.3g); generalization bound dominates %.0f of 200", dominated,
                  min_ratio, gen_ok)};
}

Outcome criterion10() {
  ExperimentConfig cfg;
  cfg.preset = Preset::SettlingCheck;
  cfg.T = 20000;
  cfg.seed = 1;
  const SettlingResult r = run_settling_check(cfg);
  const double lo = r.sigma2, hi = r.sigma2 + r.epsilon + 0.05;
  return {r.mean_J >= lo && r.mean_J <= hi,
          fmt("mean J_T = %.5f in [%.5f, %.5f]", r.mean_J, lo, hi)};
}

Outcome criterion11() {
  const presets::BoundsSystem bsys;
  const SystemSpec src = presets::bounds_source(bsys);
  bool ok = true;
  std::string detail;
  const std::pair<int, long> grid[] = {{1, 1024}, {4, 256}, {16, 64}};
  for (const auto& [N1, T] : grid) {
    double mean = 0.0;
    for (int r = 0; r < 200; ++r) {
      const MultiTrajectoryDataset ds = simulate_source(src, N1, T, derive_seed(1111, static_cast<std::uint64_t>(r), N1));
      const NlsEstimate est = grid_search_nls(ds, src.box, 40);
      mean += martingale_offset(ds, est.alpha) / 200.0;
    }
    BoundInputs in;
    in.L = *src.lipschitz;
    in.n = src.n;
    in.p = src.p;
    in.R_M = src.box.radius();
    in.sigma_v = src.noise.sub_gaussian_proxy();
    in.N1 = N1;
    in.T = T;
    const GeneralizationBound g = generalization_bound(in);
    const double s = static_cast<double>(N1) * static_cast<double>(T);
    const double rhs = g.C0 * in.sigma_v * in.sigma_v * std::log(s) / s;
    ok = ok && mean <= rhs;
    detail += fmt("(%.0f, %.0f): ", N1, static_cast<double>(T)) + fmt("mean %.3g vs %.3g; ", mean, rhs);
  }
  return {ok, detail};
}

struct Criterion {
  int id;
  double budget_s;  // stated runtime limit, infinite when none is given
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, 60, criterion1},       {2, kInf, criterion2}, {3, 120, criterion3},  {4, 600, criterion4},
      {5, 600, criterion5},      {6, 10, criterion6},   {7, kInf, criterion7}, {8, kInf, criterion8},
      {9, kInf, criterion9},     {10, 600, criterion10}, {11, kInf, criterion11},
  };
  int failures = 0;
  for (const Criterion& c : all) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [runtime %.1f s exceeds %.0f s]", secs, c.budget_s);
    }
    std::printf("criterion %d: %s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
