#include "metalms/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metalms/errors.hpp"
#include "metalms/meta_lms.hpp"

namespace metalms {

namespace {

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0)) throw InvalidInput(std::string("bound input ") + name + " must be nonnegative");
}

// log of 4L²R²·C·(s/(γ₀ log s))^{(n+1)/2}·s^{−e} − log(log s / s), where
// e = γ₀/(32b₁L²R²). Nonpositive means the bad-event mass is dominated.
double threshold_gap(double s, double log_front, double gamma0, int n, double e) {
  const double ls = std::log(s);
  const double half = 0.5 * (n + 1);
  return log_front + half * (ls - std::log(gamma0 * ls)) - e * ls - std::log(ls) + ls;
}

double find_N0(double log_front, double gamma0, int n, double e) {
  auto ok = [&](double s) { return threshold_gap(s, log_front, gamma0, n, e) <= 0.0; };
  double hi = 3.0;
  if (ok(hi)) return hi;
  double lo = hi;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  // Integer bisection on (lo, hi].
  double a = std::floor(lo), b = std::ceil(hi);
  while (b - a > 1.0) {
    const double mid = std::floor(0.5 * (a + b));
    if (ok(mid))
      b = mid;
    else
      a = mid;
  }
  return b;
}

}  // namespace

double BoundInputs::L0_average() const {
  if (L0_schedule.empty()) return L0T;
  return std::accumulate(L0_schedule.begin(), L0_schedule.end(), 0.0) / static_cast<double>(L0_schedule.size());
}

void BoundInputs::validate_offline() const {
  require_nonneg(L, "L");
  require_nonneg(R_M, "R_M");
  require_nonneg(b1, "b1");
  require_nonneg(b1p, "b1'");
  require_nonneg(sigma_v, "sigma_v");
  require_nonneg(eps_star, "eps*");
  require_nonneg(kl, "KL");
  if (n < 1) throw InvalidInput("bound input n must be at least 1");
  if (p < 1) throw InvalidInput("bound input p must be at least 1");
  if (!(b2 >= 0.0 && b2 < 1.0)) throw InvalidInput("b2 must lie in [0, 1)");
  if (!(b2p >= 0.0 && b2p < 1.0)) throw InvalidInput("b2' must lie in [0, 1)");
  if (N1 < 1 || T < 1) throw InvalidInput("N1 and T must be at least 1");
  if (N1 * T < 2) throw InvalidInput("N1*T must be at least 2 for the log factor to be positive");
}

void BoundInputs::validate() const {
  validate_offline();
  require_nonneg(L1, "L1");
  require_nonneg(L0T, "L0T");
  for (double v : L0_schedule) require_nonneg(v, "L0(t)");
  require_nonneg(delta_T, "delta_T");
  require_nonneg(sigma_T2, "sigma_T^2");
  require_nonneg(B, "B");
  require_nonneg(W_max, "W_max");
  require_nonneg(M_f, "M_f");
  if (!(A > 0.0) || !std::isfinite(A)) throw InvalidInput("A must be finite and positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("gamma must lie in (0, 1)");
  if (!(d > A * A / ((1.0 - gamma) * (1.0 - gamma)))) throw InvalidInput("d must exceed A^2/(1-gamma)^2");
  if (lambda) {
    if (!(*lambda > 0.0)) throw InvalidInput("lambda must be positive");
    if (!(*lambda < exp_concavity_threshold(M_f, A, B, W_max)))
      throw InvalidInput("lambda is not below the exp-concavity threshold");
  }
}

double covering_constant(double L, int n, double R_M) {
  const double s8 = std::sqrt(8.0);
  return 8.0 * s8 * L * R_M * std::pow(6.0 * s8 * L * R_M, n);
}

TermList GeneralizationBound::terms() const {
  return {{"sample", sample_term},   {"offset", offset_term},   {"shift", shift_term},
          {"opt", opt_term},         {"total", total},          {"C1", C1},
          {"C0", C0},                {"gamma0", gamma0},        {"covering", covering},
          {"radius_sq", radius_sq},  {"bad_event_prob", bad_event_prob},
          {"N0", N0},                {"pre_asymptotic", pre_asymptotic ? 1.0 : 0.0}};
}

GeneralizationBound generalization_bound(const BoundInputs& in) {
  in.validate_offline();
  GeneralizationBound g;
  const double N1 = static_cast<double>(in.N1);
  const double T = static_cast<double>(in.T);
  const double s = N1 * T;
  const double ls = std::log(s);
  const double LR2 = in.L * in.L * in.R_M * in.R_M;
  const int n = in.n;

  g.covering = covering_constant(in.L, n, in.R_M);
  g.gamma0 = 2.0 * 16.0 * in.b1 * LR2 * (n + 3);
  const double eff = N1 * std::pow(T, 1.0 - in.b2);
  g.C1 = 2.0 * g.gamma0 + 2.0;
  g.sample_term = g.C1 * ls / eff;

  if (LR2 > 0.0 && in.b1 > 0.0) {
    g.radius_sq = g.gamma0 * ls / eff;
    const double e = g.gamma0 / (32.0 * in.b1 * LR2);
    const double log_prob = std::log(g.covering) - 0.5 * (n + 1) * std::log(g.radius_sq) - e * ls;
    g.bad_event_prob = std::min(1.0, std::exp(log_prob));
    g.N0 = find_N0(std::log(4.0 * LR2 * g.covering), g.gamma0, n, e);
  } else {
    // A constant model class: the covering and bad-event terms vanish.
    g.radius_sq = 0.0;
    g.bad_event_prob = 0.0;
    g.N0 = 3.0;
  }
  g.pre_asymptotic = s < g.N0;

  const double logN0 = std::log(std::max(g.N0, 3.0));
  const double N0 = std::max(g.N0, 3.0);
  g.C0 = 4.0 * (n + 1) * (1.0 + std::max(std::log(g.covering), 0.0) / logN0);
  if (in.sigma_v > 0.0) g.C0 += 4.0 * in.p / (in.sigma_v * logN0) + 1.0 / (in.sigma_v * in.sigma_v * N0 * logN0);

  // Without noise the offset is −(1/(N₁T))Σh² ≤ 0.
  const double offset = in.empirical_offset ? *in.empirical_offset
                        : in.sigma_v > 0.0  ? g.C0 * in.sigma_v * in.sigma_v * ls / s
                                            : 0.0;
  g.offset_term = 8.0 * offset;
  g.shift_term = in.kl == 0.0 ? 0.0 : 8.0 * LR2 * in.b1p * in.kl / std::pow(T, 1.0 - in.b2p);
  g.opt_term = 16.0 * in.eps_star;
  g.total = g.sample_term + g.offset_term + g.shift_term + g.opt_term;
  return g;
}

double lms_base_constant(double A, double gamma, double d) {
  const double a2 = A * A / d;
  return (1.0 + a2) * (1.0 + a2) * (1.0 + a2 / ((1.0 - gamma) * (1.0 - gamma)));
}

TermList PredictionBound::terms() const {
  TermList t = {{"J_mis", J_mis},       {"J_opt", J_opt},         {"J_est", J_est},
                {"total", total},       {"C_d", C_d},             {"C_base", C_base},
                {"M_d", M_d},           {"N_d", N_d},             {"coef_eps", coef_eps},
                {"coef_drift", coef_drift}, {"coef_noise", coef_noise}, {"C_online", C_online},
                {"eps_sq_bound", eps_sq_bound}};
  for (const auto& [k, v] : generalization.terms()) t.emplace_back("generalization_" + k, v);
  return t;
}

PredictionBound prediction_bound(const BoundInputs& in) {
  in.validate();
  PredictionBound pb;
  const double d = in.d;
  const double T = static_cast<double>(in.T);
  pb.C_base = lms_base_constant(in.A, in.gamma, d);
  pb.C_d = pb.C_base * (1.0 + 1.0 / d);
  const double sC = std::sqrt(pb.C_d);
  pb.M_d = sC * d + 1.0 + d;
  pb.coef_eps = pb.M_d * (pb.C_base * (1.0 + d) / (sC * d) + 1.0);
  pb.coef_drift = 16.0 * pb.M_d / sC;
  pb.coef_noise = (sC + 1.0 + 1.0 / d) * (sC + 1.0 + 1.0 / d);
  pb.N_d = std::max(pb.coef_eps, pb.coef_drift);

  pb.generalization = generalization_bound(in);
  const GeneralizationBound& g = pb.generalization;
  const double L0 = in.L0_average();
  pb.eps_sq_bound = in.L1 * g.total + L0;

  const double LR2 = in.L * in.L * in.R_M * in.R_M;
  pb.C_online = std::max(g.C1 + 8.0 * g.C0 * in.sigma_v * in.sigma_v, 8.0 * LR2 * in.b1p);

  auto scaled = [&](double term) { return in.L1 == 0.0 ? 0.0 : in.L1 * term; };
  pb.J_mis = pb.coef_eps * (scaled(g.shift_term) + L0);
  pb.J_opt = pb.coef_eps * scaled(g.opt_term);
  const double B = in.B, dl = in.delta_T;
  pb.J_est = pb.coef_eps * scaled(g.sample_term + g.offset_term) +
             pb.coef_drift * (B * dl + dl * dl + B * B / T) + pb.coef_noise * in.sigma_T2;
  pb.total = pb.J_mis + pb.J_opt + pb.J_est;
  return pb;
}

double lms_regret_rhs(double A, double gamma, double d, double B, long T, double sum_w2, double sum_eps2,
                      double delta_rms) {
  const double c = lms_base_constant(A, gamma, d);
  const double Td = static_cast<double>(T);
  return c * ((1.0 + 1.0 / d) * sum_w2 + (1.0 + d) * sum_eps2) + 16.0 * d * B * Td * delta_rms +
         4.0 * d * Td * delta_rms * delta_rms + 16.0 * d * B * B;
}

double lms_regret_rhs_mds(double A, double d, double B, long T, double sum_eps2, double delta_rms,
                          double W_max) {
  const double Td = static_cast<double>(T);
  const double k = d + A * A;
  return 4.0 * sum_eps2 + 8.0 * k * B * Td * delta_rms + 2.0 * k * Td * delta_rms * delta_rms +
         16.0 * d * B * B + 4.0 * A * A / d * Td * W_max * W_max;
}

}  // namespace metalms
