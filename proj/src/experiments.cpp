#include "metalms/experiments.hpp"

#include <cmath>
#include <filesystem>

#include "metalms/csv.hpp"
#include "metalms/diagnostics.hpp"
#include "metalms/drift.hpp"
#include "metalms/errors.hpp"
#include "metalms/nls.hpp"
#include "metalms/presets.hpp"
#include "metalms/stats.hpp"

namespace metalms {

namespace fs = std::filesystem;

std::string to_string(Preset p) {
  switch (p) {
    case Preset::CurveComparison: return "fig1-repro";
    case Preset::RateCheck: return "rate-check";
    case Preset::SettlingCheck: return "theorem37-check";
    case Preset::BoundsReport: return "bounds-report";
    case Preset::DepmatrixDemo: return "depmatrix-demo";
  }
  return "fig1-repro";
}

Preset preset_from_string(const std::string& name) {
  for (Preset p : {Preset::CurveComparison, Preset::RateCheck, Preset::SettlingCheck, Preset::BoundsReport,
                   Preset::DepmatrixDemo})
    if (to_string(p) == name) return p;
  throw InvalidInput("unknown preset '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig e;
  e.preset = preset_from_string(cfg.get_string("experiment.preset"));
  e.replications = static_cast<int>(cfg.get_long("experiment.replications", 0));
  e.seed = static_cast<std::uint64_t>(cfg.get_long("experiment.seed", 1));
  e.T = cfg.get_long("experiment.T", 0);
  if (cfg.has("experiment.horizons")) {
    const Eigen::VectorXd h = cfg.get_vector("experiment.horizons");
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (h[i] != std::floor(h[i])) throw InvalidInput("horizons must be integers");
      e.horizons.push_back(static_cast<long>(h[i]));
    }
  }
  e.out_dir = cfg.get_string("experiment.out_dir", "");
  if (!e.out_dir.empty()) e.out_dir = cfg.resolve_path(e.out_dir);
  e.median = cfg.get_bool("experiment.median", false);
  e.overrides = cfg;
  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (replications < 0) throw InvalidInput("replications must be nonnegative");
  if (T < 0) throw InvalidInput("T must be nonnegative");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw InvalidInput("horizons must be positive");
    if (i && horizons[i] <= horizons[i - 1]) throw InvalidInput("horizon sweep must be strictly increasing");
  }
}

namespace {

int reps_or(const ExperimentConfig& cfg, int fallback) { return cfg.replications > 0 ? cfg.replications : fallback; }
long horizon_or(const ExperimentConfig& cfg, long fallback) { return cfg.T > 0 ? cfg.T : fallback; }

// rows: replications, columns: steps.
Band make_band(const std::vector<std::vector<double>>& rows, bool median) {
  Band b;
  if (rows.empty()) return b;
  const std::size_t len = rows.front().size();
  std::vector<double> col(rows.size());
  for (std::size_t j = 0; j < len; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][j];
    b.center.push_back(median ? metalms::median(col) : mean(col));
    b.p10.push_back(percentile(col, 0.1));
    b.p90.push_back(percentile(col, 0.9));
  }
  return b;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

MultiTrajectoryDataset prefix(const MultiTrajectoryDataset& ds, long P) {
  MultiTrajectoryDataset out = ds;
  for (auto& tr : out.trajectories) {
    tr.x = tr.x.topRows(P).eval();
    tr.y = tr.y.head(P).eval();
    if (tr.truth) {
      tr.truth->beta_final = tr.truth->beta.row(P < tr.truth->beta.rows() ? P : P - 1).transpose();
      tr.truth->beta = tr.truth->beta.topRows(P).eval();
      tr.truth->noise = tr.truth->noise.head(P).eval();
      if (tr.truth->mismatch.size()) tr.truth->mismatch = tr.truth->mismatch.head(P).eval();
    }
  }
  return out;
}

SystemSpec spec_or(const ExperimentConfig& cfg, const std::string& section, SystemSpec fallback) {
  if (cfg.overrides && cfg.overrides->has_section(section)) return spec_from_config(*cfg.overrides, section);
  return fallback;
}

}  // namespace

ComparisonResult run_comparison(const ExperimentConfig& cfg) {
  const long T = horizon_or(cfg, 5000);
  const int R = reps_or(cfg, 50);
  const SystemSpec source = spec_or(cfg, "source", presets::sigmoid_source());
  const SystemSpec target = spec_or(cfg, "target", presets::sigmoid_target());
  const bool custom_predictor = cfg.overrides && cfg.overrides->has_section("predictor");
  const long segments = cfg.overrides ? cfg.overrides->get_long("experiment.segments", presets::kSigmoidSegments)
                                      : presets::kSigmoidSegments;

  ComparisonResult res;
  for (long P : {100L, 200L, 500L, 1000L, 2000L})
    if (P < T) res.prefixes.push_back(P);
  res.prefixes.push_back(T);

  std::vector<std::vector<double>> meta(R), single(R), fixed(R), offline(R);
  Eigen::VectorXd phi(target.m);
  for (int r = 0; r < R; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 0);
    const MultiTrajectoryDataset ds = simulate_source(source, 1, T, s);
    const NlsEstimate est = grid_search_nls(ds, source.box, segments);
    for (long P : res.prefixes) {
      const Eigen::VectorXd a = P == T ? est.alpha : grid_search_nls(prefix(ds, P), source.box, segments).alpha;
      offline[r].push_back((a - source.alpha_star).norm());
    }

    const Trajectory tgt = simulate_target(target, T, s);
    const PredictorConfig pc = custom_predictor ? predictor_from_config(*cfg.overrides, target)
                                                : presets::sigmoid_predictor(s);
    PredictorConfig one = pc;
    one.beta0 = pc.beta0.topRows(1);
    one.w0.resize(0);
    one.resolve();
    meta[r] = to_std(run_online(tgt, est.alpha, pc, target).J_running);
    single[r] = to_std(run_online(tgt, est.alpha, one, target).J_running);

    fixed[r].resize(T);
    double acc = 0.0;
    for (long t = 0; t < T; ++t) {
      features_into(target, est.alpha, tgt.x.row(t).transpose(), t, phi);
      const double e = tgt.y[t] - source.beta.at(t).dot(phi);
      acc += e * e;
      fixed[r][t] = acc / static_cast<double>(t + 1);
    }
    res.final_meta.push_back(meta[r].back());
    res.final_single.push_back(single[r].back());
    res.final_fixed.push_back(fixed[r].back());
  }
  res.J_meta = make_band(meta, cfg.median);
  res.J_single = make_band(single, cfg.median);
  res.J_fixed = make_band(fixed, cfg.median);
  res.offline_error = make_band(offline, cfg.median);
  return res;
}

RateResult run_rate_check(const ExperimentConfig& cfg) {
  const presets::RatePreset p = presets::rate_check();
  RateResult res;
  res.horizons = cfg.horizons.empty() ? p.horizons : cfg.horizons;
  if (res.horizons.size() < 2 || res.horizons.front() < 3) throw InvalidInput("rate-check needs two horizons >= 3");
  const int R = reps_or(cfg, 30);
  res.kl = kl_gaussian(p.train.regressor.init_mean, p.train.regressor.init_std, p.shifted.regressor.init_mean,
                       p.shifted.regressor.init_std);

  std::vector<double> lx, ly;
  for (long T : res.horizons) {
    std::vector<double> errs;
    for (int r = 0; r < R; ++r) {
      // Fresh streams per (replication, horizon): shared prefixes would
      // correlate the points of the fit.
      const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(T));
      const MultiTrajectoryDataset ds = simulate_source(p.train, 1, T, s);
      const NlsEstimate est = refined_grid_search_nls(ds, p.train.box, p.segments, p.levels);
      errs.push_back(generalization_error(p.shifted, est.alpha, T, p.fresh, derive_seed(s, 0, 1)));
    }
    const double e = cfg.median ? median(errs) : mean(errs);
    const double Td = static_cast<double>(T);
    res.mean_error.push_back(e);
    res.scaled.push_back(e * Td / std::log(Td));
    lx.push_back(std::log(Td / std::log(Td)));
    ly.push_back(std::log(e));
  }
  res.slope = least_squares_line(lx, ly).slope;
  return res;
}

SettlingResult run_settling_check(const ExperimentConfig& cfg) {
  const presets::SettlingPreset p = presets::settling();
  const long T = horizon_or(cfg, 20000);
  const int R = reps_or(cfg, 40);
  SettlingResult res;
  res.sigma2 = p.target.noise.variance();
  res.epsilon = p.epsilon;
  res.d = p.d;
  std::vector<std::vector<double>> curves(R);
  for (int r = 0; r < R; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 0);
    const MultiTrajectoryDataset ds = simulate_source(p.source, 1, p.source_T, s);
    const NlsEstimate est = grid_search_nls(ds, p.source.box, p.segments);
    const Trajectory tgt = simulate_target(p.target, T, s);
    const PredictionTrace tr = run_online(tgt, est.alpha, presets::settling_predictor(p, s), p.target);
    curves[r] = to_std(tr.J_running);
    res.final_J.push_back(tr.J_T());
  }
  res.mean_J = cfg.median ? median(res.final_J) : mean(res.final_J);
  res.J = make_band(curves, cfg.median);
  return res;
}

BoundsReportResult run_bounds_report(const ExperimentConfig& cfg) {
  const int R = reps_or(cfg, 50);
  BoundsReportResult res;
  for (int r = 0; r < R; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 0);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r), 0xb0);
    presets::BoundsSystem b;
    b.beta_scale = uniform(rng, 0.5, 2.0);
    b.drift = uniform(rng, 0.0, 0.3);
    b.period = uniform(rng, 100.0, 1000.0);
    b.noise = uniform(rng, 0.2, 1.0);
    b.x_bound = uniform(rng, 2.0, 4.0);
    const int N1 = 1 + r % 4;
    const long T = cfg.T > 0 ? cfg.T : 500 + static_cast<long>(uniform(rng, 0.0, 1500.0));
    const double gamma = 0.5;
    const double dmin = 2.0 / ((1.0 - gamma) * (1.0 - gamma));
    const double d = dmin * (r % 3 == 0 ? 2.0 : r % 3 == 1 ? 10.0 : 100.0);

    const SystemSpec src = presets::bounds_source(b);
    const SystemSpec tgt_spec = presets::bounds_target(b);
    const MultiTrajectoryDataset ds = simulate_source(src, N1, T, s);
    const NlsEstimate est = grid_search_nls(ds, src.box, 40);
    const Trajectory tgt = simulate_target(tgt_spec, T, s, est.alpha);

    PredictorConfig pc;
    pc.gamma = gamma;
    pc.d = d;
    pc.B = tgt_spec.ball_radius;
    pc.A = tgt_spec.feature_bound;
    pc.M_f = tgt_spec.output_bound;
    pc.W_max = tgt_spec.noise.max_abs();
    pc.claim_exp_concavity = true;
    pc.beta0 = initial_estimates(src.beta.at(0), 4, pc.B, 0.0, 1.0, s);
    pc.resolve();
    const PredictionTrace tr = run_online(tgt, est.alpha, pc, tgt_spec);

    // β_t − β⁰ is the known drift, so Case 2 with V = I applies with the
    // realized ‖φ_t(α*, x_t) − φ_t(α̂, x_t)‖².
    DriftCase dc;
    dc.id = DriftCaseId::Case2Eigvec;
    const Eigen::VectorXd beta0 = src.beta.at(0);
    for (long t = 0; t < T; ++t) {
      const Eigen::VectorXd x = tgt.x.row(t).transpose();
      DriftStepMatrix st;
      st.V = Eigen::MatrixXd::Identity(2, 2);
      st.beta0 = beta0;
      st.beta = tgt.truth->beta.row(t).transpose();
      st.B = (st.beta - beta0).norm();
      st.M = (features(tgt_spec, tgt_spec.alpha_star, x, t) - features(tgt_spec, est.alpha, x, t)).squaredNorm();
      dc.matrix_steps.push_back(std::move(st));
    }
    const DriftResult drift = drift_characterize(dc);

    BoundsCase c;
    BoundInputs& in = c.inputs;
    in.L = *src.lipschitz;
    in.n = src.n;
    in.p = src.p;
    in.R_M = src.box.radius();
    in.sigma_v = src.noise.sub_gaussian_proxy();
    in.eps_star = est.eps_cert;
    in.kl = 0.0;
    in.N1 = N1;
    in.T = T;
    in.L1 = drift.L1;
    in.L0_schedule = drift.L0;
    in.delta_T = std::sqrt(drift_energy(*tgt.truth));
    in.sigma_T2 = tgt_spec.noise.variance();
    in.A = pc.A;
    in.B = pc.B;
    in.gamma = gamma;
    in.d = d;
    in.W_max = pc.W_max;
    in.M_f = pc.M_f;
    in.lambda = pc.lambda;
    c.bound = prediction_bound(in);
    c.measured_J = tr.J_T();
    c.measured_generalization =
        generalization_error(src, est.alpha, T, 1, derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 2));
    res.cases.push_back(std::move(c));
  }
  return res;
}

DepmatrixResult run_depmatrix_demo(const ExperimentConfig& cfg) {
  DepmatrixResult res;
  res.horizons = cfg.horizons.empty() ? std::vector<long>{3, 4, 5, 6, 7, 8} : cfg.horizons;
  std::vector<double> xs;
  for (long T : res.horizons) {
    if (T < 2 || T > 16) throw InvalidInput("depmatrix-demo horizons must lie in [2, 16]");
    res.norm_sq.push_back(dependency_matrix(presets::mixing_chain(static_cast<int>(T))).norm_sq);
    xs.push_back(static_cast<double>(T));
  }
  res.slope = xs.size() >= 2 ? least_squares_line(xs, res.norm_sq).slope : 0.0;
  return res;
}

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_summary(const ExperimentConfig& cfg, ExperimentSummary& sum) {
  if (cfg.out_dir.empty()) return;
  const std::string path = out_path(cfg, "summary.csv");
  CsvWriter w(path, {"term", "value"});
  for (const auto& [k, v] : sum.values) w.row({k, v});
  w.close();
  sum.files.push_back(path);
}

void emit(const ExperimentConfig& cfg, ExperimentSummary& sum, const std::string& name, const Series& s) {
  if (cfg.out_dir.empty()) return;
  const std::string path = out_path(cfg, name);
  emit_csv(s, path);
  sum.files.push_back(path);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
  }
  ExperimentSummary sum;
  sum.values.emplace_back("seed", static_cast<double>(cfg.seed));
  switch (cfg.preset) {
    case Preset::CurveComparison: {
      const ComparisonResult r = run_comparison(cfg);
      Series curves{{"t", "J_meta", "J_single", "J_fixed"}, {}};
      Series bands{{"t", "J_meta_p10", "J_meta_p90", "J_single_p10", "J_single_p90", "J_fixed_p10", "J_fixed_p90"}, {}};
      for (std::size_t t = 0; t < r.J_meta.center.size(); ++t) {
        const double tt = static_cast<double>(t + 1);
        curves.rows.push_back({tt, r.J_meta.center[t], r.J_single.center[t], r.J_fixed.center[t]});
        bands.rows.push_back({tt, r.J_meta.p10[t], r.J_meta.p90[t], r.J_single.p10[t], r.J_single.p90[t],
                              r.J_fixed.p10[t], r.J_fixed.p90[t]});
      }
      Series offline{{"T_prefix", "error", "error_p10", "error_p90"}, {}};
      for (std::size_t i = 0; i < r.prefixes.size(); ++i)
        offline.rows.push_back({static_cast<double>(r.prefixes[i]), r.offline_error.center[i],
                                r.offline_error.p10[i], r.offline_error.p90[i]});
      emit(cfg, sum, "curves.csv", curves);
      emit(cfg, sum, "curve_bands.csv", bands);
      emit(cfg, sum, "offline_error.csv", offline);
      sum.values.emplace_back("replications", static_cast<double>(r.final_meta.size()));
      sum.values.emplace_back("J_T_meta", r.J_meta.center.back());
      sum.values.emplace_back("J_T_single", r.J_single.center.back());
      sum.values.emplace_back("J_T_fixed", r.J_fixed.center.back());
      sum.values.emplace_back("fixed_over_meta", r.J_fixed.center.back() / r.J_meta.center.back());
      sum.values.emplace_back("offline_error_final", r.offline_error.center.back());
      // Gaussian noises violate the bounded-noise assumption; flagged here.
      sum.values.emplace_back("unbounded_gaussian_noise", 1.0);
      break;
    }
    case Preset::RateCheck: {
      const RateResult r = run_rate_check(cfg);
      Series s{{"T", "mean_error", "error_T_over_logT"}, {}};
      for (std::size_t i = 0; i < r.horizons.size(); ++i)
        s.rows.push_back({static_cast<double>(r.horizons[i]), r.mean_error[i], r.scaled[i]});
      emit(cfg, sum, "rate.csv", s);
      sum.values.emplace_back("slope", r.slope);
      sum.values.emplace_back("kl", r.kl);
      break;
    }
    case Preset::SettlingCheck: {
      const SettlingResult r = run_settling_check(cfg);
      Series s{{"t", "J", "J_p10", "J_p90"}, {}};
      for (std::size_t t = 0; t < r.J.center.size(); ++t)
        s.rows.push_back({static_cast<double>(t + 1), r.J.center[t], r.J.p10[t], r.J.p90[t]});
      emit(cfg, sum, "settling.csv", s);
      sum.values.emplace_back("J_T", r.mean_J);
      sum.values.emplace_back("sigma2", r.sigma2);
      sum.values.emplace_back("epsilon", r.epsilon);
      sum.values.emplace_back("sigma2_plus_epsilon", r.sigma2 + r.epsilon);
      sum.values.emplace_back("d", r.d);
      break;
    }
    case Preset::BoundsReport: {
      const BoundsReportResult r = run_bounds_report(cfg);
      Series s{{"case", "J_mis", "J_opt", "J_est", "total", "measured_J", "generalization_total", "measured_generalization"},
               {}};
      int dominated = 0;
      for (std::size_t i = 0; i < r.cases.size(); ++i) {
        const BoundsCase& c = r.cases[i];
        s.rows.push_back({static_cast<double>(i), c.bound.J_mis, c.bound.J_opt, c.bound.J_est, c.bound.total,
                          c.measured_J, c.bound.generalization.total, c.measured_generalization});
        dominated += c.bound.total >= c.measured_J;
      }
      emit(cfg, sum, "bounds_report.csv", s);
      sum.values.emplace_back("cases", static_cast<double>(r.cases.size()));
      sum.values.emplace_back("dominated", dominated);
      break;
    }
    case Preset::DepmatrixDemo: {
      const DepmatrixResult r = run_depmatrix_demo(cfg);
      Series s{{"T", "norm_sq"}, {}};
      for (std::size_t i = 0; i < r.horizons.size(); ++i) s.rows.push_back({static_cast<double>(r.horizons[i]), r.norm_sq[i]});
      emit(cfg, sum, "depmatrix.csv", s);
      sum.values.emplace_back("slope", r.slope);
      break;
    }
  }
  write_summary(cfg, sum);
  return sum;
}

}  // namespace metalms
