// Command-line front end: simulation, offline fit, online prediction, bound
// evaluation and the preset experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "metalms/config.hpp"
#include "metalms/csv.hpp"
#include "metalms/dependency.hpp"
#include "metalms/errors.hpp"
#include "metalms/experiments.hpp"
#include "metalms/nls.hpp"
#include "metalms/presets.hpp"
#include "metalms/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace metalms;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int replications = 0;
};

SystemSpec named_spec(const std::string& name) {
  if (name == "sigmoid-source") return presets::sigmoid_source();
  if (name == "sigmoid-target") return presets::sigmoid_target();
  if (name == "rate-train") return presets::rate_check().train;
  if (name == "rate-shifted") return presets::rate_check().shifted;
  if (name == "settling-source") return presets::settling().source;
  if (name == "settling-target") return presets::settling().target;
  if (name == "bounds-source") return presets::bounds_source({});
  if (name == "bounds-target") return presets::bounds_target({});
  throw InvalidInput("unknown system preset '" + name + "'");
}

// A config path, or a preset name when no such file exists.
SystemSpec load_spec(const std::string& what) {
  if (fs::exists(what)) return spec_from_config(Config::load(what));
  return named_spec(what);
}

void write_terms(const TermList& terms, const std::string& out) {
  if (out.empty()) {
    std::cout << "term,value\n";
    for (const auto& [k, v] : terms) std::cout << k << ',' << format_number(v) << '\n';
    return;
  }
  CsvWriter w(out, {"term", "value"});
  for (const auto& [k, v] : terms) w.row({k, v});
  w.close();
}

CompactBox parse_box(const std::vector<std::string>& dims, const CompactBox& fallback) {
  if (dims.empty()) return fallback;
  Eigen::VectorXd lo(dims.size()), hi(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    std::string d = dims[i];
    const auto sep = d.find("..");
    if (sep != std::string::npos) d.replace(sep, 2, ",");
    const Eigen::VectorXd v = parse_vector(d);
    if (v.size() != 2) throw InvalidInput("box entries take the form lo,hi or lo..hi");
    lo[i] = v[0];
    hi[i] = v[1];
  }
  return CompactBox(lo, hi);
}

Eigen::VectorXd read_alpha(const std::string& path) {
  const CsvDocument doc = read_csv(path);
  if (doc.rows.empty()) throw InvalidInput("estimate file has no rows");
  std::vector<double> a;
  for (int j = 0;; ++j) {
    const int c = doc.column("alpha_" + std::to_string(j));
    if (c < 0) break;
    a.push_back(parse_number(doc.rows.front().at(c)));
  }
  if (a.empty()) throw InvalidInput("estimate file lacks alpha_0");
  return Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

int cmd_simulate(const Globals& g, const std::string& spec_arg, int N1, long T, bool target, bool truth) {
  const SystemSpec spec = load_spec(spec_arg);
  MultiTrajectoryDataset ds;
  if (target) {
    ds.spec = std::make_shared<const SystemSpec>(spec);
    ds.master_seed = g.seed;
    ds.trajectories.push_back(simulate_target(spec, T, g.seed));
    ds.seeds.push_back(derive_seed(g.seed, 0, 1));
  } else {
    ds = simulate_source(spec, N1, T, g.seed);
  }
  fs::create_directories(g.out_dir);
  Config c;
  spec_to_config(spec, c);
  c.save((fs::path(g.out_dir) / "system.ini").string());
  write_dataset(g.out_dir, ds, "system.ini", truth);
  std::cout << "wrote " << ds.count() << " trajectories to " << g.out_dir << '\n';
  return 0;
}

int cmd_offline_fit(const Globals& g, const std::string& manifest, const std::vector<std::string>& box_arg,
                    const std::string& method, long segments, long budget, std::optional<double> L,
                    const std::string& out) {
  const MultiTrajectoryDataset ds = load_dataset(manifest);
  const CompactBox box = parse_box(box_arg, ds.spec->box);
  NlsEstimate est;
  if (method == "grid") {
    if (L) {
      SystemSpec s = *ds.spec;
      s.lipschitz = *L;
      MultiTrajectoryDataset with_l = ds;
      with_l.spec = std::make_shared<const SystemSpec>(s);
      est = grid_search_nls(with_l, box, segments);
    } else {
      est = grid_search_nls(ds, box, segments);
    }
  } else if (method == "random") {
    est = random_search_nls(ds, box, budget, g.seed);
  } else {
    throw InvalidInput("method must be grid or random");
  }
  std::vector<std::string> header;
  std::vector<CsvCell> row;
  for (Eigen::Index j = 0; j < est.alpha.size(); ++j) {
    header.push_back("alpha_" + std::to_string(j));
    row.emplace_back(est.alpha[j]);
  }
  header.insert(header.end(), {"loss", "eps_cert", "method"});
  row.emplace_back(est.loss);
  row.emplace_back(est.eps_cert);
  row.emplace_back(to_string(est.method));
  CsvWriter w(out, header);
  w.row(row);
  w.close();
  std::cerr << "certificate: " << to_string(est.cert_kind) << ", evaluations: " << est.evaluations << '\n';
  return 0;
}

// Runs the predictor over rows `x_0..x_{p−1},y` one at a time, writing the
// trace as it goes.
int cmd_predict(const std::string& dataset, const std::string& alpha_path, const std::string& config_path,
                const std::string& trace_path, bool full) {
  const Config cfg = Config::load(config_path);
  std::optional<SystemSpec> spec;
  if (cfg.has_section("system")) spec = spec_from_config(cfg);

  std::optional<MultiTrajectoryDataset> ds;
  std::unique_ptr<std::ifstream> file;
  std::istream* in = nullptr;
  if (dataset == "-") {
    in = &std::cin;
  } else if (fs::path(dataset).extension() == ".ini") {
    ds = load_dataset(dataset);
    if (!spec) spec = *ds->spec;
  } else {
    file = std::make_unique<std::ifstream>(dataset);
    if (!*file) throw IoError("cannot read '" + dataset + "'");
    in = file.get();
  }
  if (!spec) throw InvalidInput("predict needs a [system] section when the dataset is not a manifest");
  const Eigen::VectorXd alpha = read_alpha(alpha_path);
  if (alpha.size() != spec->n) throw InvalidInput("estimate dimension differs from n");
  MetaLmsPredictor pred(predictor_from_config(cfg, *spec));
  const int N2 = pred.config().models();

  std::vector<std::string> header = {"t", "y", "y_pred", "loss", "J_running"};
  if (full) {
    for (int i = 0; i < N2; ++i) header.push_back("pred_" + std::to_string(i));
    for (int i = 0; i < N2; ++i) header.push_back("w_" + std::to_string(i));
  }
  CsvWriter w(trace_path, header);
  Eigen::VectorXd phi(spec->m);
  double cum = 0.0;
  long t = 0;
  auto step = [&](const Eigen::VectorXd& x, double y) {
    features_into(*spec, alpha, x, t, phi);
    const Eigen::VectorXd weights = pred.state().w;
    const StepPrediction p = pred.predict(phi);
    const double e = y - p.aggregate;
    cum += e * e;
    std::vector<CsvCell> row = {t, y, p.aggregate, e * e, cum / static_cast<double>(t + 1)};
    if (full) {
      for (int i = 0; i < N2; ++i) row.emplace_back(p.per_model[i]);
      for (int i = 0; i < N2; ++i) row.emplace_back(weights[i]);
    }
    w.row(row);
    pred.observe(y);
    ++t;
  };

  if (ds) {
    for (const auto& tr : ds->trajectories)
      for (long s = 0; s < tr.length(); ++s) step(tr.x.row(s).transpose(), tr.y[s]);
  } else {
    std::string line;
    if (!std::getline(*in, line)) throw InvalidInput("empty prediction stream");
    std::istringstream hs(line + "\n");
    const CsvDocument head = parse_csv(hs);
    const int cy = head.column("y");
    if (cy < 0) throw InvalidInput("stream header lacks column y");
    std::vector<int> cx;
    for (int j = 0; j < spec->p; ++j) {
      const int c = head.column("x_" + std::to_string(j));
      if (c < 0) throw InvalidInput("stream header lacks x_" + std::to_string(j));
      cx.push_back(c);
    }
    Eigen::VectorXd x(spec->p);
    while (std::getline(*in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (static_cast<int>(cells.size()) < static_cast<int>(head.header.size()))
        throw InvalidInput("short row in prediction stream");
      for (int j = 0; j < spec->p; ++j) x[j] = parse_number(cells[cx[j]]);
      step(x, parse_number(cells[cy]));
    }
  }
  w.close();
  std::cerr << "J_T = " << format_number(t ? cum / static_cast<double>(t) : 0.0) << " over " << t << " steps\n";
  return 0;
}

int cmd_bounds(const std::string& inputs, const std::string& out, bool generalization_only) {
  const BoundInputs in = bounds_from_config(Config::load(inputs));
  write_terms(generalization_only ? generalization_bound(in).terms() : prediction_bound(in).terms(), out);
  return 0;
}

int cmd_kl(const std::string& spec_path, const std::string& out) {
  const Config cfg = Config::load(spec_path);
  const bool gp = chain_is_gaussian(cfg, "P"), gq = chain_is_gaussian(cfg, "Q");
  if (gp != gq) throw InvalidInput("chains P and Q must be of the same type");
  const double v = gp ? kl_chain(gaussian_chain_from_config(cfg, "P"), gaussian_chain_from_config(cfg, "Q"))
                      : kl_chain(finite_chain_from_config(cfg, "P"), finite_chain_from_config(cfg, "Q"));
  write_terms({{"kl", v}}, out);
  return 0;
}

int cmd_depmatrix(const std::string& chain_path, std::size_t max_events, bool atoms, const std::string& out) {
  const Config cfg = Config::load(chain_path);
  const std::string section = cfg.has_section("chain") ? "chain" : "P";
  const DependencyResult r = dependency_matrix(finite_chain_from_config(cfg, section), max_events, atoms);
  TermList terms;
  for (Eigen::Index i = 0; i < r.gamma.rows(); ++i)
    for (Eigen::Index j = 0; j < r.gamma.cols(); ++j)
      terms.emplace_back("gamma_" + std::to_string(i) + "_" + std::to_string(j), r.gamma(i, j));
  terms.emplace_back("norm_sq", r.norm_sq);
  terms.emplace_back("lower_bound", r.lower_bound ? 1.0 : 0.0);
  write_terms(terms, out);
  return 0;
}

int cmd_drift(const std::string& case_name, const std::string& inputs, const std::string& out) {
  const DriftResult r = drift_characterize(read_drift_csv(inputs, drift_case_from_string(case_name)));
  if (!out.empty()) {
    CsvWriter w(out, {"t", "k", "rho", "L0", "branch"});
    for (std::size_t t = 0; t < r.L0.size(); ++t)
      w.row({static_cast<long>(t), t < r.k.size() ? r.k[t] : 0.0, t < r.rho.size() ? r.rho[t] : 0.0, r.L0[t],
             t < r.branch.size() ? to_string(r.branch[t]) : std::string()});
    w.close();
  }
  write_terms({{"L1", r.L1}, {"L0_mean", r.L0_mean()}}, "");
  return 0;
}

int cmd_experiment(const Globals& g, const std::string& preset, const std::string& config_path, long T,
                   bool median, bool seed_given, bool out_given) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ExperimentConfig::from_config(Config::load(config_path));
  if (!preset.empty()) cfg.preset = preset_from_string(preset);
  if (seed_given || config_path.empty()) cfg.seed = g.seed;
  if (out_given || cfg.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.replications > 0) cfg.replications = g.replications;
  if (T > 0) cfg.T = T;
  if (median) cfg.median = true;
  const ExperimentSummary s = run_experiment(cfg);
  write_terms(s.values, "");
  for (const auto& f : s.files) std::cerr << "wrote " << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage nonlinear system prediction: offline NLS, online meta-LMS, bound evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
  auto* out_opt = app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--replications", g.replications, "Monte Carlo replications (0 = preset default)")
      ->check(CLI::NonNegativeNumber);

  std::string spec_arg;
  int N1 = 1;
  long T = 1000;
  bool target = false, no_truth = false;
  auto* sim = app.add_subcommand("simulate", "Simulate a source dataset or a target trajectory");
  sim->add_option("--spec", spec_arg, "System config file or preset name")->required();
  sim->add_option("--N1", N1, "Number of source trajectories")->check(CLI::PositiveNumber);
  sim->add_option("--T", T, "Horizon")->check(CLI::PositiveNumber);
  sim->add_flag("--target", target, "Simulate one target trajectory");
  sim->add_flag("--no-truth", no_truth, "Omit hidden-truth columns");

  std::string manifest, method = "grid", out, alpha_path, config_path, trace_path;
  std::vector<std::string> box;
  long segments = 50, budget = 10000;
  std::optional<double> lip;
  auto* fit = app.add_subcommand("offline-fit", "Approximate NLS over the parameter box");
  fit->add_option("--dataset", manifest, "Dataset manifest")->required();
  fit->add_option("--box", box, "Per-dimension lo,hi (defaults to the system box)");
  fit->add_option("--method", method, "grid or random")->check(CLI::IsMember({"grid", "random"}));
  fit->add_option("--segments", segments, "Grid segments per dimension")->check(CLI::PositiveNumber);
  fit->add_option("--budget", budget, "Random-search samples")->check(CLI::PositiveNumber);
  fit->add_option("--lipschitz", lip, "Lipschitz constant for the grid certificate");
  fit->add_option("--out", out, "Estimate CSV")->required();

  std::string dataset;
  bool full = false;
  auto* pr = app.add_subcommand("predict", "Run the meta-LMS predictor over a dataset or stdin stream");
  pr->add_option("--dataset", dataset, "Manifest, trajectory CSV, or - for stdin")->required();
  pr->add_option("--alpha-hat", alpha_path, "Estimate CSV from offline-fit")->required();
  pr->add_option("--config", config_path, "Predictor config ([predictor], optional [system])")->required();
  pr->add_option("--trace", trace_path, "Trace CSV")->required();
  pr->add_flag("--full-trace", full, "Add per-model predictions and weights");

  std::string inputs;
  bool generalization_only = false;
  auto* bounds = app.add_subcommand("bounds", "Bound evaluation");
  auto* report = bounds->add_subcommand("report", "Prediction bound breakdown");
  bounds->require_subcommand(1);
  report->add_option("--inputs", inputs, "Bound inputs config")->required();
  report->add_option("--out", out, "term,value CSV (stdout if omitted)");
  report->add_flag("--generalization-only", generalization_only, "Only the generalization bound");

  std::string chain_path;
  auto* kl = app.add_subcommand("kl", "KL divergence of path laws");
  auto* klc = kl->add_subcommand("chain", "Chain-rule KL between chains [P] and [Q]");
  kl->require_subcommand(1);
  klc->add_option("--spec", chain_path, "Chain config")->required();
  klc->add_option("--out", out, "term,value CSV (stdout if omitted)");

  std::size_t max_events = 1u << 16;
  bool atoms = false;
  auto* dep = app.add_subcommand("depmatrix", "Dependency matrix of a finite chain");
  dep->add_option("--chain", chain_path, "Chain config")->required();
  dep->add_option("--max-events", max_events, "Enumeration cap");
  dep->add_flag("--atom-lower-bound", atoms, "Singleton events only (lower bound)");
  dep->add_option("--out", out, "term,value CSV (stdout if omitted)");

  std::string case_name;
  auto* dr = app.add_subcommand("drift", "Drift characterization (L1, L0)");
  dr->add_option("--case", case_name, "case1, case2 or case2-eigvec")->required();
  dr->add_option("--inputs", inputs, "Per-step inputs CSV")->required();
  dr->add_option("--out", out, "Per-step CSV");

  std::string preset;
  long exp_T = 0;
  bool median = false;
  auto* ex = app.add_subcommand("experiment", "Run a preset experiment");
  ex->add_option("preset", preset, "fig1-repro, rate-check, theorem37-check, bounds-report or depmatrix-demo");
  ex->add_option("--config", config_path, "Experiment config");
  ex->add_option("--T", exp_T, "Horizon override")->check(CLI::NonNegativeNumber);
  ex->add_flag("--median", median, "Report medians");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return cmd_simulate(g, spec_arg, N1, T, target, !no_truth);
    if (*fit) return cmd_offline_fit(g, manifest, box, method, segments, budget, lip, out);
    if (*pr) return cmd_predict(dataset, alpha_path, config_path, trace_path, full);
    if (*report) return cmd_bounds(inputs, out, generalization_only);
    if (*klc) return cmd_kl(chain_path, out);
    if (*dep) return cmd_depmatrix(chain_path, max_events, atoms, out);
    if (*dr) return cmd_drift(case_name, inputs, out);
    if (*ex) {
      if (preset.empty() && config_path.empty()) throw InvalidInput("experiment needs a preset or --config");
      return cmd_experiment(g, preset, config_path, exp_T, median, seed_opt->count() > 0, out_opt->count() > 0);
    }
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
