#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "metalms/config.hpp"
#include "metalms/csv.hpp"
#include "metalms/errors.hpp"
#include "metalms/experiments.hpp"
#include "metalms/presets.hpp"
#include "metalms/trajectory_io.hpp"
#include "support.hpp"

using namespace metalms;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(METALMS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("emit_csv writes the declared schema and round-trips exactly") {
  const std::string dir = testsupport::scratch_dir("harness_csv");
  Series s;
  s.columns = {"t", "J_meta", "J_single", "J_fixed"};
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const double a = std::exp(uniform(rng, -30, 30)), b = uniform(rng, -1, 1) / 3.0;
    s.rows.push_back({static_cast<double>(t), a, b, std::nextafter(1.0, 2.0) * (t + 0.1)});
  }
  s.rows.push_back({50, 0.0, -0.0, 1e-310});
  emit_csv(s, dir + "/curves.csv");
  const CsvDocument doc = read_csv(dir + "/curves.csv");
  CHECK(doc.header == s.columns);
  const Series back = read_series(dir + "/curves.csv");
  REQUIRE(back.rows.size() == s.rows.size());
  for (std::size_t r = 0; r < s.rows.size(); ++r)
    for (std::size_t c = 0; c < s.columns.size(); ++c) CHECK(back.rows[r][c] == s.rows[r][c]);
}

TEST_CASE("emit_csv rejects empty or ragged series and surfaces I/O failure") {
  const std::string dir = testsupport::scratch_dir("harness_csv_err");
  Series empty;
  empty.columns = {"t"};
  CHECK_THROWS_AS(emit_csv(empty, dir + "/e.csv"), InvalidInput);
  Series ragged;
  ragged.columns = {"t", "v"};
  ragged.rows = {{1.0}};
  CHECK_THROWS_AS(emit_csv(ragged, dir + "/r.csv"), InvalidInput);
  Series ok;
  ok.columns = {"t"};
  ok.rows = {{1.0}};
  CHECK_THROWS_AS(emit_csv(ok, dir + "/missing/dir/x.csv"), IoError);
}

TEST_CASE("number formatting is shortest round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(uniform(rng, -1, 1), static_cast<int>(uniform(rng, -200, 200)));
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK_THROWS_AS(parse_number("1.5x"), InvalidInput);
}

TEST_CASE("config text round-trips a system description") {
  for (const SystemSpec& spec : {presets::sigmoid_target(), presets::rate_check().train, presets::settling().target,
                                 presets::bounds_target({})}) {
    Config c;
    spec_to_config(spec, c);
    const SystemSpec back = spec_from_config(Config::parse(c.text()));
    CHECK(back.family == spec.family);
    CHECK(back.n == spec.n);
    CHECK(back.p == spec.p);
    CHECK(back.alpha_star == spec.alpha_star);
    CHECK(back.box.lo == spec.box.lo);
    CHECK(back.box.hi == spec.box.hi);
    CHECK(back.beta.kind == spec.beta.kind);
    CHECK(back.regressor.kind == spec.regressor.kind);
    CHECK(back.noise.kind == spec.noise.kind);
    CHECK(back.ball_radius == spec.ball_radius);
    CHECK(back.output_bound == spec.output_bound);
    CHECK(back.lipschitz == spec.lipschitz);
    // Same spec and seed simulate the same path.
    CHECK(simulate_target(back, 50, 4).y == simulate_target(spec, 50, 4).y);
  }
}

TEST_CASE("config parsing and lookups") {
  const Config c = Config::parse("[a]\nx = 1.5\nv = 1, 2 3\nflag = true\n[b]\nname = hello\n");
  CHECK(c.get_double("a.x") == 1.5);
  CHECK(c.get_vector("a.v") == Eigen::Vector3d(1, 2, 3));
  CHECK(c.get_bool("a.flag", false));
  CHECK(c.get_string("b.name") == "hello");
  CHECK(c.get_double("a.missing", 7.0) == 7.0);
  CHECK_FALSE(c.get_optional("a.missing"));
  CHECK_THROWS_AS(c.get_double("a.missing"), InvalidInput);
  CHECK_THROWS_AS(c.get_double("b.name"), InvalidInput);
}

TEST_CASE("bound inputs load from config") {
  const Config c = Config::parse("[bounds]\nL = 2\nn = 3\nN1 = 5\nT = 100\nd = 40\nA = 2\nL0_schedule = 0.1, 0.3\n");
  const BoundInputs in = bounds_from_config(c);
  CHECK(in.L == 2.0);
  CHECK(in.n == 3);
  CHECK(in.N1 == 5);
  CHECK(in.T == 100);
  CHECK(in.L0_average() == doctest::Approx(0.2));
  CHECK_NOTHROW(prediction_bound(in));
}

TEST_CASE("experiment config validation") {
  const Config good = Config::parse("[experiment]\npreset = rate-check\nhorizons = 100, 200, 400\nseed = 9\n");
  const ExperimentConfig e = ExperimentConfig::from_config(good);
  CHECK(e.preset == Preset::RateCheck);
  CHECK(e.horizons == std::vector<long>{100, 200, 400});
  CHECK(e.seed == 9);
  CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[experiment]\npreset = rate-check\nhorizons = 100, 100\n")),
                  InvalidInput);
  CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[experiment]\npreset = rate-check\nhorizons = 400, 200\n")),
                  InvalidInput);
  CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[experiment]\npreset = nope\n")), InvalidInput);
  for (Preset p : {Preset::CurveComparison, Preset::RateCheck, Preset::SettlingCheck, Preset::BoundsReport, Preset::DepmatrixDemo})
    CHECK(preset_from_string(to_string(p)) == p);
}

TEST_CASE("curve comparison with one replication and a fixed seed writes identical files") {
  const std::string a = testsupport::scratch_dir("harness_curves_a"), b = testsupport::scratch_dir("harness_curves_b");
  ExperimentConfig cfg;
  cfg.preset = Preset::CurveComparison;
  cfg.replications = 1;
  cfg.T = 1500;
  cfg.seed = 12;
  cfg.out_dir = a;
  const ExperimentSummary sa = run_experiment(cfg);
  cfg.out_dir = b;
  const ExperimentSummary sb = run_experiment(cfg);
  REQUIRE(sa.files.size() == sb.files.size());
  CHECK(sa.files.size() >= 3);
  for (std::size_t i = 0; i < sa.files.size(); ++i) {
    CHECK(fs::path(sa.files[i]).filename() == fs::path(sb.files[i]).filename());
    CHECK(testsupport::slurp(sa.files[i]) == testsupport::slurp(sb.files[i]));
  }
  const CsvDocument curves = read_csv(a + "/curves.csv");
  CHECK(curves.header == std::vector<std::string>{"t", "J_meta", "J_single", "J_fixed"});
  CHECK(curves.rows.size() == 1500);
  CHECK(read_csv(a + "/offline_error.csv").column("error") >= 0);
  const CsvDocument summary = read_csv(a + "/summary.csv");
  CHECK(summary.header == std::vector<std::string>{"term", "value"});
}

TEST_CASE("depmatrix demo reports a bounded norm for the mixing chain") {
  ExperimentConfig cfg;
  cfg.preset = Preset::DepmatrixDemo;
  const DepmatrixResult r = run_depmatrix_demo(cfg);
  CHECK(r.horizons.size() == r.norm_sq.size());
  CHECK(std::abs(r.slope) <= 0.1);
}

TEST_CASE("command-line pipeline: simulate, fit, predict from manifest and from stdin") {
  const std::string dir = testsupport::scratch_dir("harness_cli");
  const std::string src = dir + "/src", tgt = dir + "/tgt";
  REQUIRE(run_cli("--seed 3 --out-dir " + src + " simulate --spec settling-source --N1 2 --T 300") == 0);
  CHECK(fs::exists(src + "/manifest.ini"));
  REQUIRE(run_cli("--seed 3 offline-fit --dataset " + src + "/manifest.ini --method grid --segments 10 --out " + dir +
                  "/est.csv") == 0);
  const CsvDocument est = read_csv(dir + "/est.csv");
  CHECK(est.header == std::vector<std::string>{"alpha_0", "alpha_1", "loss", "eps_cert", "method"});
  CHECK(est.rows.at(0).at(4) == "grid");
  REQUIRE(run_cli("--seed 4 offline-fit --dataset " + src + "/manifest.ini --method random --budget 50 --out " + dir +
                  "/est_rnd.csv") == 0);
  CHECK(read_csv(dir + "/est_rnd.csv").rows.at(0).at(4) == "random");

  REQUIRE(run_cli("--seed 5 --out-dir " + tgt + " simulate --spec settling-target --target --T 200") == 0);
  const auto settle = presets::settling();
  Config pc;
  spec_to_config(settle.target, pc);
  pc.set("predictor.d", settle.d);
  pc.set("predictor.N2", 3.0);
  pc.save(dir + "/predictor.ini");

  REQUIRE(run_cli("predict --dataset " + tgt + "/manifest.ini --alpha-hat " + dir + "/est.csv --config " + dir +
                  "/predictor.ini --trace " + dir + "/trace_a.csv --full-trace") == 0);
  const CsvDocument trace = read_csv(dir + "/trace_a.csv");
  CHECK(trace.rows.size() == 200);
  CHECK(trace.header.size() == 5 + 6);
  CHECK(trace.header[4] == "J_running");

  const std::string traj = tgt + "/" + read_manifest(tgt + "/manifest.ini").files.at(0);
  REQUIRE(run_cli("predict --dataset - --alpha-hat " + dir + "/est.csv --config " + dir + "/predictor.ini --trace " +
                  dir + "/trace_b.csv --full-trace < " + traj) == 0);
  CHECK(testsupport::slurp(dir + "/trace_a.csv") == testsupport::slurp(dir + "/trace_b.csv"));
}

TEST_CASE("command-line exit codes") {
  const std::string dir = testsupport::scratch_dir("harness_exit");
  CHECK(run_cli("") == 2);
  CHECK(run_cli("experiment no-such-preset") == 2);
  CHECK(run_cli("simulate --spec no-such-system") == 2);
  CHECK(run_cli("bounds report --inputs " + dir + "/missing.ini") == 1);

  write_text(dir + "/bounds.ini", "[bounds]\nN1 = 4\nT = 256\nd = 5\nA = 1\ngamma = 0.5\n");
  CHECK(run_cli("bounds report --inputs " + dir + "/bounds.ini --out " + dir + "/report.csv") == 0);
  const CsvDocument rep = read_csv(dir + "/report.csv");
  CHECK(rep.header == std::vector<std::string>{"term", "value"});
  CHECK(rep.column("value") == 1);
  CHECK(run_cli("bounds report --inputs " + dir + "/bounds.ini --out " + dir + "/no/such/dir/r.csv") == 1);
  write_text(dir + "/bad_bounds.ini", "[bounds]\nd = 1\nA = 1\ngamma = 0.5\n");
  CHECK(run_cli("bounds report --inputs " + dir + "/bad_bounds.ini") == 2);

  write_text(dir + "/chain.ini",
             "[P]\ntype = gaussian\ninit_mean = 10\ninit_std = 1\na = 0.5\nc = 0\ns = 1\nT = 5\n"
             "[Q]\ntype = gaussian\ninit_mean = 0\ninit_std = 1\na = 0.5\nc = 0\ns = 1\nT = 5\n");
  CHECK(run_cli("kl chain --spec " + dir + "/chain.ini --out " + dir + "/kl.csv") == 0);
  CHECK(parse_number(read_csv(dir + "/kl.csv").rows.at(0).at(1)) == 50.0);

  write_text(dir + "/dep.ini", "[chain]\ntype = finite\ninitial = 0.5, 0.5\nkernel = 1, 0, 0, 1\nT = 3\n");
  CHECK(run_cli("depmatrix --chain " + dir + "/dep.ini --out " + dir + "/dep.csv") == 0);
  CHECK(run_cli("depmatrix --chain " + dir + "/dep.ini --max-events 2") == 2);

  write_text(dir + "/drift.csv", "K,B,M\n1.5,0.1,2\n-2,0.2,1\n");
  CHECK(run_cli("drift --case case1 --inputs " + dir + "/drift.csv") == 0);

  // Feature bound A far below ‖φ‖ breaks the online contract.
  REQUIRE(run_cli("--seed 5 --out-dir " + dir + "/tgt simulate --spec settling-target --target --T 50") == 0);
  write_text(dir + "/est.csv", "alpha_0,alpha_1,loss,eps_cert,method\n1,0.5,0,0,grid\n");
  const auto settle = presets::settling();
  Config pc;
  spec_to_config(settle.target, pc);
  pc.set("predictor.A", 0.05);
  pc.set("predictor.d", 10.0);
  pc.save(dir + "/pred.ini");
  CHECK(run_cli("predict --dataset " + dir + "/tgt/manifest.ini --alpha-hat " + dir + "/est.csv --config " + dir +
                "/pred.ini --trace " + dir + "/trace.csv") == 2);
}
