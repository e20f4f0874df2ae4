#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "metalms/errors.hpp"
#include "metalms/nls.hpp"
#include "metalms/presets.hpp"
#include "support.hpp"

using namespace metalms;
using testsupport::linear_ramp;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// y = α*²x + noise on an i.i.d. bounded regressor, box [lo, hi].
SystemSpec quadratic_system(double alpha_star, double lo, double hi, double noise) {
  SystemSpec s;
  s.family = FeatureFamily::QuadraticScalar;
  s.n = s.m = s.p = 1;
  s.alpha_star = scalar(alpha_star);
  s.box = CompactBox(scalar(lo), scalar(hi));
  s.beta = BetaSchedule::constant(scalar(1.0));
  s.regressor.kind = RegressorDynamics::Kind::Exogenous;
  s.regressor.mean = scalar(0.0);
  s.regressor.innovation = NoiseLaw::truncated_gaussian(1.0, 2.0);
  if (noise > 0.0) s.noise = NoiseLaw::uniform(noise);
  // |∂(α²x)/∂α| = 2|α||x| ≤ 2·max(|lo|, |hi|)·2.
  s.lipschitz = 4.0 * std::max(std::abs(lo), std::abs(hi));
  return s;
}

// Loss by a plain double loop, independent of LossEvaluator.
double reference_loss(const MultiTrajectoryDataset& ds, const Eigen::VectorXd& a) {
  double acc = 0.0;
  long count = 0;
  for (const auto& tr : ds.trajectories)
    for (long t = 0; t < tr.length(); ++t) {
      const Eigen::VectorXd x = tr.x.row(t).transpose();
      const double r = tr.y[t] - ds.spec->beta.at(t).dot(features(*ds.spec, a, x, t));
      acc += r * r;
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("empirical loss examples") {
  const auto ds = simulate_source(linear_ramp(2.0, 1.0), 1, 3, 1);
  CHECK(empirical_loss(ds, scalar(2.0)) == 0.0);
  CHECK(empirical_loss(ds, scalar(3.0)) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_loss(ds, scalar(7.0)), InvalidInput);
  MultiTrajectoryDataset empty;
  empty.spec = ds.spec;
  CHECK_THROWS_AS(empirical_loss(empty, scalar(2.0)), InvalidInput);
}

TEST_CASE("empirical loss matches a reference loop and ignores trajectory order") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, rep % 2 == 1);
    auto ds = simulate_source(spec, 4, 80, 40 + rep);
    const Eigen::Vector2d a(uniform(rng, 0.0, 2.0), uniform(rng, -1.0, 1.0));
    const double v = empirical_loss(ds, a);
    CHECK(v == doctest::Approx(reference_loss(ds, a)).epsilon(1e-12));
    std::reverse(ds.trajectories.begin(), ds.trajectories.end());
    CHECK(empirical_loss(ds, a) == doctest::Approx(v).epsilon(1e-13));
  }
}

TEST_CASE("grid search finds an on-grid truth in noiseless data") {
  const auto ds = simulate_source(linear_ramp(2.0, 1.0), 1, 20, 1);
  const CompactBox box(scalar(0.0), scalar(4.0));
  const NlsEstimate est = grid_search_nls(ds, box, 4);
  CHECK(est.alpha[0] == 2.0);
  CHECK(est.loss == 0.0);
  CHECK(est.evaluations == 5);
  CHECK(est.half_diagonal == 0.5);
  CHECK(est.loss == empirical_loss(ds, est.alpha));
  CHECK_THROWS_AS(grid_search_nls(ds, box, 0), InvalidInput);
}

TEST_CASE("grid ties go to the lexicographically smallest point") {
  const auto ds = simulate_source(quadratic_system(1.0, -2.0, 2.0, 0.0), 1, 30, 2);
  const NlsEstimate est = grid_search_nls(ds, ds.spec->box, 4);
  CHECK(est.alpha[0] == -1.0);
  CHECK(est.loss == 0.0);
}

TEST_CASE("grid certificate: deterministic with a Lipschitz constant, uncertified without") {
  const auto ds = simulate_source(quadratic_system(1.3, 0.5, 2.0, 0.2), 1, 50, 3);
  const NlsEstimate est = grid_search_nls(ds, ds.spec->box, 10);
  CHECK(est.cert_kind == CertificateKind::Deterministic);
  CHECK(std::isfinite(est.eps_cert));
  SystemSpec bare = *ds.spec;
  bare.lipschitz.reset();
  MultiTrajectoryDataset ds2 = ds;
  ds2.spec = std::make_shared<const SystemSpec>(bare);
  const NlsEstimate est2 = grid_search_nls(ds2, bare.box, 10);
  CHECK(est2.cert_kind == CertificateKind::Uncertified);
  CHECK(std::isinf(est2.eps_cert));
  CHECK(est2.alpha == est.alpha);
}

TEST_CASE("doubling the grid resolution never increases the achieved loss") {
  Rng rng(4);
  for (int rep = 0; rep < 15; ++rep) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, false);
    const auto ds = simulate_source(spec, 1, 60, 100 + rep);
    const long K = 3 + rep % 5;
    const double coarse = grid_search_nls(ds, spec.box, K).loss;
    const double fine = grid_search_nls(ds, spec.box, 2 * K).loss;
    CHECK(fine <= coarse);
  }
}

TEST_CASE("random search is deterministic and nested in its budget") {
  Rng rng(5);
  const SystemSpec spec = testsupport::random_tanh_system(rng, false);
  const auto ds = simulate_source(spec, 1, 60, 9);
  const NlsEstimate a = random_search_nls(ds, spec.box, 1, 42);
  const NlsEstimate b = random_search_nls(ds, spec.box, 1, 42);
  CHECK(a.alpha == b.alpha);
  CHECK(a.loss == b.loss);
  CHECK(a.evaluations == 5);
  CHECK(a.cert_kind == CertificateKind::Statistical);
  double prev = kInf;
  for (long budget : {1L, 2L, 5L, 20L, 100L, 400L}) {
    const NlsEstimate e = random_search_nls(ds, spec.box, budget, 42);
    CHECK(e.loss <= prev);
    CHECK(spec.box.contains(e.alpha));
    CHECK(e.loss == empirical_loss(ds, e.alpha));
    prev = e.loss;
  }
  CHECK_THROWS_AS(random_search_nls(ds, spec.box, 0, 1), InvalidInput);
}

TEST_CASE("random search with 1e4 draws nearly matches the 50-segment grid on the sigmoid system") {
  const SystemSpec spec = presets::sigmoid_source();
  int close = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto ds = simulate_source(spec, 1, 1000, 500 + s);
    const double grid = grid_search_nls(ds, spec.box, presets::kSigmoidSegments).loss;
    const double rnd = random_search_nls(ds, spec.box, 10000, 900 + s).loss;
    if (rnd <= grid + 0.05) ++close;
  }
  CHECK(close >= 18);
}

TEST_CASE("certify_epsilon basics") {
  const auto ds = simulate_source(linear_ramp(2.0, 1.0), 1, 10, 1);
  const CompactBox box(scalar(0.0), scalar(4.0));
  const NlsEstimate est = grid_search_nls(ds, box, 4);
  CHECK(certify_epsilon(est, ds, box, 0.0).value == 0.0);
  // Exact hit on noiseless data: zero loss, so the gap is zero.
  CHECK(certify_epsilon(est, ds, box, 50.0).value == 0.0);
  CHECK_THROWS_AS(certify_epsilon(est, ds, box, -1.0), InvalidInput);
  const NlsEstimate rnd = random_search_nls(ds, box, 10, 1);
  const EpsCertificate c = certify_epsilon(rnd, ds, box, 1.0);
  CHECK(c.warning);
  CHECK(c.kind == CertificateKind::Statistical);
  CHECK(c.value == rnd.eps_cert);
}

TEST_CASE("grid certificate covers the gap to a dense 1e6-point scan") {
  Rng rng(6);
  for (int trial = 0; trial < 6; ++trial) {
    const double a_star = uniform(rng, 0.6, 1.9);
    const SystemSpec spec = quadratic_system(a_star, 0.5, 2.0, uniform(rng, 0.1, 1.0));
    const auto ds = simulate_source(spec, 1, 40, 70 + trial);
    const long K = 3 + trial;
    const NlsEstimate est = grid_search_nls(ds, spec.box, K);
    const LossEvaluator loss(ds);
    double dense = kInf;
    const long pts = 1000000;
    Eigen::VectorXd a(1);
    for (long k = 0; k <= pts; ++k) {
      a[0] = 0.5 + 1.5 * static_cast<double>(k) / pts;
      dense = std::min(dense, loss(a));
    }
    const double cert = certify_epsilon(est, ds, spec.box, *spec.lipschitz).value;
    CHECK(est.loss - dense <= cert);
    CHECK(est.loss - dense >= -1e-12);
  }
}

TEST_CASE("grid argmin is unchanged when outputs and model are scaled together") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    SystemSpec spec = linear_ramp(uniform(rng, 0.2, 3.8), 1.0);
    spec.regressor.slope = 0.0;
    spec.regressor.innovation = NoiseLaw::gaussian(1.0);
    spec.noise = NoiseLaw::gaussian(0.5);
    const auto ds = simulate_source(spec, 1, 50, 200 + rep);
    const double c = uniform(rng, 0.1, 10.0);
    SystemSpec scaled = spec;
    scaled.beta = BetaSchedule::constant(scalar(c));
    MultiTrajectoryDataset ds2 = ds;
    ds2.spec = std::make_shared<const SystemSpec>(scaled);
    for (auto& tr : ds2.trajectories) tr.y *= c;
    CHECK(grid_search_nls(ds2, spec.box, 37).alpha == grid_search_nls(ds, spec.box, 37).alpha);
  }
}

TEST_CASE("empirical loss obeys the Lipschitz continuity bound") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, false);
    const auto ds = simulate_source(spec, 2, 60, 300 + rep);
    // |∂f/∂α| ≤ |β₀|·sqrt(x² + 1) with |x| ≤ 3.
    const double L = std::abs(spec.beta.base[0]) * std::sqrt(10.0);
    const Eigen::Vector2d a(uniform(rng, 0.0, 2.0), uniform(rng, -1.0, 1.0));
    Eigen::Vector2d b = a + Eigen::Vector2d(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
    b = b.cwiseMax(spec.box.lo).cwiseMin(spec.box.hi);
    const double la = empirical_loss(ds, a), lb = empirical_loss(ds, b);
    const double dist = (a - b).norm();
    CHECK(std::abs(la - lb) <= (2.0 * std::sqrt(std::max(la, lb)) * L + L * L * dist) * dist + 1e-12);
  }
}

TEST_CASE("refined grid improves on its starting grid and stays in the box") {
  Rng rng(9);
  for (int rep = 0; rep < 8; ++rep) {
    const SystemSpec spec = testsupport::random_tanh_system(rng, false);
    const auto ds = simulate_source(spec, 1, 100, 400 + rep);
    const NlsEstimate g = grid_search_nls(ds, spec.box, 8);
    const NlsEstimate r = refined_grid_search_nls(ds, spec.box, 8, 4);
    CHECK(r.loss <= g.loss);
    CHECK(spec.box.contains(r.alpha));
    CHECK(r.loss == empirical_loss(ds, r.alpha));
    CHECK(r.cert_kind == CertificateKind::Uncertified);
    CHECK(r.method == NlsMethod::RefinedGrid);
    CHECK(r.evaluations == 4 * 81);
  }
  const auto ds = simulate_source(linear_ramp(2.0, 1.0), 1, 5, 1);
  CHECK_THROWS_AS(refined_grid_search_nls(ds, ds.spec->box, 4, 0), InvalidInput);
}
