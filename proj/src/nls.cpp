#include "metalms/nls.hpp"

#include <cmath>

#include "metalms/errors.hpp"

namespace metalms {

std::string to_string(NlsMethod method) {
  switch (method) {
    case NlsMethod::Grid: return "grid";
    case NlsMethod::Random: return "random";
    case NlsMethod::RefinedGrid: return "refined-grid";
  }
  return "grid";
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Deterministic: return "deterministic";
    case CertificateKind::Statistical: return "statistical";
    case CertificateKind::Uncertified: return "uncertified";
  }
  return "uncertified";
}

LossEvaluator::LossEvaluator(const MultiTrajectoryDataset& ds) : ds_(ds) {
  ds.validate();
  const long T = ds.horizon();
  beta0_.resize(T, ds.spec->m);
  for (long t = 0; t < T; ++t) beta0_.row(t) = ds.spec->beta.at(t).transpose();
  samples_ = T * ds.count();
}

double LossEvaluator::operator()(const VecRef& alpha) const {
  const SystemSpec& spec = *ds_.spec;
  Eigen::VectorXd phi(spec.m);
  double acc = 0.0;
  for (const auto& tr : ds_.trajectories) {
    const long T = tr.length();
    for (long t = 0; t < T; ++t) {
      features_into(spec, alpha, tr.x.row(t).transpose(), t, phi);
      const double r = tr.y[t] - beta0_.row(t).dot(phi);
      acc += r * r;
    }
  }
  return acc / static_cast<double>(samples_);
}

double empirical_loss(const MultiTrajectoryDataset& ds, const VecRef& alpha) {
  if (ds.trajectories.empty()) throw InvalidInput("empirical_loss: empty dataset");
  if (!ds.spec) throw InvalidInput("empirical_loss: dataset has no spec");
  if (alpha.size() != ds.spec->n) throw InvalidInput("empirical_loss: alpha dimension differs from n");
  if (!ds.spec->box.contains(alpha)) throw InvalidInput("empirical_loss: alpha outside the parameter box");
  return LossEvaluator(ds)(alpha);
}

namespace {

void check_box(const MultiTrajectoryDataset& ds, const CompactBox& box) {
  if (!ds.spec) throw InvalidInput("dataset has no spec");
  if (box.dim() != ds.spec->n) throw InvalidInput("search box dimension differs from n");
}

double half_diagonal(const CompactBox& box, long segments) {
  return 0.5 * ((box.hi - box.lo) / static_cast<double>(segments)).norm();
}

}  // namespace

NlsEstimate grid_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long segments) {
  if (segments < 1) throw InvalidInput("grid_search_nls: segments must be at least 1");
  check_box(ds, box);
  const int n = box.dim();
  const long K = segments + 1;
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= static_cast<double>(K);
  if (total > 1e9) throw InvalidInput("grid_search_nls: grid too large");

  const LossEvaluator loss(ds);
  std::vector<long> idx(n, 0);
  Eigen::VectorXd a(n), best;
  double best_loss = kInf;
  long evals = 0;
  for (;;) {
    for (int i = 0; i < n; ++i) {
      a[i] = idx[i] == segments ? box.hi[i]
                                : box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(idx[i]) /
                                                  static_cast<double>(segments);
    }
    const double v = loss(a);
    ++evals;
    if (v < best_loss) {
      best_loss = v;
      best = a;
    }
    // Lexicographic order: the last coordinate runs fastest.
    int k = n - 1;
    while (k >= 0 && ++idx[k] == K) idx[k--] = 0;
    if (k < 0) break;
  }

  NlsEstimate est;
  est.alpha = best;
  est.loss = best_loss;
  est.method = NlsMethod::Grid;
  est.segments = segments;
  est.evaluations = evals;
  est.half_diagonal = half_diagonal(box, segments);
  if (ds.spec->lipschitz) {
    const auto cert = certify_epsilon(est, ds, box, *ds.spec->lipschitz);
    est.eps_cert = cert.value;
    est.cert_kind = cert.kind;
  } else {
    est.eps_cert = kInf;
    est.cert_kind = CertificateKind::Uncertified;
  }
  return est;
}

NlsEstimate refined_grid_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long segments,
                                    int levels) {
  if (levels < 1) throw InvalidInput("refined_grid_search_nls: levels must be at least 1");
  NlsEstimate est = grid_search_nls(ds, box, segments);
  CompactBox cur = box;
  long evals = est.evaluations;
  for (int level = 1; level < levels; ++level) {
    const Eigen::VectorXd cell = (cur.hi - cur.lo) / static_cast<double>(segments);
    const Eigen::VectorXd lo = (est.alpha - 2.0 * cell).cwiseMax(box.lo);
    const Eigen::VectorXd hi = (est.alpha + 2.0 * cell).cwiseMin(box.hi);
    cur = CompactBox(lo, hi);
    const NlsEstimate next = grid_search_nls(ds, cur, segments);
    evals += next.evaluations;
    if (next.loss < est.loss) {
      est.alpha = next.alpha;
      est.loss = next.loss;
    }
    est.half_diagonal = next.half_diagonal;
  }
  est.method = NlsMethod::RefinedGrid;
  est.evaluations = evals;
  est.eps_cert = kInf;
  est.cert_kind = CertificateKind::Uncertified;
  return est;
}

NlsEstimate random_search_nls(const MultiTrajectoryDataset& ds, const CompactBox& box, long budget,
                              std::uint64_t seed) {
  if (budget < 1) throw InvalidInput("random_search_nls: budget must be at least 1");
  check_box(ds, box);
  const int n = box.dim();
  if (n > 20) throw InvalidInput("random_search_nls: too many corners");
  const LossEvaluator loss(ds);
  Eigen::VectorXd best;
  double best_loss = kInf;
  long evals = 0;
  auto consider = [&](const Eigen::VectorXd& a) {
    const double v = loss(a);
    ++evals;
    if (v < best_loss) {
      best_loss = v;
      best = a;
    }
  };
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) consider(box.corner(mask));
  Rng rng = make_stream(seed, 0, 0x5eed);
  Eigen::VectorXd a(n);
  for (long k = 0; k < budget; ++k) {
    for (int i = 0; i < n; ++i) a[i] = uniform(rng, box.lo[i], box.hi[i]);
    consider(a);
  }

  NlsEstimate est;
  est.alpha = best;
  est.loss = best_loss;
  est.method = NlsMethod::Random;
  est.budget = budget;
  est.evaluations = evals;
  // Gap to the best evaluated candidate, which is the estimate itself; it
  // says nothing about unexplored parts of M, hence "statistical".
  est.eps_cert = 0.0;
  est.cert_kind = CertificateKind::Statistical;
  est.coverage = 1.0 / static_cast<double>(budget + 1);
  return est;
}

EpsCertificate certify_epsilon(const NlsEstimate& est, const MultiTrajectoryDataset& ds,
                               const CompactBox& box, double L) {
  if (!(L >= 0.0)) throw InvalidInput("certify_epsilon: L must be nonnegative");
  if (est.method != NlsMethod::Grid) return {est.eps_cert, CertificateKind::Statistical, true};
  check_box(ds, box);
  const double h = half_diagonal(box, est.segments);
  const double lh = L * h;
  const double loss = std::max(est.loss, 0.0);
  // The infimum over M is nonnegative, so the gap never exceeds the loss itself.
  return {std::min(loss, 2.0 * lh * std::sqrt(loss) + lh * lh), CertificateKind::Deterministic, false};
}

}  // namespace metalms
