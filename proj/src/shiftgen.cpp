#include "gda/shiftgen.hpp"

#include <cmath>
#include <numeric>

#include "gda/rng.hpp"

namespace gda {

namespace {

// Haar-distributed rotation via QR of a Gaussian matrix with the R-diagonal
// sign correction.
Mat haar_rotation(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

Mat random_covariance(int d, double min_var, double max_var, Rng& rng) {
  std::uniform_real_distribution<double> unif(min_var, max_var);
  Vec diag(d);
  for (int i = 0; i < d; ++i) diag[i] = unif(rng);
  Mat u = haar_rotation(d, rng);
  Mat sigma = u * diag.asDiagonal() * u.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

struct DriftEndpoints {
  Vec mu0_pos, mu0_neg, muT_pos, muT_neg;
  Mat sig0_pos, sig0_neg, sigT_pos, sigT_neg;
};

DriftEndpoints draw_endpoints(const GaussianDriftSpec& spec) {
  if (!(spec.min_var > 0.0) || spec.min_var > spec.max_var || spec.d < 1)
    throw std::invalid_argument("gen_gaussian_drift: invalid spec");
  Rng rng = make_rng(spec.seed, 0x44524654);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_mean = [&]() {
    Vec mu(spec.d);
    for (int i = 0; i < spec.d; ++i) mu[i] = normal(rng);
    return mu;
  };
  DriftEndpoints e;
  e.mu0_neg = draw_mean();
  e.mu0_pos = draw_mean();
  e.muT_neg = draw_mean();
  e.muT_pos = draw_mean();
  e.sig0_neg = random_covariance(spec.d, spec.min_var, spec.max_var, rng);
  e.sig0_pos = random_covariance(spec.d, spec.min_var, spec.max_var, rng);
  e.sigT_neg = random_covariance(spec.d, spec.min_var, spec.max_var, rng);
  e.sigT_pos = random_covariance(spec.d, spec.min_var, spec.max_var, rng);
  return e;
}

nlohmann::json drift_spec_json(const GaussianDriftSpec& spec) {
  return {{"d", spec.d},
          {"n_labeled", spec.n_labeled},
          {"n_unlabeled_total", spec.n_unlabeled_total},
          {"min_var", spec.min_var},
          {"max_var", spec.max_var},
          {"n_target_eval", spec.n_target_eval},
          {"seed", spec.seed}};
}

}  // namespace

std::pair<GaussianMixtureDomain, GaussianMixtureDomain> drift_endpoints(
    const GaussianDriftSpec& spec) {
  DriftEndpoints e = draw_endpoints(spec);
  GaussianMixtureDomain source(e.mu0_pos, e.mu0_neg, e.sig0_pos, e.sig0_neg, 0.5, true);
  GaussianMixtureDomain target(e.muT_pos, e.muT_neg, e.sigT_pos, e.sigT_neg, 0.5, true);
  return {std::move(source), std::move(target)};
}

DomainSequence gen_gaussian_drift(const GaussianDriftSpec& spec) {
  if (spec.n_labeled < 1 || spec.n_unlabeled_total < 1 || spec.n_target_eval < 1)
    throw std::invalid_argument("gen_gaussian_drift: counts must be >= 1");
  DriftEndpoints e = draw_endpoints(spec);
  GaussianMixtureDomain source(e.mu0_pos, e.mu0_neg, e.sig0_pos, e.sig0_neg, 0.5, true);
  GaussianMixtureDomain target(e.muT_pos, e.muT_neg, e.sigT_pos, e.sigT_neg, 0.5, true);

  DomainSequence seq;
  seq.source_labeled = sample_domain(source, spec.n_labeled, mix_seed(spec.seed, 1));

  // One point per step: the i-th point is drawn at interpolation fraction i/T.
  const int T = spec.n_unlabeled_total;
  Rng rng = make_rng(spec.seed, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> pool;
  pool.reserve(static_cast<size_t>(T));
  for (int i = 1; i <= T; ++i) {
    double f = static_cast<double>(i) / T;
    int y = unif(rng) < 0.5 ? 1 : -1;
    Vec mu = y > 0 ? Vec((1 - f) * e.mu0_pos + f * e.muT_pos)
                   : Vec((1 - f) * e.mu0_neg + f * e.muT_neg);
    Mat sigma = y > 0 ? Mat((1 - f) * e.sig0_pos + f * e.sigT_pos)
                      : Mat((1 - f) * e.sig0_neg + f * e.sigT_neg);
    Eigen::LLT<Mat> llt(sigma);
    Vec z(spec.d);
    for (int k = 0; k < spec.d; ++k) z[k] = normal(rng);
    pool.push_back(mu + llt.matrixL() * z);
  }
  seq.intermediate_unlabeled.push_back(std::move(pool));
  seq.target_unlabeled = sample_domain_unlabeled(target, T, mix_seed(spec.seed, 3));
  seq.target_eval = sample_domain(target, spec.n_target_eval, mix_seed(spec.seed, 4));
  seq.meta = {"gaussian_drift", drift_spec_json(spec), spec.seed, /*flat_pool=*/true};
  return seq;
}

DomainSequence gen_mixing_interpolation(const GaussianMixtureDomain& source_domain,
                                        const GaussianMixtureDomain& target_domain,
                                        int n_domains, int n_per_domain,
                                        int n_source_labeled, int n_target_eval,
                                        std::uint64_t seed) {
  if (n_domains < 1 || n_per_domain < 1)
    throw std::invalid_argument("gen_mixing_interpolation: counts must be >= 1");
  DomainSequence seq;
  seq.source_labeled = sample_domain(source_domain, n_source_labeled, mix_seed(seed, 1));
  const int K = n_domains;
  for (int i = 1; i <= K; ++i) {
    // Domain i: each point follows the target law with probability i/K and the
    // source law otherwise; per-point laws are endpoints, never interpolated.
    Rng rng = make_rng(seed, 16 + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec> domain;
    domain.reserve(static_cast<size_t>(n_per_domain));
    double target_weight = static_cast<double>(i) / K;
    for (int k = 0; k < n_per_domain; ++k) {
      const auto& law = unif(rng) < target_weight ? target_domain : source_domain;
      auto pt = sample_domain(law, 1, mix_seed(seed, (static_cast<std::uint64_t>(i) << 32) |
                                                         static_cast<std::uint64_t>(k)));
      domain.push_back(std::move(pt.front().x));
    }
    seq.intermediate_unlabeled.push_back(std::move(domain));
  }
  seq.target_unlabeled =
      sample_domain_unlabeled(target_domain, K * n_per_domain, mix_seed(seed, 2));
  seq.target_eval = sample_domain(target_domain, n_target_eval, mix_seed(seed, 3));
  seq.meta = {"mixing_interpolation",
              {{"n_domains", n_domains},
               {"n_per_domain", n_per_domain},
               {"n_source_labeled", n_source_labeled},
               {"n_target_eval", n_target_eval},
               {"seed", seed}},
              seed,
              /*flat_pool=*/false};
  return seq;
}

namespace {

// Base cloud for the rotation stream. Each class splits into a minor cluster
// (30%, centered 20 degrees off the class axis end) and a major cluster (70%,
// centered 160 degrees), mirrored antipodally for the negative class. Angles
// are evenly spaced inside +-4 degrees of the cluster center; radii are evenly
// spaced across the band.
std::vector<LabeledPoint> rotation_base_cloud(int n_points, Interval radius_band) {
  if (n_points < 2 || n_points % 2 != 0)
    throw std::invalid_argument("gen_rotation_drift: n_points must be even and >= 2");
  if (!(radius_band.lo > 0.0) || radius_band.lo > radius_band.hi)
    throw std::invalid_argument("gen_rotation_drift: invalid radius band");
  const int per_class = n_points / 2;
  int n_minor = std::max(1, static_cast<int>(std::lround(0.3 * per_class)));
  if (n_minor >= per_class) n_minor = per_class - 1;
  const int n_major = per_class - n_minor;

  auto cluster_angles = [](double center_deg, int count) {
    std::vector<double> out;
    const double spread = 4.0;
    for (int i = 0; i < count; ++i) {
      double frac = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
      out.push_back((center_deg - spread + 2.0 * spread * frac) * M_PI / 180.0);
    }
    return out;
  };

  std::vector<LabeledPoint> cloud;
  int idx = 0;
  auto add_class = [&](int label, double offset_deg) {
    auto minor = cluster_angles(20.0 + offset_deg, n_minor);
    auto major = cluster_angles(160.0 + offset_deg, n_major);
    std::vector<double> angles = minor;
    angles.insert(angles.end(), major.begin(), major.end());
    for (double angle : angles) {
      double frac = per_class == 1 ? 0.5 : static_cast<double>(idx % per_class) / (per_class - 1);
      double r = radius_band.lo + (radius_band.hi - radius_band.lo) * frac;
      Vec x(2);
      x << r * std::cos(angle), r * std::sin(angle);
      cloud.push_back({x, label});
      ++idx;
    }
  };
  add_class(1, 0.0);
  add_class(-1, 180.0);
  return cloud;
}

std::vector<LabeledPoint> rotate_cloud(const std::vector<LabeledPoint>& cloud,
                                       double angle_rad) {
  Mat rot(2, 2);
  rot << std::cos(angle_rad), -std::sin(angle_rad), std::sin(angle_rad),
      std::cos(angle_rad);
  std::vector<LabeledPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back({rot * p.x, p.y});
  return out;
}

}  // namespace

DomainSequence gen_rotation_drift(int n_points, int n_domains, double total_angle_deg,
                                  Interval radius_band, std::uint64_t seed) {
  if (total_angle_deg < 0.0 || total_angle_deg >= 180.0)
    throw std::invalid_argument("gen_rotation_drift: total angle must be in [0, 180)");
  if (n_domains < 1) throw std::invalid_argument("gen_rotation_drift: n_domains < 1");
  auto base = rotation_base_cloud(n_points, radius_band);
  const double step_rad = total_angle_deg / n_domains * M_PI / 180.0;

  DomainSequence seq;
  seq.source_labeled = base;
  for (int t = 1; t <= n_domains; ++t) {
    auto rotated = rotate_cloud(base, step_rad * t);
    std::vector<Vec> xs;
    xs.reserve(rotated.size());
    for (auto& p : rotated) xs.push_back(std::move(p.x));
    seq.intermediate_unlabeled.push_back(std::move(xs));
  }
  auto final_cloud = rotate_cloud(base, step_rad * n_domains);
  seq.target_eval = final_cloud;
  seq.target_unlabeled.reserve(final_cloud.size());
  for (const auto& p : final_cloud) seq.target_unlabeled.push_back(p.x);
  seq.meta = {"rotation_drift",
              {{"n_points", n_points},
               {"n_domains", n_domains},
               {"total_angle_deg", total_angle_deg},
               {"radius_lo", radius_band.lo},
               {"radius_hi", radius_band.hi},
               {"seed", seed}},
              seed,
              /*flat_pool=*/false};
  return seq;
}

namespace {

DiscreteDistribution from_1d(const std::vector<std::pair<double, int>>& support,
                             const std::vector<double>& masses) {
  std::vector<DiscreteDistribution::Atom> atoms;
  for (size_t i = 0; i < support.size(); ++i) {
    if (masses[i] <= 0.0) continue;
    Vec x(1);
    x << support[i].first;
    atoms.push_back({x, support[i].second, masses[i]});
  }
  return DiscreteDistribution(std::move(atoms));
}

Counterexample build_baselines_fail() {
  auto dist2 = [](double x0, double y0, double x1, double y1) {
    Vec a(2), b(2);
    a << x0, y0;
    b << x1, y1;
    return DiscreteDistribution({{a, 1, 0.5}, {b, -1, 0.5}});
  };
  Counterexample ce;
  ce.domains = {dist2(1, 1, -1, -1), dist2(1, 1.0 / 3.0, -1, -1.0 / 3.0),
                dist2(1, -1.0 / 3.0, -1, 1.0 / 3.0)};
  Vec w(2);
  w << 0, 1;
  ce.theta0 = make_model(w, 0.0, 1.0);
  ce.R = 1.0;
  ce.expected = {{"loss_source", 0.0},
                 {"loss_target", 1.0},
                 {"loss_after_target_st", 1.0},
                 {"rho_consecutive", 2.0 / 3.0},
                 {"zero_loss_witness_w", {1.0, 0.0}},
                 {"zero_loss_witness_b", 0.0}};
  return ce;
}

Counterexample build_exponential(double alpha0, int T) {
  if (!(alpha0 > 0.0 && alpha0 <= 0.25))
    throw std::invalid_argument("gen_counterexample: Exponential requires 0 < alpha0 <= 1/4");
  if (T < 1) throw std::invalid_argument("gen_counterexample: Exponential requires T >= 1");
  // S = max integer with (2^{S-1} + 1/2) alpha0 < 1/2.
  int S = 1;
  while ((std::pow(2.0, S) + 0.5) * alpha0 < 0.5) ++S;
  const double delta = 1.0 / (10.0 * S);
  std::vector<double> weights(static_cast<size_t>(S) + 1);
  for (int i = 0; i < S; ++i) weights[static_cast<size_t>(i)] = 0.5 * std::pow(2.0, i) * alpha0;
  weights[static_cast<size_t>(S)] = 0.5 - (std::pow(2.0, S - 1) + 0.5) * alpha0;

  auto prefix = [&](int t) {
    double sum = 0.0;
    for (int i = 0; i < t; ++i) sum += weights[static_cast<size_t>(i)];
    return sum;
  };

  auto even_dist = [&](int t) {
    std::vector<std::pair<double, int>> support{{-10.0, -1}, {-0.1, 1}};
    std::vector<double> masses{0.5, alpha0 + prefix(t)};
    for (int i = t; i <= S; ++i) {
      support.push_back({1.0 + i * delta, 1});
      masses.push_back(weights[static_cast<size_t>(i)]);
    }
    return from_1d(support, masses);
  };
  auto odd_dist = [&](int t) {
    std::vector<std::pair<double, int>> support{{-10.0, -1}, {-0.1, 1}, {0.5, 1}};
    std::vector<double> masses{0.5, alpha0 + prefix(t), weights[static_cast<size_t>(t)]};
    for (int i = t + 1; i <= S; ++i) {
      support.push_back({1.0 + i * delta, 1});
      masses.push_back(weights[static_cast<size_t>(i)]);
    }
    return from_1d(support, masses);
  };

  Counterexample ce;
  const int horizon = 2 * T;
  for (int idx = 0; idx <= horizon; ++idx) {
    int capped = std::min(idx, 2 * S + 2);
    if (capped % 2 == 0)
      ce.domains.push_back(even_dist(capped / 2));
    else
      ce.domains.push_back(odd_dist((capped - 1) / 2));
  }
  Vec w(1);
  w << 1;
  ce.theta0 = make_model(w, 0.0, 1.0);
  ce.R = 1.0;
  ce.expected = {{"S", S},
                 {"delta", delta},
                 {"loss_bound", std::min(0.5, 0.5 * std::pow(2.0, T) * alpha0)},
                 {"winf_consecutive_max", 0.6},
                 {"alpha_star_witness_w", {1.0}},
                 {"alpha_star_witness_b", 5.0},
                 {"initial_loss_bound", alpha0}};
  return ce;
}

Counterexample build_hinge_bad(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gen_counterexample: HingeBad requires alpha > 0");
  const double alpha0 = std::min(0.5, 2.0 * alpha / 3.0);
  auto q_delta = [&](double delta) {
    Vec p1(2), p2(2), p3(2), p4(2);
    p1 << delta, 1.0;
    p2 << -0.5, (1.0 - alpha0) / alpha0;
    p3 << -delta, -1.0;
    p4 << 0.5, -(1.0 - alpha0) / alpha0;
    return DiscreteDistribution({{p1, 1, (1.0 - alpha0) / 2.0},
                                 {p2, 1, alpha0 / 2.0},
                                 {p3, -1, (1.0 - alpha0) / 2.0},
                                 {p4, -1, alpha0 / 2.0}});
  };
  Counterexample ce;
  ce.domains = {q_delta(1.0), q_delta(1.0 / 3.0), q_delta(-1.0 / 3.0)};
  Vec w(2);
  w << 1, 0;
  ce.theta0 = make_model(w, 0.0, 1.0);
  ce.R = 1.0;
  ce.expected = {{"alpha0", alpha0},
                 {"initial_hinge_loss", 1.5 * alpha0},
                 {"final_error", 1.0},
                 {"rho_consecutive_max", 2.0 / 3.0},
                 {"zero_loss_witness_w", {0.0, 1.0}},
                 {"zero_loss_witness_b", 0.0}};
  return ce;
}

Counterexample build_no_shift_doubling(double alpha0, double eps) {
  if (!(eps > 0.0 && eps < alpha0 && alpha0 < 0.25))
    throw std::invalid_argument(
        "gen_counterexample: NoShiftDoubling requires 0 < eps < alpha0 < 0.25");
  const double delta = eps / 3.0;
  const double a = alpha0 / (1.0 + delta);
  auto dist = from_1d({{-10.0, -1}, {0.0, 1}, {1.0, 1}, {10.0, 1}},
                      {0.5, a, a - delta, 0.5 - 2.0 * a + delta});
  Counterexample ce;
  ce.domains = {dist};
  Vec w(1);
  w << 1;
  ce.theta0 = make_model(w, -delta, 1.0);
  ce.R = 1.0;
  ce.expected = {{"delta", delta},
                 {"a", a},
                 {"initial_loss", alpha0 - delta * delta},
                 {"final_loss", 2.0 * a - delta},
                 {"final_loss_lower", 2.0 * alpha0 - eps}};
  return ce;
}

}  // namespace

Counterexample gen_counterexample(const CounterexampleSpec& spec) {
  switch (spec.kind) {
    case CounterexampleSpec::Kind::BaselinesFail: return build_baselines_fail();
    case CounterexampleSpec::Kind::Exponential: return build_exponential(spec.alpha0, spec.T);
    case CounterexampleSpec::Kind::HingeBad: return build_hinge_bad(spec.alpha);
    case CounterexampleSpec::Kind::NoShiftDoubling:
      return build_no_shift_doubling(spec.alpha0, spec.eps);
  }
  throw std::invalid_argument("gen_counterexample: unknown kind");
}

}  // namespace gda
