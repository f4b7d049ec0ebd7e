#include "gda/shiftgen.hpp"

#include <cmath>

#include "doctest.h"
#include "gda/wasserstein.hpp"

using namespace gda;

TEST_CASE("gaussian drift: shapes, determinism, prior") {
  GaussianDriftSpec spec;
  spec.d = 3;
  spec.n_labeled = 40;
  spec.n_unlabeled_total = 60;
  spec.n_target_eval = 30;
  spec.seed = 5;
  auto seq = gen_gaussian_drift(spec);
  CHECK(seq.source_labeled.size() == 40);
  REQUIRE(seq.intermediate_unlabeled.size() == 1);
  CHECK(seq.intermediate_unlabeled[0].size() == 60);
  CHECK(seq.target_unlabeled.size() == 60);
  CHECK(seq.target_eval.size() == 30);
  CHECK(seq.meta.flat_pool);
  for (const auto& p : seq.source_labeled) CHECK((p.y == 1 || p.y == -1));

  auto again = gen_gaussian_drift(spec);
  for (size_t i = 0; i < seq.intermediate_unlabeled[0].size(); ++i)
    CHECK(seq.intermediate_unlabeled[0][i] == again.intermediate_unlabeled[0][i]);
}

TEST_CASE("gaussian drift: degenerate variance follows the interpolated means") {
  GaussianDriftSpec spec;
  spec.d = 1;
  spec.n_labeled = 5;
  spec.n_unlabeled_total = 50;
  spec.n_target_eval = 5;
  spec.min_var = 1e-8;
  spec.max_var = 1e-8;
  spec.seed = 9;
  auto seq = gen_gaussian_drift(spec);
  auto [source, target] = drift_endpoints(spec);
  const int T = spec.n_unlabeled_total;
  for (int i = 1; i <= T; ++i) {
    double f = static_cast<double>(i) / T;
    const Vec& x = seq.intermediate_unlabeled[0][static_cast<size_t>(i - 1)];
    double mu_pos = (1 - f) * source.mu(1)[0] + f * target.mu(1)[0];
    double mu_neg = (1 - f) * source.mu(-1)[0] + f * target.mu(-1)[0];
    double dist = std::min(std::abs(x[0] - mu_pos), std::abs(x[0] - mu_neg));
    CHECK(dist <= 1e-3);
  }
}

TEST_CASE("drift endpoint covariances have spectra inside the declared band") {
  GaussianDriftSpec spec;
  spec.d = 8;
  spec.min_var = 0.05;
  spec.max_var = 0.1;
  spec.seed = 21;
  auto [source, target] = drift_endpoints(spec);
  for (const auto* domain : {&source, &target}) {
    for (int y : {1, -1}) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(domain->sigma(y));
      CHECK(eig.eigenvalues().minCoeff() >= spec.min_var - 1e-9);
      CHECK(eig.eigenvalues().maxCoeff() <= spec.max_var + 1e-9);
      CHECK((domain->sigma(y) - domain->sigma(y).transpose()).cwiseAbs().maxCoeff() <=
            1e-12);
    }
  }
}

TEST_CASE("mixing interpolation: layout and budget parity") {
  GaussianDriftSpec spec;
  spec.d = 2;
  spec.seed = 3;
  auto [source, target] = drift_endpoints(spec);
  auto seq = gen_mixing_interpolation(source, target, 5, 20, 30, 25, 11);
  CHECK(seq.source_labeled.size() == 30);
  CHECK(seq.intermediate_unlabeled.size() == 5);
  for (const auto& dom : seq.intermediate_unlabeled) CHECK(dom.size() == 20);
  CHECK(seq.target_unlabeled.size() == 100);  // matches the intermediate total
  CHECK(seq.target_eval.size() == 25);
  CHECK_FALSE(seq.meta.flat_pool);

  auto again = gen_mixing_interpolation(source, target, 5, 20, 30, 25, 11);
  for (size_t d = 0; d < seq.intermediate_unlabeled.size(); ++d)
    for (size_t i = 0; i < seq.intermediate_unlabeled[d].size(); ++i)
      CHECK(seq.intermediate_unlabeled[d][i] == again.intermediate_unlabeled[d][i]);
}

TEST_CASE("rotation drift: zero angle keeps every domain identical") {
  auto seq = gen_rotation_drift(8, 4, 0.0, {1.0, 1.0}, 1);
  for (const auto& dom : seq.intermediate_unlabeled) {
    REQUIRE(dom.size() == seq.source_labeled.size());
    for (size_t i = 0; i < dom.size(); ++i)
      CHECK((dom[i] - seq.source_labeled[i].x).norm() <= 1e-12);
  }
}

TEST_CASE("rotation drift: per-step W-infinity equals the chord on a circle") {
  // 8 points on the unit circle, 12 steps of 1 degree each: within-cluster
  // spacing (4 degrees) exceeds twice the step, so the identity coupling is
  // bottleneck-optimal and the distance is exactly the chord.
  const int n_domains = 12;
  auto seq = gen_rotation_drift(8, n_domains, 12.0, {1.0, 1.0}, 1);
  const double step_rad = (12.0 / n_domains) * M_PI / 180.0;
  const double chord = 2.0 * 1.0 * std::sin(step_rad / 2.0);
  for (int t = 0; t + 1 < n_domains; ++t) {
    std::vector<LabeledPoint> a, b;
    for (const auto& x : seq.intermediate_unlabeled[static_cast<size_t>(t)])
      a.push_back({x, 1});
    for (const auto& x : seq.intermediate_unlabeled[static_cast<size_t>(t + 1)])
      b.push_back({x, 1});
    double w = winf_discrete(empirical_distribution(a), empirical_distribution(b));
    CHECK(std::abs(w - chord) <= 1e-9);
  }
}

TEST_CASE("rotation drift: class mass is exactly balanced") {
  auto seq = gen_rotation_drift(20, 3, 30.0, {2.0, 3.0}, 4);
  int pos = 0, neg = 0;
  for (const auto& p : seq.source_labeled) (p.y > 0 ? pos : neg)++;
  CHECK(pos == neg);
  CHECK(seq.target_eval.size() == seq.source_labeled.size());
}

TEST_CASE("counterexample: baselines-fail bundle") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::BaselinesFail});
  REQUIRE(ce.domains.size() == 3);
  CHECK(rho_conditional(ce.domains[0], ce.domains[1]) == doctest::Approx(2.0 / 3.0));
  CHECK(rho_conditional(ce.domains[1], ce.domains[2]) == doctest::Approx(2.0 / 3.0));
  CHECK(population_loss(MarginLossKind::Ramp, ce.theta0, ce.domains[0]) == 0.0);
}

TEST_CASE("counterexample: exponential weight schedule") {
  CounterexampleSpec spec;
  spec.kind = CounterexampleSpec::Kind::Exponential;
  spec.alpha0 = 0.2;
  spec.T = 2;
  auto ce = gen_counterexample(spec);
  CHECK(ce.expected["S"] == 1);  // (2^0+1/2)*0.2 < 1/2 but (2^1+1/2)*0.2 = 1/2
  CHECK(ce.expected["delta"] == doctest::Approx(0.1));
  CHECK(ce.domains.size() == 5);  // P_0..P_4
  for (const auto& d : ce.domains) {
    CHECK(d.class_mass(1) == doctest::Approx(0.5));
    CHECK(d.class_mass(-1) == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(
      gen_counterexample({CounterexampleSpec::Kind::Exponential, 0.3, 1, 0.0, 0.0}),
      std::invalid_argument);
}

TEST_CASE("counterexample: hinge family geometry") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::HingeBad, 0.0, 1, 0.3, 0.0});
  CHECK(ce.expected["alpha0"] == doctest::Approx(0.2));
  REQUIRE(ce.domains.size() == 3);
  CHECK(rho_conditional(ce.domains[0], ce.domains[1]) <= 2.0 / 3.0 + 1e-9);
  CHECK(rho_conditional(ce.domains[1], ce.domains[2]) <= 2.0 / 3.0 + 1e-9);
}

TEST_CASE("counterexample: no-shift doubling masses are a valid distribution") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::NoShiftDoubling, 0.2, 1, 0.0, 0.06});
  double total = 0.0;
  for (const auto& a : ce.domains[0].atoms()) {
    CHECK(a.mass > 0.0);
    total += a.mass;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(
      gen_counterexample({CounterexampleSpec::Kind::NoShiftDoubling, 0.2, 1, 0.0, 0.3}),
      std::invalid_argument);
}
