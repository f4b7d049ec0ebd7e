#include "gda/theory.hpp"

#include <cmath>

#include "doctest.h"
#include "gda/rng.hpp"
#include "gda/selftrain.hpp"
#include "gda/shiftgen.hpp"
#include "gda/wasserstein.hpp"

using namespace gda;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("baselines-fail verification") {
  auto r = verify_baselines_fail(1.0);
  CHECK(r.passed());
  CHECK(r.measured["loss_source"] == doctest::Approx(0.0));
  CHECK(r.measured["loss_target"] == doctest::Approx(1.0));
  CHECK(r.measured["loss_after_target_st"] == doctest::Approx(1.0));
  CHECK(r.measured["witness_worst_loss"] == doctest::Approx(0.0));

  // Assumption violations surface as Inconclusive, not Fail: a loose budget
  // breaks the shift gate (rho = 2/3 >= 1/R at R = 2), and a tight one leaves
  // the construction's model outside Theta_R.
  CHECK(verify_baselines_fail(2.0).verdict == Verdict::Inconclusive);
  CHECK(verify_baselines_fail(0.5).verdict == Verdict::Inconclusive);
}

TEST_CASE("perturbing the source model keeps zero loss through margin slack") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::BaselinesFail});
  Vec w = v2(0.01, 1.0);
  w /= w.norm();
  auto perturbed = make_model(w, 0.0, 1.0);
  CHECK(population_loss(MarginLossKind::Ramp, perturbed, ce.domains[0]) == 0.0);
}

TEST_CASE("exponential growth verification") {
  auto r1 = verify_exponential_growth(0.2, 1);
  CHECK(r1.passed());
  auto r2 = verify_exponential_growth(0.2, 2);
  CHECK(r2.passed());
  CHECK(r2.measured["final_loss"].get<double>() >= 0.4 - 1e-9);
  auto capped = verify_exponential_growth(0.25, 10);
  CHECK(capped.passed());
  CHECK(capped.measured["final_loss"].get<double>() >= 0.5 - 1e-9);
  CHECK_THROWS_AS(verify_exponential_growth(0.3, 1), std::invalid_argument);
}

TEST_CASE("no-regularization fixed point") {
  auto theta = make_model(v2(1, 0), 0.0);
  std::vector<Vec> xs{v2(2, 0), v2(-3, 0)};
  auto r = verify_no_regularization_fixed_point(theta, xs);
  CHECK(r.passed());
  CHECK(r.parameters["alpha"] == doctest::Approx(0.5));

  std::vector<Vec> unit{v2(1, 0), v2(-1, 0)};
  auto r2 = verify_no_regularization_fixed_point(theta, unit);
  CHECK(r2.parameters["alpha"] == doctest::Approx(1.0));
  CHECK(r2.passed());

  std::vector<Vec> boundary{v2(0, 1)};
  CHECK_THROWS_AS(verify_no_regularization_fixed_point(theta, boundary),
                  std::invalid_argument);
}

TEST_CASE("soft-label fixed point") {
  Rng rng = make_rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DiscreteDistribution::Atom> atoms;
  for (int i = 0; i < 10; ++i)
    atoms.push_back({v2(normal(rng), normal(rng)), i % 2 ? 1 : -1, 0.1});
  DiscreteDistribution dist(atoms);
  auto theta = make_model(v2(0.4, -1.2), 0.3);
  auto r = verify_soft_label_fixed_point(theta, dist, 500, 17);
  CHECK(r.passed());
  CHECK(r.measured["gradient_norm"].get<double>() <= 1e-6);

  auto zero = make_model(v2(0, 0), 0.0);
  CHECK(verify_soft_label_fixed_point(zero, dist, 100, 18).passed());
  CHECK_THROWS_AS(verify_soft_label_fixed_point(zero, dist, 10, 1), std::invalid_argument);
}

TEST_CASE("hinge failure verification") {
  auto r = verify_hinge_failure(0.3);
  CHECK(r.passed());
  CHECK(r.claimed["alpha0"] == doctest::Approx(0.2));
  CHECK(r.measured["final_error"] == doctest::Approx(1.0));
  CHECK(r.measured["rho_max"].get<double>() <= 2.0 / 3.0 + 1e-9);

  auto capped = verify_hinge_failure(3.0);
  CHECK(capped.passed());
  CHECK(capped.claimed["alpha0"] == doctest::Approx(0.5));
}

TEST_CASE("no-shift linear bound and doubling") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::NoShiftDoubling, 0.2, 1, 0.0, 0.06});
  for (int T : {0, 1, 3, 5}) {
    auto r = verify_no_shift_linear_bound(0.2, T, ce.domains[0], &ce.theta0);
    CHECK(r.passed());
  }
  auto doubling = verify_no_shift_doubling(0.2, 0.06);
  CHECK(doubling.passed());
  CHECK(doubling.measured["final_loss"].get<double>() >= 2 * 0.2 - 0.06 - 1e-9);

  // Separable data: a zero-loss model exists, so the loss stays at zero.
  auto separable = DiscreteDistribution({{v2(2, 0), 1, 0.5}, {v2(-2, 0), -1, 0.5}});
  auto r0 = verify_no_shift_linear_bound(0.0, 3, separable);
  CHECK(r0.passed());
  CHECK(r0.measured["final_loss"].get<double>() <= 1e-9);
}

TEST_CASE("theorem bound on the fixed construction") {
  auto ce = gen_counterexample({CounterexampleSpec::Kind::BaselinesFail});
  BoundCheckInstance inst;
  inst.P = ce.domains[0];
  inst.Q = ce.domains[1];
  inst.theta = ce.theta0;
  inst.R = 1.0;
  inst.rho = rho_conditional(inst.P, inst.Q);
  inst.B = std::sqrt(std::max(second_moment_bound(inst.P), second_moment_bound(inst.Q)));
  inst.n = 1000;
  inst.delta = 0.1;
  auto r = check_theorem_bound(inst, 5, 3);
  CHECK(r.passed());
  CHECK(r.measured["violations"] == 0);

  BoundCheckInstance bad = inst;
  bad.rho = 1.5;  // violates rho < 1/R
  CHECK_THROWS_AS(check_theorem_bound(bad, 1, 1), std::invalid_argument);
}

TEST_CASE("randomized bound, corollary chain and lemma batteries") {
  CHECK(check_theorem_bound_random(20, 5).passed());
  CHECK(verify_corollary_chain(3, 7).passed());
  CHECK(check_error_from_margin(50, 9).passed());
  CHECK(check_margin_from_error(50, 11).passed());
  CHECK(check_selftrain_lemmas(15, 13).passed());
}

TEST_CASE("w* lipschitz battery") {
  auto r = verify_wstar_lipschitz(1000, 1.0, 59);
  CHECK(r.passed());
  CHECK(r.measured["worst_ratio"].get<double>() <= 1.0 + 1e-12);
}

TEST_CASE("gaussian recovery: zero shifts still re-centers the classifier") {
  auto r = verify_gaussian_recovery(2, 2.0, {}, 0.4, 50000, 23);
  CHECK(r.passed());
  CHECK(r.measured["final_deviation"].get<double>() <= 0.05);

  Vec big = v2(3.0, 0.0);
  CHECK_THROWS_AS(verify_gaussian_recovery(2, 2.0, {big}, 0.4, 2000, 1),
                  std::invalid_argument);
}

TEST_CASE("harness sensitivity: a sabotaged tolerance fails only its own check") {
  auto healthy = verify_wstar_lipschitz(100, 1.0, 3);
  auto sabotaged = verify_gaussian_recovery(2, 2.0, {}, 0.4, 2000, 29, /*tol=*/1e-12);
  CHECK(healthy.passed());
  CHECK(sabotaged.verdict == Verdict::Fail);
}

TEST_CASE("suite wiring: margin excludes gaussian checks and ids are ordered") {
  auto margin = run_suite(SuiteKind::Margin);
  for (const auto& r : margin) CHECK(r.claim_id.rfind("margin.", 0) == 0);
  auto gaussian = run_suite(SuiteKind::Gaussian);
  CHECK(gaussian.size() == 2);
  for (size_t i = 0; i + 1 < margin.size(); ++i)
    CHECK(margin[i].claim_id <= margin[i + 1].claim_id);
}
