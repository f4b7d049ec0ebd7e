// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and thresholds are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <vector>

#include "gda/experiment.hpp"
#include "gda/rng.hpp"
#include "gda/theory.hpp"
#include "gda/wasserstein.hpp"

using namespace gda;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentConfig gaussian_benchmark_config(Method method) {
  nlohmann::json j = {
      {"dataset", {{"kind", "gaussian_drift"}}},
      {"model",
       {{"loss", "logistic"}, {"regularization", {{"kind", "penalty"}, {"value", 0.02}}}}},
      {"method", to_string(method)},
      {"selftrain",
       {{"confidence_filter_frac", 0.1}, {"window", 500}, {"epochs", 100},
        {"optimizer", "sgd"}, {"batch_size", 0}, {"step_initial", 0.01},
        {"step_decay", "constant"}}},
      {"seeds", {4, 6, 8, 9, 10}}};
  return experiment_config_from_json(j);
}

struct Table1 {
  double source = 0, target = 0, all = 0, gradual = 0;
};

Table1 run_table1() {
  Table1 t;
  t.source = run_experiment(gaussian_benchmark_config(Method::SourceOnly)).mean;
  t.target = run_experiment(gaussian_benchmark_config(Method::TargetST)).mean;
  t.all = run_experiment(gaussian_benchmark_config(Method::AllST)).mean;
  t.gradual = run_experiment(gaussian_benchmark_config(Method::GradualST)).mean;
  return t;
}

void criterion_1_and_7(Table1& table) {
  auto start = std::chrono::steady_clock::now();
  table = run_table1();
  char buf[256];
  bool pass = table.gradual >= 0.97 && table.source >= 0.40 && table.source <= 0.55 &&
              table.target <= 0.60 && table.all >= 0.85 && table.all <= 0.96 &&
              table.gradual > table.all && table.all > table.target &&
              table.target >= table.source;
  std::snprintf(buf, sizeof(buf),
                "gradual %.3f >= .97, source %.3f in [.40,.55], target %.3f <= .60, "
                "all %.3f in [.85,.96], ordering, %.0fs",
                table.gradual, table.source, table.target, table.all,
                elapsed_since(start));
  report(1, "drifting-gaussian benchmark accuracies", pass, buf);
}

void criterion_2() {
  auto base = gaussian_benchmark_config(Method::GradualST);
  auto no_reg = run_ablation(base, Ablation::NoReg);
  auto soft = run_ablation(base, Ablation::SoftLabels);
  double gap_reg = no_reg.base.mean - no_reg.ablated.mean;
  double gap_soft = soft.base.mean - soft.ablated.mean;
  bool pass = gap_reg >= 0.05 && gap_soft >= 0.03;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "reg-hard %.3f vs no-reg %.3f (gap %.3f >= .05); hard %.3f vs soft %.3f "
                "(gap %.3f >= .03)",
                no_reg.base.mean, no_reg.ablated.mean, gap_reg, soft.base.mean,
                soft.ablated.mean, gap_soft);
  report(2, "regularization and label-sharpening ablations", pass, buf);
}

void criterion_3() {
  auto start = std::chrono::steady_clock::now();
  std::vector<VerificationResult> results;
  results.push_back(verify_baselines_fail(1.0));
  for (int T : {1, 2, 3}) results.push_back(verify_exponential_growth(0.2, T));
  results.push_back(verify_hinge_failure(0.3));
  {
    Vec w(2);
    w << 1, 0;
    std::vector<Vec> xs;
    Vec a(2), b(2), c(2);
    a << 2, 0;
    b << -3, 0;
    c << 1.5, 2.0;
    xs = {a, b, c};
    results.push_back(verify_no_regularization_fixed_point(make_model(w, 0.0), xs));
  }
  {
    Rng rng = make_rng(7, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DiscreteDistribution::Atom> atoms;
    for (int i = 0; i < 10; ++i) {
      Vec x(2);
      x << normal(rng), normal(rng);
      atoms.push_back({x, i % 2 ? 1 : -1, 0.1});
    }
    Vec w(2);
    w << 0.7, -0.3;
    results.push_back(verify_soft_label_fixed_point(make_model(w, 0.1),
                                                    DiscreteDistribution(atoms), 500, 7));
  }
  auto ce = gen_counterexample({CounterexampleSpec::Kind::NoShiftDoubling, 0.2, 1, 0.0, 0.06});
  for (int T : {1, 3, 5})
    results.push_back(verify_no_shift_linear_bound(0.2, T, ce.domains[0], &ce.theta0));
  results.push_back(verify_no_shift_doubling(0.2, 0.06));

  bool pass = true;
  std::string first_fail;
  for (const auto& r : results)
    if (!r.passed() && first_fail.empty()) {
      pass = false;
      first_fail = r.claim_id;
    }
  double secs = elapsed_since(start);
  if (secs >= 60.0) pass = false;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu checks, %s%s%.1fs < 60s", results.size(),
                first_fail.empty() ? "all pass" : ("first failure " + first_fail).c_str(),
                ", ", secs);
  report(3, "margin-theory suite", pass, buf);
}

void criterion_4() {
  auto bound = check_theorem_bound_random(100, 37);
  auto chain = verify_corollary_chain(3, 41);
  bool pass = bound.passed() && chain.passed();
  char buf[256];
  std::snprintf(buf, sizeof(buf), "bound %d/%d trials held, chain final %.4f <= %.4f",
                100 - bound.measured["violations"].get<int>(), 100,
                chain.measured["final_loss"].get<double>(),
                chain.measured["bound"].get<double>());
  report(4, "single-step bound and T=3 chaining", pass, buf);
}

void criterion_5() {
  auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(99);
  std::uniform_int_distribution<int> natoms(1, 6);
  std::uniform_int_distribution<int> coord(-4, 4);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto draw = [&]() {
      int n = natoms(rng);
      std::vector<int> units(static_cast<size_t>(n), 1);
      int rest = 12 - n;
      std::uniform_int_distribution<int> pick(0, n - 1);
      while (rest-- > 0) units[static_cast<size_t>(pick(rng))] += 1;
      std::vector<DiscreteDistribution::Atom> atoms;
      for (int i = 0; i < n; ++i) {
        Vec x(2);
        x << coord(rng), coord(rng);
        atoms.push_back({x, 1, units[static_cast<size_t>(i)] / 12.0});
      }
      return DiscreteDistribution(atoms);
    };
    auto p = draw();
    auto q = draw();
    if (std::abs(winf_discrete(p, q) - winf_bruteforce(p, q)) > 1e-9) ++mismatches;
  }
  auto ce = gen_counterexample({CounterexampleSpec::Kind::BaselinesFail});
  double rho = rho_conditional(ce.domains[0], ce.domains[1]);
  double secs = elapsed_since(start);
  bool pass = mismatches == 0 && std::abs(rho - 2.0 / 3.0) <= 1e-9 && secs < 30.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d/500 mismatches, rho %.10f, %.1fs < 30s", mismatches,
                rho, secs);
  report(5, "bottleneck-transport oracle equivalence", pass, buf);
}

void criterion_6() {
  auto start = std::chrono::steady_clock::now();
  std::vector<Vec> shifts;
  for (int t = 0; t < 5; ++t) {
    double angle = 2.0 * std::asin(0.5 / 4.0);
    Vec prev(2), next(2);
    prev << 2.0 * std::cos(angle * t), 2.0 * std::sin(angle * t);
    next << 2.0 * std::cos(angle * (t + 1)), 2.0 * std::sin(angle * (t + 1));
    shifts.push_back(next - prev);
  }
  auto recovery = verify_gaussian_recovery(2, 2.0, shifts, 0.4, 200000, 61);
  auto lipschitz = verify_wstar_lipschitz(1000, 1.0, 59);
  double secs = elapsed_since(start);
  bool pass = recovery.passed() && lipschitz.passed() && secs < 120.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "final deviation %.4f <= 0.05, lipschitz %s, %.1fs < 120s",
                recovery.measured["final_deviation"].get<double>(),
                lipschitz.passed() ? "ok" : "violated", secs);
  report(6, "gaussian-setting recovery", pass, buf);
}

void criterion_7(const Table1& drift) {
  nlohmann::json j = {
      {"dataset",
       {{"kind", "mixing"}, {"n_domains", 10}, {"n_per_domain", 500}}},
      {"model",
       {{"loss", "logistic"}, {"regularization", {{"kind", "penalty"}, {"value", 0.02}}}}},
      {"method", "gradual_st"},
      {"selftrain",
       {{"confidence_filter_frac", 0.1}, {"window", 500}, {"epochs", 100},
        {"optimizer", "sgd"}, {"batch_size", 0}, {"step_initial", 0.01},
        {"step_decay", "constant"}}},
      {"seeds", {4, 6, 8, 9, 10}}};
  auto gradual_cfg = experiment_config_from_json(j);
  auto target_cfg = gradual_cfg;
  target_cfg.method = Method::TargetST;
  double mix_gradual = run_experiment(gradual_cfg).mean;
  double mix_target = run_experiment(target_cfg).mean;
  double mixing_gap = mix_gradual - mix_target;
  double drift_gap = drift.gradual - drift.target;
  bool pass = mixing_gap <= 0.03 && drift_gap >= 0.20;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "mixing gap %.3f <= .03 (gradual %.3f vs target %.3f); drift gap %.3f >= .20",
                mixing_gap, mix_gradual, mix_target, drift_gap);
  report(7, "gradual structure helps only under small per-point transport", pass, buf);
}

void criterion_8() {
  nlohmann::json j = {
      {"dataset",
       {{"kind", "rotation"}, {"n_points", 40}, {"n_domains", 12},
        {"total_angle_deg", 60.0}, {"radius_lo", 4.0}, {"radius_hi", 4.4}}},
      {"model",
       {{"loss", "ramp"}, {"regularization", {{"kind", "constraint"}, {"value", 1.0}}}}},
      {"method", "gradual_st"},
      {"selftrain", {{"engine", "exact"}, {"grid_resolution", 720}}},
      {"seeds", {1}}};
  auto gradual_cfg = experiment_config_from_json(j);
  auto target_cfg = gradual_cfg;
  target_cfg.method = Method::TargetST;
  double gradual_err = 1.0 - run_experiment(gradual_cfg).mean;
  double target_err = 1.0 - run_experiment(target_cfg).mean;
  bool pass = gradual_err == 0.0 && target_err >= 0.4;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "gradual error %.3f == 0, direct-target error %.3f >= 0.4",
                gradual_err, target_err);
  report(8, "rotation mechanism stand-in (image benchmarks out of scope)", pass, buf);
}

}  // namespace

int main() {
  Table1 table;
  criterion_1_and_7(table);
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(table);
  criterion_8();
  if (failures == 0)
    std::printf("acceptance: all 8 criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
