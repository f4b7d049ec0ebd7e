#include "gda/selftrain.hpp"

#include <cmath>

#include "doctest.h"
#include "gda/rng.hpp"

using namespace gda;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SelfTrainConfig exact_ramp_cfg(double R) {
  SelfTrainConfig cfg;
  cfg.loss = MarginLossKind::Ramp;
  cfg.reg = {Regularization::Kind::ConstraintR, R};
  cfg.engine = SolverEngine::ExactGrid;
  cfg.solver.grid_resolution = 801;
  return cfg;
}

}  // namespace

TEST_CASE("pseudolabel basics") {
  auto theta0 = make_model(v2(0, 1), 0.0, 1.0);
  std::vector<Vec> xs{v2(1, -1.0 / 3), v2(-1, 1.0 / 3)};
  auto labeled = pseudolabel(theta0, xs);
  CHECK(labeled[0].label == -1);  // true label +1: wrong
  CHECK(labeled[1].label == 1);   // true label -1: wrong
  CHECK(labeled[0].confidence == doctest::Approx(1.0 / 3.0));

  auto boundary = pseudolabel(theta0, {v2(5, 0)});
  CHECK(boundary[0].label == 1);
  CHECK(boundary[0].confidence == 0.0);

  LinearModel scaled{theta0.w * 7.0, theta0.b * 7.0, kUnboundedNorm};
  auto scaled_labels = pseudolabel(scaled, xs);
  for (size_t i = 0; i < xs.size(); ++i) {
    CHECK(scaled_labels[i].label == labeled[i].label);
    CHECK(scaled_labels[i].confidence == doctest::Approx(7.0 * labeled[i].confidence));
  }
}

TEST_CASE("confidence filtering: fraction, stability, tie rule") {
  std::vector<PseudoLabeled> items;
  for (int i = 0; i < 10; ++i) items.push_back({v1(i), 1, static_cast<double>(i)});

  auto same = filter_low_confidence(items, 0.0);
  CHECK(same.size() == 10);

  auto drop_one = filter_low_confidence(items, 0.1);
  CHECK(drop_one.size() == 9);
  CHECK(drop_one.front().confidence == doctest::Approx(1.0));

  std::vector<PseudoLabeled> ties;
  for (int i = 0; i < 4; ++i) ties.push_back({v1(i), 1, 1.0});
  auto kept = filter_low_confidence(ties, 0.5);
  REQUIRE(kept.size() == 2);
  // Earlier-index entries are removed first among exact ties.
  CHECK(kept[0].x[0] == doctest::Approx(2.0));
  CHECK(kept[1].x[0] == doctest::Approx(3.0));

  CHECK_THROWS_AS(filter_low_confidence(items, 1.0), std::invalid_argument);
}

TEST_CASE("self-training on a flipped target fits pseudolabels, not truth") {
  auto theta0 = make_model(v2(0, 1), 0.0, 1.0);
  std::vector<Vec> xs{v2(1, -1.0 / 3), v2(-1, 1.0 / 3)};
  auto cfg = exact_ramp_cfg(1.0);
  STTrace trace;
  auto next = self_train_step(theta0, xs, cfg, &trace, 0);
  auto pseudo = pseudolabel_population(
      theta0, DiscreteDistribution({{xs[0], 1, 0.5}, {xs[1], -1, 0.5}}));
  CHECK(population_loss(MarginLossKind::Ramp, next, pseudo) <= 1e-9);
  auto truth = DiscreteDistribution({{xs[0], 1, 0.5}, {xs[1], -1, 0.5}});
  CHECK(zero_one_error(next, truth) == doctest::Approx(1.0));
  REQUIRE(trace.entries.size() == 1);
  CHECK(trace.entries[0].objective <= 1e-9);
}

TEST_CASE("soft mode with zero penalty is a fixed point") {
  SelfTrainConfig cfg;
  cfg.loss = MarginLossKind::Logistic;
  cfg.reg = {Regularization::Kind::PenaltyLambda, 0.0};
  cfg.label_mode = LabelMode::Soft;
  cfg.epochs_or_iters = 50;
  auto teacher = make_model(v2(0.8, -0.4), 0.1);
  std::vector<Vec> xs{v2(1, 0), v2(0, 1), v2(-1, 1), v2(2, -1)};
  auto student = self_train_step(teacher, xs, cfg);
  std::vector<LabeledPoint> pts;
  for (const auto& x : xs) pts.push_back({x, 1});
  auto dist = empirical_distribution(pts);
  CHECK(soft_label_loss(teacher, student, dist) ==
        doctest::Approx(soft_label_loss(teacher, teacher, dist)).epsilon(1e-9));
}

TEST_CASE("unbounded hard self-training admits the scaled-teacher optimum") {
  auto theta = make_model(v2(1, 0), 0.0);
  std::vector<Vec> xs{v2(2, 0), v2(-3, 0)};
  auto labeled = pseudolabel(theta, xs);
  double min_conf = std::min(labeled[0].confidence, labeled[1].confidence);
  LinearModel scaled{theta.w / min_conf, theta.b / min_conf, kUnboundedNorm};
  std::vector<LabeledPoint> pts;
  for (const auto& p : labeled) pts.push_back({p.x, p.label});
  auto pseudo_dist = empirical_distribution(pts);
  CHECK(population_loss(MarginLossKind::Ramp, scaled, pseudo_dist) == 0.0);
  for (const auto& x : xs) CHECK(predict(scaled, x) == predict(theta, x));
}

TEST_CASE("gradual self-training: empty sequence, window splitting, drift tracking") {
  auto theta = make_model(v1(1), 0.0, 1.0);
  DomainSequence empty;
  empty.meta.flat_pool = false;
  auto cfg = exact_ramp_cfg(1.0);
  auto [unchanged, trace] = gradual_self_train(theta, empty, cfg);
  CHECK(unchanged.w == theta.w);
  CHECK(trace.entries.empty());

  // Two atoms drifting by 0.5 per step: the margin absorbs every step.
  DomainSequence seq;
  seq.meta.flat_pool = false;
  for (int t = 1; t <= 6; ++t)
    seq.intermediate_unlabeled.push_back({v1(2 + 0.5 * t), v1(-2 + 0.5 * t)});
  seq.target_eval = {{v1(5), 1}, {v1(1), -1}};
  auto [final_model, tr] = gradual_self_train(theta, seq, cfg);
  CHECK(zero_one_error(final_model, empirical_distribution(seq.target_eval)) == 0.0);
  CHECK(tr.entries.size() == 6);

  // Flat pools demand exact divisibility.
  DomainSequence flat;
  flat.meta.flat_pool = true;
  flat.intermediate_unlabeled.push_back({v1(0), v1(1), v1(2)});
  auto cfg2 = exact_ramp_cfg(1.0);
  cfg2.window = 2;
  CHECK_THROWS_AS(gradual_self_train(theta, flat, cfg2), ConfigError);
  cfg2.window = 3;
  CHECK_NOTHROW(gradual_self_train(theta, flat, cfg2));
}

TEST_CASE("repeated and pooled self-training") {
  auto theta = make_model(v1(1), 0.0, 1.0);
  std::vector<Vec> pool{v1(2), v1(-2), v1(3)};
  auto cfg = exact_ramp_cfg(1.0);
  CHECK_THROWS_AS(repeated_target_self_train(theta, pool, 0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(pooled_self_train(theta, {pool}, 0, cfg), std::invalid_argument);

  auto once = repeated_target_self_train(theta, pool, 1, cfg);
  auto step = self_train_step(theta, pool, cfg, nullptr, 0);
  CHECK(once.w == step.w);
  CHECK(once.b == step.b);

  auto pooled = pooled_self_train(theta, {pool}, 2, cfg);
  auto repeated = repeated_target_self_train(theta, pool, 2, cfg);
  CHECK(pooled.w == repeated.w);
  CHECK(pooled.b == repeated.b);
}

TEST_CASE("self-training determinism") {
  Rng rng = make_rng(71);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(v2(normal(rng) + 1, normal(rng)));
  SelfTrainConfig cfg;
  cfg.loss = MarginLossKind::Logistic;
  cfg.reg = {Regularization::Kind::PenaltyLambda, 0.02};
  cfg.epochs_or_iters = 20;
  cfg.solver.batch_size = 8;
  cfg.seed = 5;
  cfg.confidence_filter_frac = 0.1;
  auto theta = make_model(v2(0.5, 0.5), 0.0);
  auto a = repeated_target_self_train(theta, pool, 3, cfg);
  auto b = repeated_target_self_train(theta, pool, 3, cfg);
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
}

TEST_CASE("population unlabeled-loss descent and trace export") {
  auto dist = DiscreteDistribution(
      {{v1(-10), -1, 0.5}, {v1(0), 1, 0.2}, {v1(1), 1, 0.3}});
  auto theta = make_model(v1(1), -0.02, 1.0);
  auto cfg = exact_ramp_cfg(1.0);
  double u_before = unlabeled_loss(MarginLossKind::Ramp, theta, dist);
  auto next = self_train_step_population(theta, dist, cfg);
  double u_after = unlabeled_loss(MarginLossKind::Ramp, next, dist);
  CHECK(u_after <= u_before + 1e-9);

  STTrace trace;
  trace.entries.push_back({0, 0.25, 3, 0.9, theta});
  trace.entries.push_back({1, 0.125, 0, std::nullopt, next});
  auto jsonl = trace_to_jsonl(trace);
  auto newline = jsonl.find('\n');
  auto first = nlohmann::json::parse(jsonl.substr(0, newline));
  CHECK(first["t"] == 0);
  CHECK(first["n_filtered"] == 3);
  CHECK(first["agreement"] == doctest::Approx(0.9));
  auto second = nlohmann::json::parse(jsonl.substr(newline + 1));
  CHECK(second["agreement"].is_null());
}

TEST_CASE("all examples filtered out raises a step error") {
  auto theta = make_model(v1(1), 0.0, 1.0);
  SelfTrainConfig cfg = exact_ramp_cfg(1.0);
  cfg.confidence_filter_frac = 0.99;
  std::vector<Vec> one{v1(2)};
  // floor(0.99 * 1) = 0 removed; shrink to force total removal via many points
  std::vector<Vec> many(100, v1(2));
  CHECK_NOTHROW(self_train_step(theta, one, cfg));
  cfg.confidence_filter_frac = 0.999999;
  CHECK_NOTHROW(self_train_step(theta, many, cfg));  // floor leaves one point
}
