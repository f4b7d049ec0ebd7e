#include "gda/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gda/rng.hpp"

namespace gda {

std::string trace_to_jsonl(const STTrace& trace) {
  std::ostringstream out;
  for (const auto& e : trace.entries) {
    nlohmann::json j;
    j["t"] = e.step;
    j["objective"] = e.objective;
    j["n_filtered"] = e.n_filtered;
    if (e.agreement)
      j["agreement"] = *e.agreement;
    else
      j["agreement"] = nullptr;
    j["model_ref"] = model_to_json(e.model);
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<PseudoLabeled> pseudolabel(const LinearModel& model,
                                       const std::vector<Vec>& xs) {
  std::vector<PseudoLabeled> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    double s = score(model, x);
    out.push_back({x, s >= 0.0 ? 1 : -1, std::abs(s)});
  }
  return out;
}

std::vector<PseudoLabeled> filter_low_confidence(const std::vector<PseudoLabeled>& labeled,
                                                 double alpha) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::invalid_argument("filter_low_confidence: alpha must be in [0,1)");
  const auto n = labeled.size();
  const auto drop = static_cast<size_t>(std::floor(alpha * static_cast<double>(n)));
  if (drop == 0) return labeled;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return labeled[a].confidence < labeled[b].confidence;
  });
  std::vector<bool> removed(n, false);
  for (size_t k = 0; k < drop; ++k) removed[order[k]] = true;
  std::vector<PseudoLabeled> kept;
  kept.reserve(n - drop);
  for (size_t i = 0; i < n; ++i)
    if (!removed[i]) kept.push_back(labeled[i]);
  return kept;
}

namespace {

DiscreteDistribution to_distribution(const std::vector<PseudoLabeled>& labeled) {
  const double mass = 1.0 / static_cast<double>(labeled.size());
  std::vector<DiscreteDistribution::Atom> atoms;
  atoms.reserve(labeled.size());
  for (const auto& p : labeled) atoms.push_back({p.x, p.label, mass});
  return DiscreteDistribution(std::move(atoms));
}

Interval auto_bias_range(const DiscreteDistribution& data, double R) {
  double max_norm = 0.0;
  for (const auto& a : data.atoms()) max_norm = std::max(max_norm, a.x.norm());
  double extent = R * max_norm + 2.0;
  return {-extent, extent};
}

bool use_exact(const SelfTrainConfig& cfg, const DiscreteDistribution& data) {
  switch (cfg.engine) {
    case SolverEngine::ExactGrid: return true;
    case SolverEngine::Iterative: return false;
    case SolverEngine::Auto: return data.dim() <= 2 && data.size() <= 64;
  }
  return false;
}

LinearModel train_on(const LinearModel& model, const DiscreteDistribution& pseudo,
                     const SelfTrainConfig& cfg, std::uint64_t step_seed,
                     double* objective_out) {
  SolverConfig solver = cfg.solver;
  solver.seed = step_seed;
  LinearModel next;
  if (cfg.reg.kind == Regularization::Kind::ConstraintR) {
    const double R = cfg.reg.value;
    if (use_exact(cfg, pseudo)) {
      if (pseudo.dim() > 2)
        throw ConfigError("self_train_step: exact engine requires d <= 2");
      next = erm_exact_1d2d(cfg.loss, pseudo, R, solver.grid_resolution,
                            auto_bias_range(pseudo, R), &model);
    } else {
      next = erm_constrained(cfg.loss, pseudo, R, solver, &model);
    }
  } else {
    if (cfg.loss != MarginLossKind::Logistic)
      throw ConfigError("self_train_step: the penalty path trains a logistic model");
    next = penalized_logistic(pseudo, cfg.reg.value, cfg.epochs_or_iters, solver, &model);
  }
  if (objective_out) *objective_out = population_loss(cfg.loss, next, pseudo);
  return next;
}

}  // namespace

LinearModel self_train_step(const LinearModel& model, const std::vector<Vec>& xs,
                            const SelfTrainConfig& cfg, STTrace* trace,
                            int step_index) {
  if (xs.empty()) throw std::invalid_argument("self_train_step: no unlabeled data");
  auto labeled = pseudolabel(model, xs);
  const auto before = labeled.size();
  if (cfg.confidence_filter_frac > 0.0)
    labeled = filter_low_confidence(labeled, cfg.confidence_filter_frac);
  if (labeled.empty())
    throw std::runtime_error("self_train_step: all examples filtered out");
  const int n_filtered = static_cast<int>(before - labeled.size());
  const std::uint64_t step_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(step_index));

  LinearModel next;
  double objective = 0.0;
  if (cfg.label_mode == LabelMode::Hard &&
      cfg.reg.kind == Regularization::Kind::PenaltyLambda && cfg.reg.value == 0.0) {
    // Unpenalized logistic ST has no finite argmin: the loss tends to zero
    // along the scaled-teacher ray, which leaves every prediction unchanged.
    // Resolve the step by that minimizing sequence's limit direction.
    double min_conf = std::numeric_limits<double>::infinity();
    for (const auto& p : labeled) min_conf = std::min(min_conf, p.confidence);
    double alpha = min_conf > 1e-12 ? std::max(1.0, 1.0 / min_conf) : 1.0;
    next = LinearModel{model.w * alpha, model.b * alpha, model.norm_budget_R};
    objective = population_loss(cfg.loss, next, to_distribution(labeled));
  } else if (cfg.label_mode == LabelMode::Soft) {
    if (cfg.reg.kind != Regularization::Kind::PenaltyLambda)
      throw ConfigError("self_train_step: soft labels require the penalty path");
    std::vector<Vec> kept;
    kept.reserve(labeled.size());
    for (const auto& p : labeled) kept.push_back(p.x);
    SolverConfig solver = cfg.solver;
    solver.seed = step_seed;
    next = penalized_soft_logistic(kept, model, cfg.reg.value, cfg.epochs_or_iters, solver);
    objective = soft_label_loss(model, next, to_distribution(labeled));
  } else {
    next = train_on(model, to_distribution(labeled), cfg, step_seed, &objective);
  }

  if (trace)
    trace->entries.push_back({step_index, objective, n_filtered, std::nullopt, next});
  return next;
}

std::pair<LinearModel, STTrace> gradual_self_train(const LinearModel& model,
                                                   const DomainSequence& sequence,
                                                   const SelfTrainConfig& cfg) {
  STTrace trace;
  LinearModel current = model;
  int step = 0;

  std::vector<std::vector<Vec>> windows;
  if (sequence.meta.flat_pool) {
    if (sequence.intermediate_unlabeled.size() > 1)
      throw ConfigError("gradual_self_train: flat pool expects a single pool");
    if (!sequence.intermediate_unlabeled.empty()) {
      const auto& pool = sequence.intermediate_unlabeled.front();
      const int W = cfg.window;
      if (W < 1) throw ConfigError("gradual_self_train: window must be >= 1");
      if (pool.size() % static_cast<size_t>(W) != 0)
        throw ConfigError("gradual_self_train: window " + std::to_string(W) +
                          " does not divide the pool size " + std::to_string(pool.size()));
      for (size_t start = 0; start < pool.size(); start += static_cast<size_t>(W))
        windows.emplace_back(pool.begin() + static_cast<long>(start),
                             pool.begin() + static_cast<long>(start + static_cast<size_t>(W)));
    }
  } else {
    windows = sequence.intermediate_unlabeled;
  }

  for (const auto& window : windows) {
    current = self_train_step(current, window, cfg, &trace, step);
    ++step;
  }
  return {current, trace};
}

LinearModel repeated_target_self_train(const LinearModel& model,
                                       const std::vector<Vec>& target_xs, int rounds,
                                       const SelfTrainConfig& cfg, STTrace* trace) {
  if (rounds < 1) throw std::invalid_argument("repeated_target_self_train: rounds < 1");
  LinearModel current = model;
  for (int round = 0; round < rounds; ++round)
    current = self_train_step(current, target_xs, cfg, trace, round);
  return current;
}

LinearModel pooled_self_train(const LinearModel& model,
                              const std::vector<std::vector<Vec>>& all_unlabeled,
                              int rounds, const SelfTrainConfig& cfg, STTrace* trace) {
  std::vector<Vec> pool;
  for (const auto& dom : all_unlabeled) pool.insert(pool.end(), dom.begin(), dom.end());
  return repeated_target_self_train(model, pool, rounds, cfg, trace);
}

DiscreteDistribution pseudolabel_population(const LinearModel& model,
                                            const DiscreteDistribution& dist) {
  std::vector<DiscreteDistribution::Atom> atoms;
  atoms.reserve(static_cast<size_t>(dist.size()));
  for (const auto& a : dist.atoms()) atoms.push_back({a.x, predict(model, a.x), a.mass});
  return DiscreteDistribution(std::move(atoms));
}

LinearModel self_train_step_population(const LinearModel& model,
                                       const DiscreteDistribution& dist,
                                       const SelfTrainConfig& cfg) {
  auto pseudo = pseudolabel_population(model, dist);
  return train_on(model, pseudo, cfg, cfg.seed, nullptr);
}

LinearModel gradual_self_train_population(const LinearModel& model,
                                          const std::vector<DiscreteDistribution>& domains,
                                          const SelfTrainConfig& cfg, STTrace* trace) {
  LinearModel current = model;
  int step = 0;
  for (const auto& domain : domains) {
    auto pseudo = pseudolabel_population(current, domain);
    double objective = 0.0;
    current = train_on(current, pseudo, cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(step)),
                       &objective);
    if (trace) trace->entries.push_back({step, objective, 0, std::nullopt, current});
    ++step;
  }
  return current;
}

}  // namespace gda
