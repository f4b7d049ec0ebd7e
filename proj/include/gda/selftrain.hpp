#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gda/distributions.hpp"
#include "gda/models.hpp"
#include "gda/optimize.hpp"

namespace gda {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Hard norm constraint ||w|| <= R or squared penalty lambda*||w||^2.
/// Exactly one is active; they are never combined.
struct Regularization {
  enum class Kind { ConstraintR, PenaltyLambda } kind = Kind::ConstraintR;
  double value = 1.0;
};

enum class LabelMode { Hard, Soft };

/// ExactGrid drives every step through the d<=2 grid solver (theory paths);
/// Iterative uses the descent solvers; Auto picks ExactGrid for small 1-D/2-D
/// steps and Iterative otherwise.
enum class SolverEngine { Auto, ExactGrid, Iterative };

struct SelfTrainConfig {
  MarginLossKind loss = MarginLossKind::Ramp;
  Regularization reg;
  double confidence_filter_frac = 0.0;  // alpha in [0,1)
  int window = 1;                       // W
  int epochs_or_iters = 100;
  LabelMode label_mode = LabelMode::Hard;
  SolverEngine engine = SolverEngine::Auto;
  SolverConfig solver;
  std::uint64_t seed = 0;
};

struct PseudoLabeled {
  Vec x;
  int label = 1;
  double confidence = 0.0;  // |score|
};

struct STTrace {
  struct Entry {
    int step = 0;
    double objective = 0.0;
    int n_filtered = 0;
    std::optional<double> agreement;  // pseudolabel-vs-truth, when truth known
    LinearModel model;
  };
  std::vector<Entry> entries;
};

/// One JSON record per step: {t, objective, n_filtered, agreement, model_ref}.
std::string trace_to_jsonl(const STTrace& trace);

/// label = predict(model, x); confidence = |score(model, x)|.
std::vector<PseudoLabeled> pseudolabel(const LinearModel& model,
                                       const std::vector<Vec>& xs);

/// Removes the floor(alpha*n) lowest-confidence entries. Stable ascending sort
/// by (confidence, original index); among exact ties, earlier-index entries
/// are removed first. Survivors keep their original order.
std::vector<PseudoLabeled> filter_low_confidence(const std::vector<PseudoLabeled>& labeled,
                                                 double alpha);

/// pseudolabel -> optional confidence filter -> retrain per cfg. Returns the
/// new model; appends a trace entry when `trace` is given.
LinearModel self_train_step(const LinearModel& model, const std::vector<Vec>& xs,
                            const SelfTrainConfig& cfg, STTrace* trace = nullptr,
                            int step_index = 0);

/// Sequential self-training over windows/domains in temporal order.
/// A flat pool is split into windows of cfg.window (W must divide the pool);
/// pre-split sequences use one step per domain.
std::pair<LinearModel, STTrace> gradual_self_train(const LinearModel& model,
                                                   const DomainSequence& sequence,
                                                   const SelfTrainConfig& cfg);

/// self_train_step applied `rounds` times to the same pool, re-pseudolabeling
/// (and re-filtering) each round.
LinearModel repeated_target_self_train(const LinearModel& model,
                                       const std::vector<Vec>& target_xs, int rounds,
                                       const SelfTrainConfig& cfg,
                                       STTrace* trace = nullptr);

/// repeated_target_self_train on the concatenation of all pools.
LinearModel pooled_self_train(const LinearModel& model,
                              const std::vector<std::vector<Vec>>& all_unlabeled,
                              int rounds, const SelfTrainConfig& cfg,
                              STTrace* trace = nullptr);

/// Population-level pseudolabeling: same X atoms and masses, labels replaced
/// by the model's predictions (atoms re-merged).
DiscreteDistribution pseudolabel_population(const LinearModel& model,
                                            const DiscreteDistribution& dist);

/// Exact population self-training step (no confidence filtering).
LinearModel self_train_step_population(const LinearModel& model,
                                       const DiscreteDistribution& dist,
                                       const SelfTrainConfig& cfg);

LinearModel gradual_self_train_population(const LinearModel& model,
                                          const std::vector<DiscreteDistribution>& domains,
                                          const SelfTrainConfig& cfg,
                                          STTrace* trace = nullptr);

}  // namespace gda
