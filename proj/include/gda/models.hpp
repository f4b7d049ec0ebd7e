#pragma once

#include <limits>
#include <string>

#include "gda/distributions.hpp"
#include "json.hpp"

namespace gda {

constexpr double kUnboundedNorm = std::numeric_limits<double>::infinity();

/// Linear scorer x -> w.x + b with an optional l2 norm budget on w.
/// When the budget is finite the invariant ||w|| <= R + 1e-9 holds.
struct LinearModel {
  Vec w;
  double b = 0.0;
  double norm_budget_R = kUnboundedNorm;

  int dim() const { return static_cast<int>(w.size()); }
};

/// Validates the norm budget; throws std::invalid_argument on violation.
LinearModel make_model(Vec w, double b, double norm_budget_R = kUnboundedNorm);

enum class MarginLossKind { Ramp, Hinge, Logistic };

std::string to_string(MarginLossKind kind);
MarginLossKind margin_loss_from_string(const std::string& name);

/// Loss as a function of the margin m = y * prediction.
/// Ramp(m) = min(max(1-m,0),1), Hinge(m) = max(1-m,0),
/// Logistic(m) = log(1+exp(-m)).
double margin_value(MarginLossKind kind, double m);

double score(const LinearModel& model, const Vec& x);

/// sign(score) with sign(0) = +1.
int predict(const LinearModel& model, const Vec& x);

double margin_loss(MarginLossKind kind, double prediction, int y);

/// Mass-weighted expected margin loss over the distribution.
double population_loss(MarginLossKind kind, const LinearModel& model,
                       const DiscreteDistribution& dist);

/// Mass-weighted misclassification rate under the sign(0)=+1 convention.
double zero_one_error(const LinearModel& model, const DiscreteDistribution& dist);

/// Loss of the model against its own sign: E[loss(|score(X)|)]. Lower bounds
/// the labeled loss and is non-increasing under exact self-training.
double unlabeled_loss(MarginLossKind kind, const LinearModel& model,
                      const DiscreteDistribution& dist);

/// Expected cross-entropy between sigmoid(teacher score) used as a target
/// probability and sigmoid(student score): E[-(p log p' + (1-p) log(1-p'))].
/// Student probabilities are clamped to [1e-12, 1-1e-12] before the logs.
double soft_label_loss(const LinearModel& teacher, const LinearModel& student,
                       const DiscreteDistribution& dist);

nlohmann::json model_to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& j);

}  // namespace gda
