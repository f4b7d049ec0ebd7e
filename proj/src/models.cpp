#include "gda/models.hpp"

#include <cmath>
#include <stdexcept>

namespace gda {

LinearModel make_model(Vec w, double b, double norm_budget_R) {
  if (std::isfinite(norm_budget_R)) {
    if (norm_budget_R <= 0.0)
      throw std::invalid_argument("make_model: norm budget must be positive");
    if (w.norm() > norm_budget_R + 1e-9)
      throw std::invalid_argument("make_model: ||w|| exceeds the norm budget");
  }
  return LinearModel{std::move(w), b, norm_budget_R};
}

std::string to_string(MarginLossKind kind) {
  switch (kind) {
    case MarginLossKind::Ramp: return "ramp";
    case MarginLossKind::Hinge: return "hinge";
    case MarginLossKind::Logistic: return "logistic";
  }
  return "ramp";
}

MarginLossKind margin_loss_from_string(const std::string& name) {
  if (name == "ramp") return MarginLossKind::Ramp;
  if (name == "hinge") return MarginLossKind::Hinge;
  if (name == "logistic") return MarginLossKind::Logistic;
  throw std::invalid_argument("unknown loss kind: " + name);
}

double margin_value(MarginLossKind kind, double m) {
  switch (kind) {
    case MarginLossKind::Ramp: return std::min(std::max(1.0 - m, 0.0), 1.0);
    case MarginLossKind::Hinge: return std::max(1.0 - m, 0.0);
    case MarginLossKind::Logistic:
      // log(1+exp(-m)) computed without overflow for large |m|.
      return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  return 0.0;
}

double score(const LinearModel& model, const Vec& x) {
  if (x.size() != model.w.size())
    throw std::invalid_argument("score: dimension mismatch");
  return model.w.dot(x) + model.b;
}

int predict(const LinearModel& model, const Vec& x) {
  return score(model, x) >= 0.0 ? 1 : -1;
}

double margin_loss(MarginLossKind kind, double prediction, int y) {
  if (y != 1 && y != -1) throw std::invalid_argument("margin_loss: label must be -1/+1");
  return margin_value(kind, static_cast<double>(y) * prediction);
}

double population_loss(MarginLossKind kind, const LinearModel& model,
                       const DiscreteDistribution& dist) {
  double total = 0.0;
  for (const auto& a : dist.atoms())
    total += a.mass * margin_loss(kind, score(model, a.x), a.y);
  return total;
}

double zero_one_error(const LinearModel& model, const DiscreteDistribution& dist) {
  double total = 0.0;
  for (const auto& a : dist.atoms())
    if (predict(model, a.x) != a.y) total += a.mass;
  return total;
}

double unlabeled_loss(MarginLossKind kind, const LinearModel& model,
                      const DiscreteDistribution& dist) {
  double total = 0.0;
  for (const auto& a : dist.atoms())
    total += a.mass * margin_value(kind, std::abs(score(model, a.x)));
  return total;
}

namespace {

double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

double cross_entropy(double p, double q) {
  const double eps = 1e-12;
  q = std::min(std::max(q, eps), 1.0 - eps);
  return -(p * std::log(q) + (1.0 - p) * std::log(1.0 - q));
}

}  // namespace

double soft_label_loss(const LinearModel& teacher, const LinearModel& student,
                       const DiscreteDistribution& dist) {
  double total = 0.0;
  for (const auto& a : dist.atoms()) {
    double p = sigmoid(score(teacher, a.x));
    double q = sigmoid(score(student, a.x));
    total += a.mass * cross_entropy(p, q);
  }
  return total;
}

nlohmann::json model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["w"] = std::vector<double>(model.w.data(), model.w.data() + model.w.size());
  j["b"] = model.b;
  if (std::isfinite(model.norm_budget_R))
    j["R"] = model.norm_budget_R;
  else
    j["R"] = nullptr;
  return j;
}

LinearModel model_from_json(const nlohmann::json& j) {
  auto ws = j.at("w").get<std::vector<double>>();
  Vec w(static_cast<Eigen::Index>(ws.size()));
  for (size_t i = 0; i < ws.size(); ++i) w[static_cast<Eigen::Index>(i)] = ws[i];
  double R = j.at("R").is_null() ? kUnboundedNorm : j.at("R").get<double>();
  return make_model(std::move(w), j.at("b").get<double>(), R);
}

}  // namespace gda
