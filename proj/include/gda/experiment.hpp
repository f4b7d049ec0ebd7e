#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gda/selftrain.hpp"
#include "gda/shiftgen.hpp"
#include "json.hpp"

namespace gda {

enum class Method { SourceOnly, TargetST, AllST, GradualST };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct DatasetConfig {
  enum class Kind { GaussianDrift, Mixing, Rotation, Import };
  Kind kind = Kind::GaussianDrift;
  GaussianDriftSpec drift;        // GaussianDrift + Mixing endpoints
  int mixing_n_domains = 10;
  int mixing_n_per_domain = 500;
  int rotation_n_points = 40;
  int rotation_n_domains = 12;
  double rotation_total_angle_deg = 60.0;
  Interval rotation_radius_band{4.0, 4.4};
  std::string import_path;
};

struct ModelConfig {
  MarginLossKind loss = MarginLossKind::Logistic;
  Regularization reg{Regularization::Kind::PenaltyLambda, 0.02};
};

struct ExperimentConfig {
  DatasetConfig dataset;
  ModelConfig model;
  Method method = Method::GradualST;
  SelfTrainConfig selftrain;
  int rounds = 0;  // 0: default |I|/W for target/all self-training
  std::vector<std::uint64_t> seeds;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

struct ExperimentReport {
  struct PerSeed {
    std::uint64_t seed = 0;
    double accuracy = 0.0;
  };
  std::string method;
  std::vector<PerSeed> per_seed;
  double mean = 0.0;
  // Student-t 90% half-width; negative when fewer than 2 seeds (emitted null).
  double ci90_halfwidth = -1.0;
  nlohmann::json resolved_config;
  double wall_clock_sec = 0.0;
  std::string timestamp;
};

/// Deterministic part only (timing lives in a sibling object).
nlohmann::json report_result_json(const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);
std::string report_csv_summary(const ExperimentReport& report);

/// Per seed: generate/load the sequence, fit the source model, apply the
/// method, and score target accuracy = 1 - zero_one_error on target_eval.
/// Seeds run in parallel up to GDA_THREADS (default: logical cores).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class Ablation { NoFilter, WindowOverride, NoReg, SoftLabels };

Ablation ablation_from_string(const std::string& name);
std::string to_string(Ablation a);

struct AblationReport {
  ExperimentReport base;
  ExperimentReport ablated;
  std::vector<double> per_seed_delta;  // base - ablated, matched seeds
};

/// Runs both arms with shared seeds. window_override supplies the ablated W.
AblationReport run_ablation(const ExperimentConfig& base_cfg, Ablation ablation,
                            int window_override = 0);

nlohmann::json ablation_report_to_json(const AblationReport& report);

}  // namespace gda
