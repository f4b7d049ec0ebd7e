#include "gda/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <future>
#include <sstream>
#include <thread>

#include "gda/io.hpp"
#include "gda/rng.hpp"

namespace gda {

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

// Two-sided 90% Student-t quantiles (0.95 one-sided) for df = 1..30; the
// normal quantile beyond.
double t_quantile_90(int df) {
  static const double table[] = {6.3138, 2.9200, 2.3534, 2.1318, 2.0150, 1.9432,
                                 1.8946, 1.8595, 1.8331, 1.8125, 1.7959, 1.7823,
                                 1.7709, 1.7613, 1.7531, 1.7459, 1.7396, 1.7341,
                                 1.7291, 1.7247, 1.7207, 1.7171, 1.7139, 1.7109,
                                 1.7081, 1.7056, 1.7033, 1.7011, 1.6991, 1.6973};
  if (df < 1) return 0.0;
  if (df <= 30) return table[df - 1];
  return 1.6449;
}

int thread_budget() {
  if (const char* env = std::getenv("GDA_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::SourceOnly: return "source_only";
    case Method::TargetST: return "target_st";
    case Method::AllST: return "all_st";
    case Method::GradualST: return "gradual_st";
  }
  return "gradual_st";
}

Method method_from_string(const std::string& name) {
  if (name == "source_only") return Method::SourceOnly;
  if (name == "target_st") return Method::TargetST;
  if (name == "all_st") return Method::AllST;
  if (name == "gradual_st") return Method::GradualST;
  throw DataError("config: unknown method '" + name + "'");
}

Ablation ablation_from_string(const std::string& name) {
  if (name == "no_filter") return Ablation::NoFilter;
  if (name == "window_override") return Ablation::WindowOverride;
  if (name == "no_reg") return Ablation::NoReg;
  if (name == "soft_labels") return Ablation::SoftLabels;
  throw DataError("config: unknown ablation '" + name + "'");
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::NoFilter: return "no_filter";
    case Ablation::WindowOverride: return "window_override";
    case Ablation::NoReg: return "no_reg";
    case Ablation::SoftLabels: return "soft_labels";
  }
  return "no_filter";
}

namespace {

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"", {"dataset", "model", "method", "selftrain", "rounds", "seeds"}},
      {"dataset",
       {"kind", "d", "n_labeled", "n_unlabeled_total", "min_var", "max_var",
        "n_target_eval", "n_domains", "n_per_domain", "n_points", "total_angle_deg",
        "radius_lo", "radius_hi", "path"}},
      {"model", {"loss", "regularization"}},
      {"model.regularization", {"kind", "value"}},
      {"selftrain",
       {"confidence_filter_frac", "window", "epochs", "label_mode", "engine",
        "optimizer", "step_initial", "step_decay", "batch_size", "restarts",
        "max_iters", "grid_resolution"}},
  };
  return schema;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, config_schema());
  ExperimentConfig cfg;
  const auto& ds = j.at("dataset");
  std::string kind = ds.value("kind", "gaussian_drift");
  if (kind == "gaussian_drift")
    cfg.dataset.kind = DatasetConfig::Kind::GaussianDrift;
  else if (kind == "mixing")
    cfg.dataset.kind = DatasetConfig::Kind::Mixing;
  else if (kind == "rotation")
    cfg.dataset.kind = DatasetConfig::Kind::Rotation;
  else if (kind == "import")
    cfg.dataset.kind = DatasetConfig::Kind::Import;
  else
    throw DataError("config: unknown dataset.kind '" + kind + "'");

  auto& drift = cfg.dataset.drift;
  drift.d = ds.value("d", drift.d);
  drift.n_labeled = ds.value("n_labeled", drift.n_labeled);
  drift.n_unlabeled_total = ds.value("n_unlabeled_total", drift.n_unlabeled_total);
  drift.min_var = ds.value("min_var", drift.min_var);
  drift.max_var = ds.value("max_var", drift.max_var);
  drift.n_target_eval = ds.value("n_target_eval", drift.n_target_eval);
  cfg.dataset.mixing_n_domains = ds.value("n_domains", cfg.dataset.mixing_n_domains);
  cfg.dataset.mixing_n_per_domain = ds.value("n_per_domain", cfg.dataset.mixing_n_per_domain);
  cfg.dataset.rotation_n_points = ds.value("n_points", cfg.dataset.rotation_n_points);
  if (cfg.dataset.kind == DatasetConfig::Kind::Rotation)
    cfg.dataset.rotation_n_domains = ds.value("n_domains", cfg.dataset.rotation_n_domains);
  cfg.dataset.rotation_total_angle_deg =
      ds.value("total_angle_deg", cfg.dataset.rotation_total_angle_deg);
  cfg.dataset.rotation_radius_band.lo = ds.value("radius_lo", cfg.dataset.rotation_radius_band.lo);
  cfg.dataset.rotation_radius_band.hi = ds.value("radius_hi", cfg.dataset.rotation_radius_band.hi);
  cfg.dataset.import_path = ds.value("path", "");

  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.model.loss = margin_loss_from_string(m.value("loss", "logistic"));
    if (m.contains("regularization")) {
      const auto& reg = m.at("regularization");
      std::string rk = reg.value("kind", "penalty");
      if (rk == "penalty")
        cfg.model.reg.kind = Regularization::Kind::PenaltyLambda;
      else if (rk == "constraint")
        cfg.model.reg.kind = Regularization::Kind::ConstraintR;
      else
        throw DataError("config: unknown regularization.kind '" + rk + "'");
      cfg.model.reg.value = reg.value("value", 0.02);
    }
  }

  cfg.method = method_from_string(j.value("method", "gradual_st"));

  if (j.contains("selftrain")) {
    const auto& st = j.at("selftrain");
    cfg.selftrain.confidence_filter_frac =
        st.value("confidence_filter_frac", cfg.selftrain.confidence_filter_frac);
    cfg.selftrain.window = st.value("window", cfg.selftrain.window);
    cfg.selftrain.epochs_or_iters = st.value("epochs", cfg.selftrain.epochs_or_iters);
    std::string mode = st.value("label_mode", "hard");
    if (mode == "hard")
      cfg.selftrain.label_mode = LabelMode::Hard;
    else if (mode == "soft")
      cfg.selftrain.label_mode = LabelMode::Soft;
    else
      throw DataError("config: unknown label_mode '" + mode + "'");
    std::string engine = st.value("engine", "auto");
    if (engine == "auto")
      cfg.selftrain.engine = SolverEngine::Auto;
    else if (engine == "exact")
      cfg.selftrain.engine = SolverEngine::ExactGrid;
    else if (engine == "iterative")
      cfg.selftrain.engine = SolverEngine::Iterative;
    else
      throw DataError("config: unknown engine '" + engine + "'");
    std::string flavor = st.value("optimizer", "sgd");
    if (flavor == "adam")
      cfg.selftrain.solver.flavor = SolverConfig::Flavor::Adam;
    else if (flavor == "sgd")
      cfg.selftrain.solver.flavor = SolverConfig::Flavor::Sgd;
    else
      throw DataError("config: unknown optimizer '" + flavor + "'");
    cfg.selftrain.solver.step.initial = st.value("step_initial", 0.0);
    std::string decay = st.value("step_decay", "constant");
    if (decay == "constant")
      cfg.selftrain.solver.step.decay = StepSchedule::Decay::Constant;
    else if (decay == "inv_sqrt")
      cfg.selftrain.solver.step.decay = StepSchedule::Decay::InvSqrt;
    else
      throw DataError("config: unknown step_decay '" + decay + "'");
    cfg.selftrain.solver.batch_size = st.value("batch_size", 0);
    cfg.selftrain.solver.restarts = st.value("restarts", cfg.selftrain.solver.restarts);
    cfg.selftrain.solver.max_iters = st.value("max_iters", cfg.selftrain.solver.max_iters);
    cfg.selftrain.solver.grid_resolution =
        st.value("grid_resolution", cfg.selftrain.solver.grid_resolution);
  } else {
    cfg.selftrain.solver.step.decay = StepSchedule::Decay::Constant;
  }
  cfg.rounds = j.value("rounds", 0);

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty())
    throw DataError("config: seeds must be a nonempty array");
  for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());

  cfg.selftrain.loss = cfg.model.loss;
  cfg.selftrain.reg = cfg.model.reg;
  return cfg;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json ds;
  switch (cfg.dataset.kind) {
    case DatasetConfig::Kind::GaussianDrift: ds["kind"] = "gaussian_drift"; break;
    case DatasetConfig::Kind::Mixing: ds["kind"] = "mixing"; break;
    case DatasetConfig::Kind::Rotation: ds["kind"] = "rotation"; break;
    case DatasetConfig::Kind::Import: ds["kind"] = "import"; break;
  }
  ds["d"] = cfg.dataset.drift.d;
  ds["n_labeled"] = cfg.dataset.drift.n_labeled;
  ds["n_unlabeled_total"] = cfg.dataset.drift.n_unlabeled_total;
  ds["min_var"] = cfg.dataset.drift.min_var;
  ds["max_var"] = cfg.dataset.drift.max_var;
  ds["n_target_eval"] = cfg.dataset.drift.n_target_eval;
  if (cfg.dataset.kind == DatasetConfig::Kind::Mixing) {
    ds["n_domains"] = cfg.dataset.mixing_n_domains;
    ds["n_per_domain"] = cfg.dataset.mixing_n_per_domain;
  }
  if (cfg.dataset.kind == DatasetConfig::Kind::Rotation) {
    ds["n_points"] = cfg.dataset.rotation_n_points;
    ds["n_domains"] = cfg.dataset.rotation_n_domains;
    ds["total_angle_deg"] = cfg.dataset.rotation_total_angle_deg;
    ds["radius_lo"] = cfg.dataset.rotation_radius_band.lo;
    ds["radius_hi"] = cfg.dataset.rotation_radius_band.hi;
  }
  if (cfg.dataset.kind == DatasetConfig::Kind::Import) ds["path"] = cfg.dataset.import_path;

  nlohmann::json st = {
      {"confidence_filter_frac", cfg.selftrain.confidence_filter_frac},
      {"window", cfg.selftrain.window},
      {"epochs", cfg.selftrain.epochs_or_iters},
      {"label_mode", cfg.selftrain.label_mode == LabelMode::Hard ? "hard" : "soft"},
      {"engine", cfg.selftrain.engine == SolverEngine::Auto
                     ? "auto"
                     : (cfg.selftrain.engine == SolverEngine::ExactGrid ? "exact"
                                                                        : "iterative")},
      {"optimizer",
       cfg.selftrain.solver.flavor == SolverConfig::Flavor::Adam ? "adam" : "sgd"},
      {"step_initial", cfg.selftrain.solver.step.initial},
      {"step_decay", cfg.selftrain.solver.step.decay == StepSchedule::Decay::Constant
                         ? "constant"
                         : "inv_sqrt"},
      {"batch_size", cfg.selftrain.solver.batch_size},
      {"restarts", cfg.selftrain.solver.restarts},
      {"max_iters", cfg.selftrain.solver.max_iters},
      {"grid_resolution", cfg.selftrain.solver.grid_resolution}};

  return {{"dataset", ds},
          {"model",
           {{"loss", to_string(cfg.model.loss)},
            {"regularization",
             {{"kind", cfg.model.reg.kind == Regularization::Kind::PenaltyLambda
                           ? "penalty"
                           : "constraint"},
              {"value", cfg.model.reg.value}}}}},
          {"method", to_string(cfg.method)},
          {"selftrain", st},
          {"rounds", cfg.rounds},
          {"seeds", cfg.seeds},
          {"notes",
           {{"target_st_refilters_each_round", true},
            {"ci_method", "student-t"},
            {"artifact_version", kArtifactVersion}}}};
}

namespace {

DomainSequence build_sequence(const DatasetConfig& ds, std::uint64_t seed) {
  switch (ds.kind) {
    case DatasetConfig::Kind::GaussianDrift: {
      GaussianDriftSpec spec = ds.drift;
      spec.seed = seed;
      return gen_gaussian_drift(spec);
    }
    case DatasetConfig::Kind::Mixing: {
      GaussianDriftSpec spec = ds.drift;
      spec.seed = seed;
      auto [source, target] = drift_endpoints(spec);
      return gen_mixing_interpolation(source, target, ds.mixing_n_domains,
                                      ds.mixing_n_per_domain, spec.n_labeled,
                                      spec.n_target_eval, seed);
    }
    case DatasetConfig::Kind::Rotation:
      return gen_rotation_drift(ds.rotation_n_points, ds.rotation_n_domains,
                                ds.rotation_total_angle_deg, ds.rotation_radius_band,
                                seed);
    case DatasetConfig::Kind::Import: return import_sequence(ds.import_path);
  }
  throw DataError("config: unhandled dataset kind");
}

LinearModel fit_source(const DomainSequence& seq, const ExperimentConfig& cfg,
                       std::uint64_t seed, double lambda_override = -1.0) {
  auto dist = empirical_distribution(seq.source_labeled);
  SelfTrainConfig st = cfg.selftrain;
  st.solver.seed = mix_seed(seed, 0x535243);
  if (cfg.model.reg.kind == Regularization::Kind::PenaltyLambda) {
    double lambda = lambda_override >= 0.0 ? lambda_override : cfg.model.reg.value;
    return penalized_logistic(dist, lambda, st.epochs_or_iters, st.solver);
  }
  const double R = cfg.model.reg.value;
  if (st.engine == SolverEngine::ExactGrid ||
      (st.engine == SolverEngine::Auto && dist.dim() <= 2 && dist.size() <= 64)) {
    double max_norm = 0.0;
    for (const auto& a : dist.atoms()) max_norm = std::max(max_norm, a.x.norm());
    return erm_exact_1d2d(cfg.model.loss, dist, R, st.solver.grid_resolution,
                          {-(R * max_norm + 2.0), R * max_norm + 2.0});
  }
  return erm_constrained(cfg.model.loss, dist, R, st.solver);
}

int default_rounds(const DomainSequence& seq, int window) {
  int total = seq.intermediate_total();
  if (seq.meta.flat_pool) {
    if (window < 1 || total % window != 0)
      throw ConfigError("experiment: window " + std::to_string(window) +
                        " does not divide the intermediate pool " + std::to_string(total));
    return total / window;
  }
  return static_cast<int>(seq.intermediate_unlabeled.size());
}

double run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  DomainSequence seq = build_sequence(cfg.dataset, seed);
  LinearModel model = fit_source(seq, cfg, seed);

  SelfTrainConfig st = cfg.selftrain;
  st.loss = cfg.model.loss;
  st.reg = cfg.model.reg;
  st.seed = mix_seed(seed, 0x535450);

  const int rounds = cfg.rounds > 0 ? cfg.rounds : default_rounds(seq, st.window);
  switch (cfg.method) {
    case Method::SourceOnly: break;
    case Method::TargetST:
      model = repeated_target_self_train(model, seq.target_unlabeled, rounds, st);
      break;
    case Method::AllST:
      // Pool exactly the unlabeled data the gradual run consumes; the stream
      // already ends at the target law, and matching budgets keeps the
      // comparison fair.
      model = pooled_self_train(model, seq.intermediate_unlabeled, rounds, st);
      break;
    case Method::GradualST: {
      auto [final_model, trace] = gradual_self_train(model, seq, st);
      model = final_model;
      break;
    }
  }
  auto eval = empirical_distribution(seq.target_eval);
  return 1.0 - zero_one_error(model, eval);
}

ExperimentReport aggregate(const ExperimentConfig& cfg,
                           const std::vector<double>& accuracies, double wall_sec) {
  ExperimentReport report;
  report.method = to_string(cfg.method);
  double sum = 0.0;
  for (size_t i = 0; i < accuracies.size(); ++i) {
    report.per_seed.push_back({cfg.seeds[i], accuracies[i]});
    sum += accuracies[i];
  }
  const auto k = static_cast<int>(accuracies.size());
  report.mean = sum / k;
  if (k >= 2) {
    double ss = 0.0;
    for (double a : accuracies) ss += (a - report.mean) * (a - report.mean);
    double stderr_mean = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));
    report.ci90_halfwidth = t_quantile_90(k - 1) * stderr_mean;
  }
  report.resolved_config = experiment_config_to_json(cfg);
  report.wall_clock_sec = wall_sec;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
  report.timestamp = buf;
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw DataError("run_experiment: seeds must be nonempty");
  auto start = std::chrono::steady_clock::now();
  const int budget = thread_budget();
  std::vector<double> accuracies(cfg.seeds.size());
  size_t next = 0;
  while (next < cfg.seeds.size()) {
    size_t batch = std::min(static_cast<size_t>(budget), cfg.seeds.size() - next);
    std::vector<std::future<double>> futures;
    for (size_t i = 0; i < batch; ++i) {
      std::uint64_t seed = cfg.seeds[next + i];
      futures.push_back(
          std::async(std::launch::async, [&cfg, seed] { return run_single(cfg, seed); }));
    }
    for (size_t i = 0; i < batch; ++i) accuracies[next + i] = futures[i].get();
    next += batch;
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return aggregate(cfg, accuracies, wall);
}

nlohmann::json report_result_json(const ExperimentReport& report) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& p : report.per_seed)
    per_seed.push_back({{"seed", p.seed}, {"accuracy", p.accuracy}});
  nlohmann::json j = {{"method", report.method},
                      {"per_seed", per_seed},
                      {"mean", report.mean},
                      {"config", report.resolved_config}};
  if (report.ci90_halfwidth >= 0.0)
    j["ci90_halfwidth"] = report.ci90_halfwidth;
  else
    j["ci90_halfwidth"] = nullptr;
  return j;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  return {{"result", report_result_json(report)},
          {"timing", {{"wall_clock_sec", report.wall_clock_sec},
                      {"timestamp", report.timestamp}}}};
}

std::string report_csv_summary(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,seed,accuracy\n";
  for (const auto& p : report.per_seed)
    out << report.method << ',' << p.seed << ',' << p.accuracy << '\n';
  return out.str();
}

AblationReport run_ablation(const ExperimentConfig& base_cfg, Ablation ablation,
                            int window_override) {
  ExperimentConfig base = base_cfg;
  ExperimentConfig ablated = base_cfg;
  switch (ablation) {
    case Ablation::NoFilter:
      ablated.selftrain.confidence_filter_frac = 0.0;
      break;
    case Ablation::WindowOverride:
      if (window_override < 1)
        throw DataError("run_ablation: window_override must be >= 1");
      ablated.selftrain.window = window_override;
      break;
    case Ablation::NoReg:
      if (base.model.reg.kind != Regularization::Kind::PenaltyLambda)
        throw DataError("run_ablation: no_reg applies to the penalty path");
      // Both arms start from the same unregularized source model; the arms
      // differ in whether self-training keeps the penalty.
      ablated.model.reg.value = 0.0;
      break;
    case Ablation::SoftLabels:
      ablated.selftrain.label_mode = LabelMode::Soft;
      break;
  }

  AblationReport report;
  if (ablation == Ablation::NoReg) {
    // Shared unregularized source fit for both arms.
    auto run_arm = [&](const ExperimentConfig& cfg) {
      auto start = std::chrono::steady_clock::now();
      std::vector<double> accs;
      for (std::uint64_t seed : cfg.seeds) {
        DomainSequence seq = build_sequence(cfg.dataset, seed);
        LinearModel model = fit_source(seq, cfg, seed, 0.0);
        SelfTrainConfig st = cfg.selftrain;
        st.loss = cfg.model.loss;
        st.reg = cfg.model.reg;
        st.seed = mix_seed(seed, 0x535450);
        if (cfg.method == Method::GradualST) {
          auto [m, trace] = gradual_self_train(model, seq, st);
          model = m;
        } else if (cfg.method == Method::TargetST) {
          model = repeated_target_self_train(model, seq.target_unlabeled,
                                             default_rounds(seq, st.window), st);
        } else if (cfg.method == Method::AllST) {
          model = pooled_self_train(model, seq.intermediate_unlabeled,
                                    default_rounds(seq, st.window), st);
        }
        accs.push_back(1.0 - zero_one_error(model, empirical_distribution(seq.target_eval)));
      }
      double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return aggregate(cfg, accs, wall);
    };
    report.base = run_arm(base);
    report.ablated = run_arm(ablated);
  } else {
    report.base = run_experiment(base);
    report.ablated = run_experiment(ablated);
  }
  for (size_t i = 0; i < report.base.per_seed.size(); ++i)
    report.per_seed_delta.push_back(report.base.per_seed[i].accuracy -
                                    report.ablated.per_seed[i].accuracy);
  return report;
}

nlohmann::json ablation_report_to_json(const AblationReport& report) {
  return {{"result",
           {{"base", report_result_json(report.base)},
            {"ablated", report_result_json(report.ablated)},
            {"per_seed_delta", report.per_seed_delta}}},
          {"timing",
           {{"wall_clock_sec",
             report.base.wall_clock_sec + report.ablated.wall_clock_sec},
            {"timestamp", report.base.timestamp}}}};
}

}  // namespace gda
