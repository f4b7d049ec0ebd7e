#include <iostream>

#include "CLI11.hpp"
#include "gda/experiment.hpp"
#include "gda/io.hpp"
#include "gda/theory.hpp"
#include "gda/wasserstein.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& csv_path) {
  auto cfg = gda::experiment_config_from_json(gda::load_json_file(config_path));
  auto report = gda::run_experiment(cfg);
  gda::write_json_file(out_path, gda::report_to_json(report));
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << gda::report_csv_summary(report);
  }
  std::cout << report.method << ": mean accuracy " << report.mean;
  if (report.ci90_halfwidth >= 0) std::cout << " +- " << report.ci90_halfwidth << " (90% CI)";
  std::cout << " over " << report.per_seed.size() << " seeds\n";
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& ablation_name,
               int window_override, const std::string& out_path) {
  auto cfg = gda::experiment_config_from_json(gda::load_json_file(config_path));
  auto ablation = gda::ablation_from_string(ablation_name);
  auto report = gda::run_ablation(cfg, ablation, window_override);
  gda::write_json_file(out_path, gda::ablation_report_to_json(report));
  std::cout << "base " << report.base.mean << " vs " << ablation_name << " "
            << report.ablated.mean << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite_name, const std::string& out_path) {
  auto which = gda::suite_from_string(suite_name);
  auto results = gda::run_suite(which);
  nlohmann::json out = nlohmann::json::array();
  size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.claim_id.size());
  bool any_fail = false, any_inconclusive = false;
  for (const auto& r : results) {
    out.push_back(gda::to_json(r));
    std::cout << r.claim_id << std::string(width - r.claim_id.size() + 2, ' ')
              << to_string(r.verdict) << "\n";
    any_fail |= r.verdict == gda::Verdict::Fail;
    any_inconclusive |= r.verdict == gda::Verdict::Inconclusive;
  }
  if (!out_path.empty()) gda::write_json_file(out_path, out);
  if (any_fail) return kExitVerifyFail;
  if (any_inconclusive) return kExitInconclusive;
  return kExitOk;
}

int cmd_wdist(const std::string& p_path, const std::string& q_path, bool conditional) {
  auto P = gda::read_csv_distribution(p_path);
  auto Q = gda::read_csv_distribution(q_path);
  nlohmann::json out;
  out["n_atoms_p"] = P.size();
  out["n_atoms_q"] = Q.size();
  if (conditional) {
    if (!gda::csv_is_labeled(p_path) || !gda::csv_is_labeled(q_path))
      throw std::invalid_argument("--conditional requires labeled files");
    out["winf_pos"] = gda::winf_discrete(P.conditional(1), Q.conditional(1));
    out["winf_neg"] = gda::winf_discrete(P.conditional(-1), Q.conditional(-1));
    out["rho"] = std::max(out["winf_pos"].get<double>(), out["winf_neg"].get<double>());
  } else {
    out["winf"] = gda::winf_discrete(P, Q);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir) {
  auto spec = gda::load_json_file(spec_path);
  nlohmann::json wrapped = {{"dataset", spec},
                            {"seeds", nlohmann::json::array({spec.value("seed", 0)})}};
  auto cfg = gda::experiment_config_from_json(wrapped);
  std::uint64_t seed = spec.value("seed", std::uint64_t{0});
  gda::DomainSequence seq;
  switch (cfg.dataset.kind) {
    case gda::DatasetConfig::Kind::GaussianDrift: {
      auto drift = cfg.dataset.drift;
      drift.seed = seed;
      seq = gda::gen_gaussian_drift(drift);
      break;
    }
    case gda::DatasetConfig::Kind::Mixing: {
      auto drift = cfg.dataset.drift;
      drift.seed = seed;
      auto [source, target] = gda::drift_endpoints(drift);
      seq = gda::gen_mixing_interpolation(source, target, cfg.dataset.mixing_n_domains,
                                          cfg.dataset.mixing_n_per_domain, drift.n_labeled,
                                          drift.n_target_eval, seed);
      break;
    }
    case gda::DatasetConfig::Kind::Rotation:
      seq = gda::gen_rotation_drift(cfg.dataset.rotation_n_points,
                                    cfg.dataset.rotation_n_domains,
                                    cfg.dataset.rotation_total_angle_deg,
                                    cfg.dataset.rotation_radius_band, seed);
      break;
    case gda::DatasetConfig::Kind::Import:
      throw gda::DataError("gen: dataset kind 'import' cannot be generated");
  }
  gda::export_sequence(seq, out_dir);
  std::cout << "wrote " << out_dir << " (" << seq.intermediate_unlabeled.size()
            << " intermediate domains)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradual self-training for domain adaptation"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_path, "report JSON output path")->required();
  run->add_option("--csv", csv_path, "optional CSV summary path");

  std::string ablation_name;
  int window_override = 0;
  auto* ablate = app.add_subcommand("ablate", "run a paired base/ablated experiment");
  ablate->add_option("--config", config_path, "experiment config JSON")->required();
  ablate->add_option("--ablation", ablation_name,
                     "no_filter | window_override | no_reg | soft_labels")
      ->required();
  ablate->add_option("--window", window_override, "window for window_override");
  ablate->add_option("--out", out_path, "report JSON output path")->required();

  std::string suite_name = "all";
  auto* verify = app.add_subcommand("verify", "run the theory verification suite");
  verify->add_option("--suite", suite_name, "margin | gaussian | all");
  verify->add_option("--out", out_path, "suite report JSON path");

  std::string p_path, q_path;
  bool conditional = false;
  auto* wdist = app.add_subcommand("wdist", "W-infinity between two CSV point clouds");
  wdist->add_option("--p", p_path, "first CSV")->required();
  wdist->add_option("--q", q_path, "second CSV")->required();
  wdist->add_flag("--conditional", conditional, "class-conditional distance");

  std::string spec_path, out_dir;
  auto* gen = app.add_subcommand("gen", "generate a domain sequence to a directory");
  gen->add_option("--spec", spec_path, "dataset spec JSON")->required();
  gen->add_option("--out-dir", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, out_path, csv_path);
    if (ablate->parsed()) return cmd_ablate(config_path, ablation_name, window_override, out_path);
    if (verify->parsed()) return cmd_verify(suite_name, out_path);
    if (wdist->parsed()) return cmd_wdist(p_path, q_path, conditional);
    if (gen->parsed()) return cmd_gen(spec_path, out_dir);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const gda::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const gda::PrecisionError& e) {
    std::cerr << "precision error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitUsage;
}
