#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "optwin/json_io.hpp"
#include "optwin/log.hpp"
#include "optwin/orchestrator.hpp"
#include "optwin/report.hpp"
#include "optwin/scenario.hpp"

namespace fs = std::filesystem;
using namespace optwin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDeadline = 2;
constexpr int kExitInfeasible = 3;

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double fuel_hours = 0.0;
  bool fuel_set = false;
  bool svg = false;
};

Scenario load_scenario(const CommonArgs& args) {
  Scenario s = validate_scenario(read_text_file(args.scenario_path));
  if (args.fuel_set) {
    s.disaster.fuel_hours = args.fuel_hours;
    s.disaster.fuel_override = true;
    for (auto& dc : s.data_centers) {
      if (dc.site == s.disaster.affected_site && dc.power_state == PowerState::Generator) {
        dc.fuel_hours_remaining = args.fuel_hours;
      }
    }
  }
  return s;
}

std::uint64_t effective_seed(const CommonArgs& args, const Scenario& s) {
  return args.seed_set ? args.seed : s.seed;
}

int exit_code_for(const orchestrator::RecoveryReport& r) {
  switch (r.outcome) {
    case orchestrator::Outcome::Succeeded: return kExitOk;
    case orchestrator::Outcome::DeadlineExceeded: return kExitDeadline;
    case orchestrator::Outcome::Infeasible: return kExitInfeasible;
  }
  return kExitUsage;
}

void require_artifact(const std::string& out_dir, const std::string& name) {
  if (!fs::exists(fs::path(out_dir) / name)) {
    raise(ErrorKind::Io, "missing prerequisite artifact " + name + " in " + out_dir +
                             " (run the earlier workflow stages first)");
  }
}

void write_state(const orchestrator::Workflow& wf, const std::string& out_dir) {
  write_text_file(out_dir + "/state.json", wf.save_state());
}

// audit.jsonl is the externally visible append-only view of the control
// plane's accepted mutations; the same log also lives inside state.json.
void write_audit(const orchestrator::Workflow& wf, const std::string& out_dir) {
  nlohmann::json j = nlohmann::json::parse(wf.save_state());
  std::string out;
  for (const auto& line : j.at("audit_log")) out += line.get<std::string>() + "\n";
  write_text_file(out_dir + "/audit.jsonl", out);
}

std::unique_ptr<orchestrator::Workflow> load_workflow(const Scenario& s,
                                                      const CommonArgs& args) {
  require_artifact(args.out_dir, "state.json");
  std::string state = read_text_file(args.out_dir + "/state.json");
  return orchestrator::Workflow::load_state(s, orchestrator::RecoveryOptions{}, state);
}

int finish_stage(orchestrator::Workflow& wf, const CommonArgs& args, bool stage_ok,
                 const std::vector<std::pair<std::string, std::string>>& artifacts) {
  fs::create_directories(args.out_dir);
  write_state(wf, args.out_dir);
  write_audit(wf, args.out_dir);
  for (const auto& [name, text] : artifacts) {
    write_text_file(args.out_dir + "/" + name, text);
  }
  orchestrator::RecoveryReport r = wf.report();
  if (!stage_ok) {
    std::cerr << "workflow stopped (" << orchestrator::outcome_name(r.outcome)
              << ") at step " << r.failing_step << ": " << r.failure_detail << "\n";
    return exit_code_for(r);
  }
  return kExitOk;
}

int cmd_run(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  std::uint64_t seed = effective_seed(args, s);
  orchestrator::Workflow wf(s, seed, orchestrator::RecoveryOptions{});
  bool ok = wf.stage_characterize();
  ok = ok && wf.stage_calibrate();
  ok = ok && wf.stage_optimize();
  ok = ok && wf.stage_provision();
  ok = ok && wf.stage_migrate();

  orchestrator::RecoveryReport r = wf.report();
  fs::create_directories(args.out_dir);
  write_state(wf, args.out_dir);
  write_audit(wf, args.out_dir);
  std::vector<std::pair<std::string, std::string>> artifacts;
  artifacts.push_back({"trx_estimates.json", report::trx_estimates_to_json(r)});
  if (r.link_estimate) {
    artifacts.push_back({"link_estimate.json", report::link_estimate_to_json(r)});
  }
  if (r.ols_estimate) {
    artifacts.push_back({"ols_estimate.json", report::ols_estimate_to_json(r)});
  }
  nlohmann::json state = nlohmann::json::parse(wf.save_state());
  if (state.contains("optimization")) {
    artifacts.push_back({"optimized_config.json", canonical_dump(state.at("optimization"))});
  }
  if (!r.lightpaths.empty()) {
    artifacts.push_back({"lightpaths.json", report::lightpaths_to_json(r)});
  }
  for (const auto& [name, text] : artifacts) {
    write_text_file(args.out_dir + "/" + name, text);
  }
  write_text_file(args.out_dir + "/report.json", report::report_to_json(r));
  report::emit_figures(r, args.out_dir, args.svg);

  std::cout << "outcome: " << orchestrator::outcome_name(r.outcome)
            << ", total " << format_number(r.total_duration_min) << " min ("
            << format_number(r.total_duration_min / 60.0) << " h)\n";
  if (r.outcome != orchestrator::Outcome::Succeeded) {
    std::cerr << "failed at step " << r.failing_step << ": " << r.failure_detail << "\n";
  }
  return exit_code_for(r);
}

int cmd_characterize(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  orchestrator::Workflow wf(s, effective_seed(args, s), orchestrator::RecoveryOptions{});
  bool ok = wf.stage_characterize();
  orchestrator::RecoveryReport r = wf.report();
  std::vector<std::pair<std::string, std::string>> artifacts;
  artifacts.push_back({"trx_estimates.json", report::trx_estimates_to_json(r)});
  if (r.link_estimate) {
    artifacts.push_back({"link_estimate.json", report::link_estimate_to_json(r)});
  }
  return finish_stage(wf, args, ok, artifacts);
}

int cmd_calibrate(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  require_artifact(args.out_dir, "link_estimate.json");
  auto wf = load_workflow(s, args);
  bool ok = wf->stage_calibrate();
  orchestrator::RecoveryReport r = wf->report();
  std::vector<std::pair<std::string, std::string>> artifacts;
  if (r.ols_estimate) {
    artifacts.push_back({"ols_estimate.json", report::ols_estimate_to_json(r)});
  }
  return finish_stage(*wf, args, ok, artifacts);
}

int cmd_optimize(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  require_artifact(args.out_dir, "ols_estimate.json");
  auto wf = load_workflow(s, args);
  bool ok = wf->stage_optimize();
  orchestrator::RecoveryReport r = wf->report();
  std::vector<std::pair<std::string, std::string>> artifacts;
  nlohmann::json state = nlohmann::json::parse(wf->save_state());
  if (state.contains("optimization")) {
    artifacts.push_back({"optimized_config.json", canonical_dump(state.at("optimization"))});
  }
  return finish_stage(*wf, args, ok, artifacts);
}

int cmd_provision(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  require_artifact(args.out_dir, "optimized_config.json");
  auto wf = load_workflow(s, args);
  bool ok = wf->stage_provision();
  orchestrator::RecoveryReport r = wf->report();
  std::vector<std::pair<std::string, std::string>> artifacts;
  if (!r.lightpaths.empty()) {
    artifacts.push_back({"lightpaths.json", report::lightpaths_to_json(r)});
  }
  return finish_stage(*wf, args, ok, artifacts);
}

int cmd_migrate(const CommonArgs& args) {
  Scenario s = load_scenario(args);
  require_artifact(args.out_dir, "lightpaths.json");
  auto wf = load_workflow(s, args);
  bool ok = wf->stage_migrate();
  orchestrator::RecoveryReport r = wf->report();
  write_text_file(args.out_dir + "/report.json", report::report_to_json(r));
  report::emit_figures(r, args.out_dir, args.svg);
  int code = finish_stage(*wf, args, ok, {});
  if (code == kExitOk) {
    std::cout << "outcome: " << orchestrator::outcome_name(r.outcome) << ", total "
              << format_number(r.total_duration_min) << " min\n";
  }
  return code;
}

int cmd_report(const CommonArgs& args) {
  require_artifact(args.out_dir, "report.json");
  std::string text = read_text_file(args.out_dir + "/report.json");
  int warnings = report::emit_figures_from_text(text, args.out_dir, args.svg);
  std::cout << "figures written to " << args.out_dir << " (" << warnings
            << " warnings)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optical line digital twin and disaster-recovery workflow runner"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd, bool need_scenario) {
    if (need_scenario) {
      cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")
          ->required();
    }
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "seed override")
        ->check(CLI::NonNegativeNumber)
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--fuel-hours", args.fuel_hours, "fuel budget override in hours")
        ->each([&](const std::string&) { args.fuel_set = true; });
    cmd->add_flag("--svg", args.svg, "also emit SVG plots");
  };

  CLI::App* run = app.add_subcommand("run", "run the full recovery workflow");
  CLI::App* characterize =
      app.add_subcommand("characterize", "transceiver + DLM characterization");
  CLI::App* calibrate = app.add_subcommand("calibrate", "line system calibration");
  CLI::App* optimize = app.add_subcommand("optimize", "launch/gain optimization");
  CLI::App* provision = app.add_subcommand("provision", "design and provision lightpaths");
  CLI::App* migrate = app.add_subcommand("migrate", "migrate the dataset and close out");
  CLI::App* report_cmd = app.add_subcommand("report", "re-emit figures from report.json");
  for (CLI::App* cmd : {run, characterize, calibrate, optimize, provision, migrate}) {
    add_common(cmd, true);
  }
  add_common(report_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(args);
    if (characterize->parsed()) return cmd_characterize(args);
    if (calibrate->parsed()) return cmd_calibrate(args);
    if (optimize->parsed()) return cmd_optimize(args);
    if (provision->parsed()) return cmd_provision(args);
    if (migrate->parsed()) return cmd_migrate(args);
    if (report_cmd->parsed()) return cmd_report(args);
  } catch (const Error& e) {
    std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
