// teeplace: plan, simulate and compare privacy-aware placements of a layer
// chain across enclaves and untrusted accelerators.

#include <iostream>

#include "CLI11.hpp"
#include "teeplace/commands.hpp"

namespace {

using teeplace::OutputFormat;

void add_policy_flags(CLI::App* cmd, teeplace::PolicyFlags& flags) {
  cmd->add_option("--delta", flags.delta,
                  "Resolution threshold in pixels per axis")
      ->capture_default_str();
  cmd->add_option("--mode", flags.mode,
                  "c1: trusted devices only; c2: allow untrusted devices "
                  "on sub-threshold data")
      ->check(CLI::IsMember({"c1", "c2"}))
      ->capture_default_str();
  cmd->add_option("--crypto-ms", flags.crypto_ms,
                  "Decryption overhead charged to an enclave receiving data")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware partitioning of neural network layers across "
               "enclaves and accelerators"};
  app.require_subcommand(1);

  teeplace::ShapesOptions shapes;
  bool shapes_json = false, shapes_csv = false;
  auto* shapes_cmd = app.add_subcommand(
      "shapes", "Per-layer output shapes, sizes, resolutions and time share");
  shapes_cmd->add_option("profile", shapes.profile_path, "Profile JSON")
      ->required();
  shapes_cmd->add_option("--device", shapes.device,
                         "Device whose times give the cumulative fraction");
  shapes_cmd->add_option("--resources", shapes.resources_path,
                         "Resource JSON; its first trusted device is the "
                         "default reference");
  shapes_cmd->add_option("--delta", shapes.delta, "Resolution threshold")
      ->capture_default_str();
  auto* sj = shapes_cmd->add_flag("--json", shapes_json, "JSON output");
  shapes_cmd->add_flag("--csv", shapes_csv, "CSV output")->excludes(sj);

  teeplace::PlanOptions plan;
  bool plan_json = false, plan_csv = false;
  auto* plan_cmd =
      app.add_subcommand("plan", "Choose the fastest admissible placement");
  plan_cmd->add_option("profile", plan.profile_path, "Profile JSON")->required();
  plan_cmd->add_option("resources", plan.resources_path, "Resource JSON")
      ->required();
  plan_cmd->add_option("--n", plan.n, "Frames per chunk")->capture_default_str();
  plan_cmd->add_option("--tree", plan.tree_path, "Placement tree JSON");
  plan_cmd->add_option("--threads", plan.threads, "Evaluation threads")
      ->capture_default_str();
  add_policy_flags(plan_cmd, plan.policy);
  auto* pj = plan_cmd->add_flag("--json", plan_json, "JSON output");
  plan_cmd->add_flag("--csv", plan_csv, "CSV of all candidates")->excludes(pj);

  teeplace::SimulateOptions sim;
  bool sim_json = false;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Discrete-event simulation of a placement over a chunk");
  sim_cmd->add_option("profile", sim.profile_path, "Profile JSON")->required();
  sim_cmd->add_option("resources", sim.resources_path, "Resource JSON")
      ->required();
  sim_cmd->add_option("placement", sim.placement_path,
                      "Placement JSON (or the output of plan --json)")
      ->required();
  sim_cmd->add_option("--n", sim.n, "Frames per chunk");
  sim_cmd->add_option("--trace", sim.trace_path, "Write a per-event CSV trace");
  sim_cmd->add_flag("--allow-violating", sim.allow_violating,
                    "Simulate placements that break the privacy policy");
  add_policy_flags(sim_cmd, sim.policy);
  sim_cmd->add_flag("--json", sim_json, "JSON output");

  teeplace::ReportOptions report;
  bool report_json = false, report_csv = false;
  auto* report_cmd = app.add_subcommand(
      "report", "Compare partitioning strategies against a single enclave");
  report_cmd->add_option("profile", report.profile_path, "Profile JSON")
      ->required();
  report_cmd->add_option("resources", report.resources_path, "Resource JSON")
      ->required();
  report_cmd->add_option("--n", report.n, "Frames per chunk")
      ->capture_default_str();
  report_cmd->add_option("--tree", report.tree_path, "Placement tree JSON");
  add_policy_flags(report_cmd, report.policy);
  auto* rj = report_cmd->add_flag("--json", report_json, "JSON output");
  report_cmd->add_flag("--csv", report_csv, "CSV output")->excludes(rj);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : teeplace::kExitInvalid;
  }

  auto format = [](bool json, bool csv) {
    if (json) return OutputFormat::kJson;
    if (csv) return OutputFormat::kCsv;
    return OutputFormat::kText;
  };

  if (*shapes_cmd) {
    shapes.format = format(shapes_json, shapes_csv);
    return teeplace::cmd_shapes(shapes, std::cout, std::cerr);
  }
  if (*plan_cmd) {
    plan.format = format(plan_json, plan_csv);
    return teeplace::cmd_plan(plan, std::cout, std::cerr);
  }
  if (*sim_cmd) {
    sim.format = format(sim_json, false);
    return teeplace::cmd_simulate(sim, std::cout, std::cerr);
  }
  report.format = format(report_json, report_csv);
  return teeplace::cmd_report(report, std::cout, std::cerr);
}
