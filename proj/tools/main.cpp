// Scenario front end: parse a config (or a built-in preset), run the
// simulation, write the CSV trace, SVG plots and summary metrics.
//
// Exit codes: 0 success, 1 validation/parse error, 2 divergence,
// 3 passivity violation (with --strict-passivity).

#include "airgrasp/scenario.hpp"
#include "airgrasp/trace_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitPassivity = 3;

std::string load_scenario_text(const std::string& source) {
  if (airgrasp::is_preset(source)) return airgrasp::preset_text(source);
  std::ifstream f(source);
  if (!f) throw std::runtime_error("cannot open scenario file '" + source + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_phase_summary(const airgrasp::SummaryMetrics& m) {
  for (const auto& p : m.phases) {
    std::cout << "  " << airgrasp::mission_name(p.phase) << ": " << p.duration
              << " s, uav rms [m] = (" << p.uav_rms.x() << ", " << p.uav_rms.y() << ", "
              << p.uav_rms.z() << "), arm rms [m] = (" << p.arm_rms.x() << ", " << p.arm_rms.y()
              << ", " << p.arm_rms.z() << ")\n";
  }
  if (m.contact_time >= 0.0) std::cout << "  contact at t = " << m.contact_time << " s\n";
  if (m.detach_time >= 0.0) std::cout << "  detach at t = " << m.detach_time << " s\n";
  std::cout << "  max dock deviation = " << m.max_dock_deviation << " m\n";
  std::cout << "  passivity: " << (m.passivity_passed ? "ok" : "violated") << " ("
            << m.passivity_violations << " violations, " << m.flagged_steps
            << " flagged steps)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airgrasp - aerial grasping simulation and control"};
  app.require_subcommand(1);

  std::string source;
  std::string out_dir = "out";
  double dt_override = -1.0;
  double t_end_override = -1.0;
  bool strict_passivity = false;

  auto* run = app.add_subcommand("run", "simulate a scenario and write outputs");
  run->add_option("scenario", source, "scenario file or preset name")->required();
  run->add_option("--dt", dt_override, "override integration step [s]");
  run->add_option("--t-end", t_end_override, "override end time [s]");
  run->add_option("--out-dir", out_dir, "output directory (default: out)");
  run->add_flag("--strict-passivity", strict_passivity,
                "exit 3 when the passivity monitor reports violations");

  auto* validate = app.add_subcommand("validate", "parse and validate a scenario, run nothing");
  validate->add_option("scenario", source, "scenario file or preset name")->required();

  auto* presets = app.add_subcommand("presets", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      for (const auto& name : airgrasp::preset_names()) {
        std::cout << name << "\n";
      }
      return kExitOk;
    }

    airgrasp::ScenarioConfig config;
    try {
      config = airgrasp::parse_scenario(load_scenario_text(source));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    }

    if (validate->parsed()) {
      std::cout << "ok: scenario '" << config.name << "' is valid\n";
      return kExitOk;
    }

    if (dt_override > 0.0) config.sim.dt = dt_override;
    if (t_end_override > 0.0) config.sim.t_end = t_end_override;
    const auto issues = airgrasp::validate_scenario(config);
    if (!issues.empty()) {
      for (const auto& s : issues) std::cerr << "error: " << s << "\n";
      return kExitValidation;
    }

    const airgrasp::SimTrace trace = airgrasp::run_scenario(config);
    const auto files = airgrasp::emit_outputs(trace, config, out_dir);
    const auto metrics = airgrasp::compute_metrics(trace, config.model);

    std::cout << "scenario '" << config.name << "': " << trace.steps.size() << " steps, outputs:\n"
              << "  " << files.csv << "\n  " << files.svg << "\n  " << files.metrics << "\n";
    print_phase_summary(metrics);

    if (trace.diverged) {
      std::cerr << "error: " << trace.abort_reason << "\n";
      return kExitDivergence;
    }
    if (strict_passivity && !metrics.passivity_passed) {
      std::cerr << "error: passivity violated on " << metrics.passivity_violations << " steps\n";
      return kExitPassivity;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
