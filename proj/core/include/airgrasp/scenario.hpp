#pragma once

#include "airgrasp/engine.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace airgrasp {

struct Waypoint {
  double t = 0.0;
  Vec3 p{Vec3::Zero()};
};

struct TrackingWindow {
  double t_on = 0.0;
  double t_off = 0.0;
};

struct OutputConfig {
  std::string csv = "trace.csv";
  std::string svg = "tracking.svg";
  std::string metrics = "metrics.json";
};

/// Full description of a run: model parameters, integration settings, the
/// waypoint schedule, tracking-enable windows and output file names.
struct ScenarioConfig {
  std::string name = "scenario";
  ModelParams model;
  SimConfig sim;
  std::vector<Waypoint> waypoints;
  std::vector<TrackingWindow> tracking_windows;
  Vec3 initial_uav{0.0, 0.0, -1.0};
  Vec3 arm_nominal{0.06, 0.0, 0.02};
  // Orientation angles as configured, kept verbatim so serialization is
  // idempotent (the matrices in `model` are derived from these on parse).
  Vec3 mount_rpy_deg{0.0, 90.0, 0.0};
  Vec3 attach_rpy_deg{0.0, 0.0, 0.0};
  double initial_aperture = -1.0;  // <0: open hold
  double grasp_aperture = 0.01;    // dock closing setpoint, m
  double gripper_slew = 0.05;      // m/s
  double grip_close_delay = 0.0;   // s after dock entry before closing starts
  double tracking_blend = 0.5;     // s, nominal <-> tracked blend time
  double uav_setpoint_rate = 1.0;  // m/s cap on the interpolated setpoint; 0 = unlimited
  OutputConfig output;
};

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " +
                           msg),
        line(l),
        column(c) {}
};

struct ValidationError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ValidationError(std::vector<std::string> list);
};

/// Parses the key-value scenario grammar (sections in brackets, one
/// `key = values...` per line, '#' comments). Unknown sections or keys are
/// rejected; omitted keys keep their documented defaults. Semantic problems
/// are collected exhaustively into a ValidationError.
ScenarioConfig parse_scenario(const std::string& text);

/// Canonical text form; parse(serialize(parse(text))) == parse(text).
std::string serialize_scenario(const ScenarioConfig& config);

/// Collects every semantic problem (empty when the config is sound).
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
/// Scenario text of a built-in preset (hover, fig3-mission, fig4-manipulator,
/// passivity-suite). Throws std::invalid_argument for unknown names.
std::string preset_text(const std::string& name);

/// Piecewise-linear waypoint interpolation with optional rate limiting, the
/// tracking gate with continuous blending, and the dock-phase gripper
/// closing ramp.
Setpoints generate_setpoints(const ScenarioConfig& config, double t, const SystemState& state,
                             double mission_entry_time);

/// Initial state implied by the scenario (level hover at the first waypoint,
/// arm at the nominal retraction, gripper open).
SystemState initial_state(const ScenarioConfig& config);

/// Convenience: engine + provider wired from the config.
SimTrace run_scenario(const ScenarioConfig& config);

struct PhaseMetrics {
  MissionPhase phase = MissionPhase::FreeFlight;
  double duration = 0.0;
  Vec3 uav_rms{Vec3::Zero()};
  Vec3 arm_rms{Vec3::Zero()};
};

struct SummaryMetrics {
  std::vector<PhaseMetrics> phases;
  double max_dock_deviation = 0.0;  // max |p_b - p_b*| while docked
  double contact_time = -1.0;
  double detach_time = -1.0;
  bool diverged = false;
  bool passivity_passed = false;
  int passivity_violations = 0;
  int flagged_steps = 0;
  double final_uav_error = 0.0;
  double final_arm_error = 0.0;
};

SummaryMetrics compute_metrics(const SimTrace& trace, const ModelParams& params);

}  // namespace airgrasp
