#include "airgrasp/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace airgrasp {

ValidationError::ValidationError(std::vector<std::string> list)
    : std::runtime_error([&list] {
        std::string msg = "invalid scenario:";
        for (const auto& s : list) msg += "\n  - " + s;
        return msg;
      }()),
      issues(std::move(list)) {}

namespace {

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

struct KeyLine {
  int line;
  int column;
  std::string section;
  std::string key;
  std::string raw_value;
  std::vector<std::string> tokens;
  bool consumed = false;
};

double to_double(const KeyLine& kl, const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == nullptr || *end != '\0') {
    throw ParseError(kl.line, kl.column, "expected a number for '" + kl.key + "', got '" + tok + "'");
  }
  return v;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ParseError(lineno, 1, "unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        if (section.empty()) throw ParseError(lineno, 1, "empty section name");
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos) {
        throw ParseError(lineno, 1, "expected 'key = value', got '" + t + "'");
      }
      KeyLine kl;
      kl.line = lineno;
      kl.column = static_cast<int>(line.find_first_not_of(" \t")) + 1;
      kl.section = section;
      kl.key = trim(t.substr(0, eq));
      kl.raw_value = trim(t.substr(eq + 1));
      if (kl.key.empty()) throw ParseError(lineno, kl.column, "empty key");
      std::istringstream vs(kl.raw_value);
      std::string tok;
      while (vs >> tok) kl.tokens.push_back(tok);
      lines_.push_back(std::move(kl));
    }
  }

  // Single-valued lookups; repeated scalar keys are rejected.
  template <typename F>
  void scalar(const std::string& section, const std::string& key, F&& apply) {
    KeyLine* found = nullptr;
    for (auto& kl : lines_) {
      if (kl.section == section && kl.key == key) {
        if (found != nullptr) {
          throw ParseError(kl.line, kl.column, "duplicate key '" + key + "'");
        }
        found = &kl;
      }
    }
    if (found != nullptr) {
      found->consumed = true;
      apply(*found);
    }
  }

  template <typename F>
  void repeated(const std::string& section, const std::string& key, F&& apply) {
    for (auto& kl : lines_) {
      if (kl.section == section && kl.key == key) {
        kl.consumed = true;
        apply(kl);
      }
    }
  }

  void reject_unknown() const {
    for (const auto& kl : lines_) {
      if (!kl.consumed) {
        const std::string where = kl.section.empty() ? "top level" : "[" + kl.section + "]";
        throw ParseError(kl.line, kl.column,
                         "unknown key '" + kl.key + "' in " + where);
      }
    }
  }

 private:
  std::vector<KeyLine> lines_;
};

double one_number(const KeyLine& kl) {
  if (kl.tokens.size() != 1) {
    throw ParseError(kl.line, kl.column, "'" + kl.key + "' expects one number");
  }
  return to_double(kl, kl.tokens[0]);
}

Vec3 three_numbers(const KeyLine& kl) {
  if (kl.tokens.size() != 3) {
    throw ParseError(kl.line, kl.column, "'" + kl.key + "' expects three numbers");
  }
  return {to_double(kl, kl.tokens[0]), to_double(kl, kl.tokens[1]), to_double(kl, kl.tokens[2])};
}

bool to_bool(const KeyLine& kl) {
  if (kl.tokens.size() == 1) {
    if (kl.tokens[0] == "true") return true;
    if (kl.tokens[0] == "false") return false;
  }
  throw ParseError(kl.line, kl.column, "'" + kl.key + "' expects true or false");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  ConfigReader rd(text);
  ScenarioConfig c;

  rd.scalar("", "name", [&](const KeyLine& kl) { c.name = kl.raw_value; });

  rd.scalar("sim", "dt", [&](const KeyLine& kl) { c.sim.dt = one_number(kl); });
  rd.scalar("sim", "t_end", [&](const KeyLine& kl) { c.sim.t_end = one_number(kl); });
  rd.scalar("sim", "integrator", [&](const KeyLine& kl) {
    if (kl.raw_value == "rk4") {
      c.sim.integrator = IntegratorKind::RK4;
    } else if (kl.raw_value == "semi_implicit_euler") {
      c.sim.integrator = IntegratorKind::SemiImplicitEuler;
    } else {
      throw ParseError(kl.line, kl.column, "integrator must be rk4 or semi_implicit_euler");
    }
  });
  rd.scalar("sim", "seed", [&](const KeyLine& kl) {
    c.sim.seed = static_cast<std::uint64_t>(one_number(kl));
  });
  rd.scalar("sim", "clamp_thrust", [&](const KeyLine& kl) { c.sim.clamp_thrust = to_bool(kl); });
  rd.scalar("sim", "thrust_min", [&](const KeyLine& kl) { c.sim.thrust_min = one_number(kl); });
  rd.scalar("sim", "thrust_max", [&](const KeyLine& kl) { c.sim.thrust_max = one_number(kl); });
  rd.scalar("sim", "divergence_limit",
            [&](const KeyLine& kl) { c.sim.divergence_limit = one_number(kl); });
  rd.scalar("sim", "yaw_ref_deg",
            [&](const KeyLine& kl) { c.sim.yaw_ref = one_number(kl) * kDegToRad; });

  auto& m = c.model;
  rd.scalar("uav", "mass", [&](const KeyLine& kl) { m.uav.mass = one_number(kl); });
  rd.scalar("uav", "inertia", [&](const KeyLine& kl) {
    m.uav.inertia = three_numbers(kl).asDiagonal();
  });
  rd.scalar("uav", "arm_length", [&](const KeyLine& kl) { m.uav.arm_length = one_number(kl); });
  rd.scalar("uav", "torque_thrust_ratio",
            [&](const KeyLine& kl) { m.uav.torque_thrust_ratio = one_number(kl); });
  rd.scalar("uav", "gyro_model", [&](const KeyLine& kl) {
    if (kl.raw_value == "zero") {
      m.uav.gyro_model = GyroModel::Zero;
    } else if (kl.raw_value == "rotor_momentum") {
      m.uav.gyro_model = GyroModel::RotorMomentum;
    } else {
      throw ParseError(kl.line, kl.column, "gyro_model must be zero or rotor_momentum");
    }
  });
  rd.scalar("uav", "rotor_inertia",
            [&](const KeyLine& kl) { m.uav.rotor_inertia = one_number(kl); });
  rd.scalar("uav", "thrust_coefficient",
            [&](const KeyLine& kl) { m.uav.thrust_coefficient = one_number(kl); });

  rd.scalar("manipulator", "mass", [&](const KeyLine& kl) { m.manip.mass = one_number(kl); });
  rd.scalar("manipulator", "mount_position",
            [&](const KeyLine& kl) { m.manip.mount_pose.position = three_numbers(kl); });
  rd.scalar("manipulator", "mount_rpy_deg", [&](const KeyLine& kl) {
    c.mount_rpy_deg = three_numbers(kl);
    const Vec3 rpy = c.mount_rpy_deg * kDegToRad;
    m.manip.mount_pose.orientation = rotation_from_rpy(rpy.x(), rpy.y(), rpy.z());
  });
  rd.scalar("manipulator", "workspace_min",
            [&](const KeyLine& kl) { m.manip.workspace.min = three_numbers(kl); });
  rd.scalar("manipulator", "workspace_max",
            [&](const KeyLine& kl) { m.manip.workspace.max = three_numbers(kl); });

  rd.scalar("gripper", "phalange_mass",
            [&](const KeyLine& kl) { m.gripper.phalange_mass = one_number(kl); });
  rd.scalar("gripper", "aperture_min",
            [&](const KeyLine& kl) { m.gripper.aperture_min = one_number(kl); });
  rd.scalar("gripper", "aperture_max",
            [&](const KeyLine& kl) { m.gripper.aperture_max = one_number(kl); });
  rd.scalar("gripper", "open_hold", [&](const KeyLine& kl) { m.gripper.open_hold = one_number(kl); });
  rd.scalar("gripper", "closed_hold",
            [&](const KeyLine& kl) { m.gripper.closed_hold = one_number(kl); });
  rd.scalar("gripper", "cg_offset",
            [&](const KeyLine& kl) { m.gripper.cg_offset = three_numbers(kl); });

  rd.scalar("gripper.geometry", "palm_offset",
            [&](const KeyLine& kl) { m.geometry.palm_offset = one_number(kl); });
  rd.scalar("gripper.geometry", "finger_stations", [&](const KeyLine& kl) {
    if (kl.tokens.size() != 2) {
      throw ParseError(kl.line, kl.column, "'finger_stations' expects two numbers");
    }
    m.geometry.finger_stations = {to_double(kl, kl.tokens[0]), to_double(kl, kl.tokens[1])};
  });
  rd.scalar("gripper.geometry", "finger_angles_deg", [&](const KeyLine& kl) {
    const Vec3 a = three_numbers(kl) * kDegToRad;
    m.geometry.finger_angles_rad = {a.x(), a.y(), a.z()};
  });

  rd.scalar("object", "mass", [&](const KeyLine& kl) { m.object.mass = one_number(kl); });
  rd.scalar("object", "half_width",
            [&](const KeyLine& kl) { m.object.half_width = one_number(kl); });
  rd.scalar("object", "depth", [&](const KeyLine& kl) { m.object.depth = one_number(kl); });
  rd.scalar("object", "attach_position",
            [&](const KeyLine& kl) { m.object.attach_pose.position = three_numbers(kl); });
  rd.scalar("object", "attach_rpy_deg", [&](const KeyLine& kl) {
    c.attach_rpy_deg = three_numbers(kl);
    const Vec3 rpy = c.attach_rpy_deg * kDegToRad;
    m.object.attach_pose.orientation = rotation_from_rpy(rpy.x(), rpy.y(), rpy.z());
  });
  rd.scalar("object", "cg_offset",
            [&](const KeyLine& kl) { m.object.cg_offset = three_numbers(kl); });

  rd.scalar("contact", "stiffness",
            [&](const KeyLine& kl) { m.contact.stiffness = one_number(kl); });
  rd.scalar("contact", "hertz_exponent",
            [&](const KeyLine& kl) { m.contact.hertz_exponent = one_number(kl); });
  rd.scalar("contact", "damping", [&](const KeyLine& kl) { m.contact.damping = one_number(kl); });
  rd.scalar("contact", "friction", [&](const KeyLine& kl) { m.contact.friction = one_number(kl); });
  rd.scalar("contact", "v_reg", [&](const KeyLine& kl) { m.contact.v_reg = one_number(kl); });

  rd.scalar("gains.uav", "stiffness",
            [&](const KeyLine& kl) { m.uav_gains.stiffness = three_numbers(kl); });
  rd.scalar("gains.uav", "damping",
            [&](const KeyLine& kl) { m.uav_gains.damping = three_numbers(kl); });
  rd.scalar("gains.manipulator", "stiffness",
            [&](const KeyLine& kl) { m.manip_gains.stiffness = three_numbers(kl); });
  rd.scalar("gains.manipulator", "damping",
            [&](const KeyLine& kl) { m.manip_gains.damping = three_numbers(kl); });
  rd.scalar("gains.gripper", "stiffness",
            [&](const KeyLine& kl) { m.gripper_gains.stiffness = one_number(kl); });
  rd.scalar("gains.gripper", "damping",
            [&](const KeyLine& kl) { m.gripper_gains.damping = one_number(kl); });
  rd.scalar("gains.attitude", "kr", [&](const KeyLine& kl) { m.attitude_gains.kr = one_number(kl); });
  rd.scalar("gains.attitude", "kw", [&](const KeyLine& kl) { m.attitude_gains.kw = one_number(kl); });

  rd.scalar("mission", "breakaway_force",
            [&](const KeyLine& kl) { m.breakaway_force = one_number(kl); });
  rd.scalar("mission", "grasp_secure_threshold",
            [&](const KeyLine& kl) { m.grasp_secure_threshold = one_number(kl); });
  rd.scalar("mission", "grasp_secure_dwell",
            [&](const KeyLine& kl) { m.grasp_secure_dwell = one_number(kl); });
  rd.scalar("mission", "press_depth",
            [&](const KeyLine& kl) { m.press_depth = one_number(kl); });
  rd.scalar("mission", "grasp_aperture",
            [&](const KeyLine& kl) { c.grasp_aperture = one_number(kl); });
  rd.scalar("mission", "gripper_slew",
            [&](const KeyLine& kl) { c.gripper_slew = one_number(kl); });
  rd.scalar("mission", "grip_close_delay",
            [&](const KeyLine& kl) { c.grip_close_delay = one_number(kl); });
  rd.scalar("mission", "tracking_blend",
            [&](const KeyLine& kl) { c.tracking_blend = one_number(kl); });

  rd.scalar("setpoints", "initial_uav",
            [&](const KeyLine& kl) { c.initial_uav = three_numbers(kl); });
  rd.scalar("setpoints", "arm_nominal",
            [&](const KeyLine& kl) { c.arm_nominal = three_numbers(kl); });
  rd.scalar("setpoints", "initial_aperture",
            [&](const KeyLine& kl) { c.initial_aperture = one_number(kl); });
  rd.scalar("setpoints", "uav_setpoint_rate",
            [&](const KeyLine& kl) { c.uav_setpoint_rate = one_number(kl); });
  rd.repeated("setpoints", "waypoint", [&](const KeyLine& kl) {
    if (kl.tokens.size() != 4) {
      throw ParseError(kl.line, kl.column, "'waypoint' expects: time x y z");
    }
    Waypoint wp;
    wp.t = to_double(kl, kl.tokens[0]);
    wp.p = {to_double(kl, kl.tokens[1]), to_double(kl, kl.tokens[2]), to_double(kl, kl.tokens[3])};
    c.waypoints.push_back(wp);
  });
  rd.repeated("setpoints", "tracking_window", [&](const KeyLine& kl) {
    if (kl.tokens.size() != 2) {
      throw ParseError(kl.line, kl.column, "'tracking_window' expects: t_on t_off");
    }
    c.tracking_windows.push_back({to_double(kl, kl.tokens[0]), to_double(kl, kl.tokens[1])});
  });

  rd.scalar("output", "csv", [&](const KeyLine& kl) { c.output.csv = kl.raw_value; });
  rd.scalar("output", "svg", [&](const KeyLine& kl) { c.output.svg = kl.raw_value; });
  rd.scalar("output", "metrics", [&](const KeyLine& kl) { c.output.metrics = kl.raw_value; });

  rd.reject_unknown();

  auto issues = validate_scenario(c);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> out;
  const auto& m = c.model;
  if (!c.sim.valid()) out.push_back("[sim] dt must be positive and t_end > dt");
  if (!m.uav.valid()) out.push_back("[uav] needs positive mass, arm_length, torque_thrust_ratio and an SPD inertia");
  if (!m.manip.valid()) out.push_back("[manipulator] mass must be positive");
  if ((m.manip.workspace.min.array() >= m.manip.workspace.max.array()).any()) {
    out.push_back("[manipulator] workspace_min must be below workspace_max componentwise");
  }
  if (!m.gripper.valid()) out.push_back("[gripper] needs positive phalange_mass and aperture_min < aperture_max");
  if (!m.object.valid()) out.push_back("[object] needs mass >= 0 and positive half_width/depth");
  if (!m.contact.valid()) out.push_back("[contact] needs k > 0, n >= 1, damping >= 0, friction >= 0, v_reg > 0");
  if (!m.uav_gains.valid()) out.push_back("[gains.uav] stiffness and damping must be positive");
  if (!m.manip_gains.valid()) out.push_back("[gains.manipulator] stiffness and damping must be positive");
  if (!m.gripper_gains.valid()) out.push_back("[gains.gripper] stiffness and damping must be positive");
  if (m.breakaway_force <= 0.0) out.push_back("[mission] breakaway_force must be positive");
  if (c.grasp_aperture < m.gripper.aperture_min || c.grasp_aperture > m.gripper.aperture_max) {
    out.push_back("[mission] grasp_aperture outside the aperture range");
  }
  for (std::size_t i = 0; i + 1 < c.waypoints.size(); ++i) {
    if (c.waypoints[i + 1].t <= c.waypoints[i].t) {
      out.push_back("[setpoints] waypoint times must be strictly increasing: t=" +
                    fmt(c.waypoints[i].t) + " followed by t=" + fmt(c.waypoints[i + 1].t));
    }
  }
  for (const auto& w : c.tracking_windows) {
    if (w.t_on >= w.t_off) {
      out.push_back("[setpoints] tracking_window must have t_on < t_off (got " + fmt(w.t_on) +
                    " " + fmt(w.t_off) + ")");
    }
    if (w.t_on < 0.0 || w.t_off > c.sim.t_end) {
      out.push_back("[setpoints] tracking_window [" + fmt(w.t_on) + ", " + fmt(w.t_off) +
                    "] outside [0, t_end]");
    }
  }
  if (!c.waypoints.empty() && c.waypoints.back().t > c.sim.t_end) {
    out.push_back("[setpoints] last waypoint after t_end");
  }
  return out;
}

std::string serialize_scenario(const ScenarioConfig& c) {
  const auto& m = c.model;
  std::ostringstream o;
  o << "name = " << c.name << "\n\n";
  o << "[sim]\n";
  o << "dt = " << fmt(c.sim.dt) << "\n";
  o << "t_end = " << fmt(c.sim.t_end) << "\n";
  o << "integrator = "
    << (c.sim.integrator == IntegratorKind::RK4 ? "rk4" : "semi_implicit_euler") << "\n";
  o << "seed = " << c.sim.seed << "\n";
  o << "clamp_thrust = " << (c.sim.clamp_thrust ? "true" : "false") << "\n";
  o << "thrust_min = " << fmt(c.sim.thrust_min) << "\n";
  o << "thrust_max = " << fmt(c.sim.thrust_max) << "\n";
  o << "divergence_limit = " << fmt(c.sim.divergence_limit) << "\n";
  o << "yaw_ref_deg = " << fmt(c.sim.yaw_ref * kRadToDeg) << "\n\n";

  o << "[uav]\n";
  o << "mass = " << fmt(m.uav.mass) << "\n";
  o << "inertia = " << fmt3(m.uav.inertia.diagonal()) << "\n";
  o << "arm_length = " << fmt(m.uav.arm_length) << "\n";
  o << "torque_thrust_ratio = " << fmt(m.uav.torque_thrust_ratio) << "\n";
  o << "gyro_model = " << (m.uav.gyro_model == GyroModel::Zero ? "zero" : "rotor_momentum")
    << "\n";
  o << "rotor_inertia = " << fmt(m.uav.rotor_inertia) << "\n";
  o << "thrust_coefficient = " << fmt(m.uav.thrust_coefficient) << "\n\n";

  o << "[manipulator]\n";
  o << "mass = " << fmt(m.manip.mass) << "\n";
  o << "mount_position = " << fmt3(m.manip.mount_pose.position) << "\n";
  o << "mount_rpy_deg = " << fmt3(c.mount_rpy_deg) << "\n";
  o << "workspace_min = " << fmt3(m.manip.workspace.min) << "\n";
  o << "workspace_max = " << fmt3(m.manip.workspace.max) << "\n\n";

  o << "[gripper]\n";
  o << "phalange_mass = " << fmt(m.gripper.phalange_mass) << "\n";
  o << "aperture_min = " << fmt(m.gripper.aperture_min) << "\n";
  o << "aperture_max = " << fmt(m.gripper.aperture_max) << "\n";
  o << "open_hold = " << fmt(m.gripper.open_hold) << "\n";
  o << "closed_hold = " << fmt(m.gripper.closed_hold) << "\n";
  o << "cg_offset = " << fmt3(m.gripper.cg_offset) << "\n\n";

  o << "[gripper.geometry]\n";
  o << "palm_offset = " << fmt(m.geometry.palm_offset) << "\n";
  o << "finger_stations = " << fmt(m.geometry.finger_stations[0]) << " "
    << fmt(m.geometry.finger_stations[1]) << "\n";
  o << "finger_angles_deg = " << fmt(m.geometry.finger_angles_rad[0] * kRadToDeg) << " "
    << fmt(m.geometry.finger_angles_rad[1] * kRadToDeg) << " "
    << fmt(m.geometry.finger_angles_rad[2] * kRadToDeg) << "\n\n";

  o << "[object]\n";
  o << "mass = " << fmt(m.object.mass) << "\n";
  o << "half_width = " << fmt(m.object.half_width) << "\n";
  o << "depth = " << fmt(m.object.depth) << "\n";
  o << "attach_position = " << fmt3(m.object.attach_pose.position) << "\n";
  o << "attach_rpy_deg = " << fmt3(c.attach_rpy_deg) << "\n";
  o << "cg_offset = " << fmt3(m.object.cg_offset) << "\n\n";

  o << "[contact]\n";
  o << "stiffness = " << fmt(m.contact.stiffness) << "\n";
  o << "hertz_exponent = " << fmt(m.contact.hertz_exponent) << "\n";
  o << "damping = " << fmt(m.contact.damping) << "\n";
  o << "friction = " << fmt(m.contact.friction) << "\n";
  o << "v_reg = " << fmt(m.contact.v_reg) << "\n\n";

  o << "[gains.uav]\n";
  o << "stiffness = " << fmt3(m.uav_gains.stiffness) << "\n";
  o << "damping = " << fmt3(m.uav_gains.damping) << "\n\n";
  o << "[gains.manipulator]\n";
  o << "stiffness = " << fmt3(m.manip_gains.stiffness) << "\n";
  o << "damping = " << fmt3(m.manip_gains.damping) << "\n\n";
  o << "[gains.gripper]\n";
  o << "stiffness = " << fmt(m.gripper_gains.stiffness) << "\n";
  o << "damping = " << fmt(m.gripper_gains.damping) << "\n\n";
  o << "[gains.attitude]\n";
  o << "kr = " << fmt(m.attitude_gains.kr) << "\n";
  o << "kw = " << fmt(m.attitude_gains.kw) << "\n\n";

  o << "[mission]\n";
  o << "breakaway_force = " << fmt(m.breakaway_force) << "\n";
  o << "grasp_secure_threshold = " << fmt(m.grasp_secure_threshold) << "\n";
  o << "grasp_secure_dwell = " << fmt(m.grasp_secure_dwell) << "\n";
  o << "press_depth = " << fmt(m.press_depth) << "\n";
  o << "grasp_aperture = " << fmt(c.grasp_aperture) << "\n";
  o << "gripper_slew = " << fmt(c.gripper_slew) << "\n";
  o << "grip_close_delay = " << fmt(c.grip_close_delay) << "\n";
  o << "tracking_blend = " << fmt(c.tracking_blend) << "\n\n";

  o << "[setpoints]\n";
  o << "initial_uav = " << fmt3(c.initial_uav) << "\n";
  o << "arm_nominal = " << fmt3(c.arm_nominal) << "\n";
  o << "initial_aperture = " << fmt(c.initial_aperture) << "\n";
  o << "uav_setpoint_rate = " << fmt(c.uav_setpoint_rate) << "\n";
  for (const auto& wp : c.waypoints) {
    o << "waypoint = " << fmt(wp.t) << " " << fmt3(wp.p) << "\n";
  }
  for (const auto& w : c.tracking_windows) {
    o << "tracking_window = " << fmt(w.t_on) << " " << fmt(w.t_off) << "\n";
  }
  o << "\n[output]\n";
  o << "csv = " << c.output.csv << "\n";
  o << "svg = " << c.output.svg << "\n";
  o << "metrics = " << c.output.metrics << "\n";
  return o.str();
}

namespace {

// Effective waypoint position at time t: piecewise-linear interpolation with
// the slope capped at `rate` (0 disables the cap). Saturated segments keep
// moving toward their target into later segments, so the output is
// continuous.
Vec3 interp_waypoints(const std::vector<Waypoint>& wps, const Vec3& fallback, double rate,
                      double t) {
  if (wps.empty()) return fallback;
  Vec3 pos = wps.front().p;
  if (t <= wps.front().t) return pos;
  double t_seg = wps.front().t;
  for (std::size_t i = 1; i <= wps.size(); ++i) {
    const bool last = i == wps.size();
    const double t_next = last ? t : std::min(t, wps[i].t);
    const Vec3 target = last ? wps.back().p : wps[i].p;
    const double span = last ? (t - t_seg) : (wps[i].t - t_seg);
    const double dt_here = t_next - t_seg;
    if (dt_here > 0.0) {
      const Vec3 delta = target - pos;
      const double dist = delta.norm();
      if (dist > 1e-15) {
        double speed = span > 0.0 ? dist / span : std::numeric_limits<double>::infinity();
        if (rate > 0.0) speed = std::min(speed, rate);
        const double travel = std::min(speed * dt_here, dist);
        pos += delta / dist * travel;
      }
    }
    t_seg = last ? t : wps[i].t;
    if (t_next >= t) break;
  }
  return pos;
}

// 0 outside, ramps over `blend` across the window edges, 1 inside.
double window_factor(const TrackingWindow& w, double blend, double t) {
  if (t < w.t_on) return 0.0;
  double f = 1.0;
  if (blend > 0.0 && t < w.t_on + blend) f = (t - w.t_on) / blend;
  if (t > w.t_off) {
    if (blend <= 0.0) return 0.0;
    const double down = 1.0 - (t - w.t_off) / blend;
    f = std::min(f, std::max(down, 0.0));
  }
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace

Setpoints generate_setpoints(const ScenarioConfig& c, double t, const SystemState& st,
                             double mission_entry_time) {
  Setpoints sp;
  sp.p_b_star = interp_waypoints(c.waypoints, c.initial_uav, c.uav_setpoint_rate, t);

  double lambda = 0.0;
  for (const auto& w : c.tracking_windows) {
    lambda = std::max(lambda, window_factor(w, c.tracking_blend, t));
  }
  sp.object_tracking_enabled = lambda > 0.0;
  if (lambda > 0.0) {
    const TrackingSetpoint tracked = object_tracking_setpoint(
        Pose{st.p_b, st.r_b}, st.object_pose, true, c.arm_nominal, c.model.manip, c.model.object,
        c.model.geometry.palm_offset, c.model.press_depth);
    sp.p_e_star = c.arm_nominal + lambda * (tracked.p_e_star - c.arm_nominal);
  } else {
    sp.p_e_star = c.arm_nominal;
  }

  if (st.mission == MissionPhase::Dock) {
    const double since = std::max(t - mission_entry_time - c.grip_close_delay, 0.0);
    sp.aperture_star =
        std::max(c.grasp_aperture, c.model.gripper.open_hold - c.gripper_slew * since);
  } else {
    sp.aperture_star = c.model.gripper.open_hold;
  }
  return sp;
}

SystemState initial_state(const ScenarioConfig& c) {
  SystemState st;
  st.p_b = c.initial_uav;
  st.v_b = Vec3::Zero();
  st.r_b = Mat3::Identity();
  st.omega = Vec3::Zero();
  st.p_e = c.arm_nominal;
  st.v_e = Vec3::Zero();
  st.s = c.initial_aperture >= 0.0 ? c.initial_aperture : c.model.gripper.open_hold;
  st.s_dot = 0.0;
  st.mission = MissionPhase::FreeFlight;
  st.object_pose = c.model.object.attach_pose;
  return st;
}

SimTrace run_scenario(const ScenarioConfig& c) {
  Engine engine(c.model, c.sim);
  const auto provider = [&c](double t, const SystemState& st, double entry) {
    return generate_setpoints(c, t, st, entry);
  };
  return engine.run(provider, initial_state(c));
}

SummaryMetrics compute_metrics(const SimTrace& trace, const ModelParams& params) {
  SummaryMetrics sm;
  sm.diverged = trace.diverged;
  sm.contact_time = trace.contact_time;
  sm.detach_time = trace.detach_time;
  if (trace.steps.empty()) return sm;

  struct Acc {
    Vec3 uav_sq{Vec3::Zero()};
    Vec3 arm_sq{Vec3::Zero()};
    int n = 0;
  };
  std::map<MissionPhase, Acc> acc;
  for (const auto& row : trace.steps) {
    auto& a = acc[row.state.mission];
    const Vec3 eu = row.state.p_b - row.setpoints.p_b_star;
    const Vec3 ea = row.state.p_e - row.setpoints.p_e_star;
    a.uav_sq += eu.cwiseProduct(eu);
    a.arm_sq += ea.cwiseProduct(ea);
    a.n += 1;
    if (row.state.mission == MissionPhase::Dock) {
      sm.max_dock_deviation = std::max(sm.max_dock_deviation, eu.norm());
    }
  }
  for (const auto& [phase, a] : acc) {
    PhaseMetrics pm;
    pm.phase = phase;
    pm.duration = a.n * trace.dt;
    pm.uav_rms = (a.uav_sq / std::max(a.n, 1)).cwiseSqrt();
    pm.arm_rms = (a.arm_sq / std::max(a.n, 1)).cwiseSqrt();
    sm.phases.push_back(pm);
  }
  const auto& last = trace.steps.back();
  sm.final_uav_error = (last.state.p_b - last.setpoints.p_b_star).norm();
  sm.final_arm_error = (last.state.p_e - last.setpoints.p_e_star).norm();

  const PassivityReport rep = passivity_monitor(trace, params);
  sm.passivity_passed = rep.passed;
  sm.passivity_violations = rep.total_violations();
  sm.flagged_steps = rep.flagged_steps;
  return sm;
}

namespace {

const char* kHoverPreset = R"(# Level hover regulation; nothing moves.
name = hover

[sim]
dt = 0.001
t_end = 5.0

[setpoints]
initial_uav = 0.5 0.0 -1.0
arm_nominal = 0.06 0.0 0.02
waypoint = 0.0 0.5 0.0 -1.0
)";

const char* kFig3Preset = R"(# Full mission: approach the wall, dock on the knob, close the gripper,
# pull the object free and fly away with it.
name = fig3-mission

[sim]
dt = 0.001
t_end = 24.0

[gains.gripper]
stiffness = 200
damping = 8

[contact]
v_reg = 0.01

[mission]
breakaway_force = 0.8
grasp_aperture = 0.01
gripper_slew = 0.05
grip_close_delay = 2.5
tracking_blend = 1.5

[object]
mass = 0.1
half_width = 0.025
depth = 0.05
attach_position = 1.975 0.0 -1.0

[setpoints]
initial_uav = 0.5 0.0 -0.94
arm_nominal = 0.06 0.0 0.02
uav_setpoint_rate = 1.0
waypoint = 0.0 0.5 0.0 -0.94
waypoint = 1.5 0.5 0.0 -0.94
waypoint = 6.0 1.80 0.0 -0.94
waypoint = 11.0 1.80 0.0 -0.94
waypoint = 12.25 1.55 0.0 -0.94
waypoint = 13.75 1.20 0.0 -0.94
tracking_window = 6.0 10.0
)";

const char* kFig4Preset = R"(# Manipulator-focused variant of the docking mission: longer dock dwell and
# a wider tracking window to exercise the arm loop.
name = fig4-manipulator

[sim]
dt = 0.001
t_end = 26.0

[gains.gripper]
stiffness = 200
damping = 8

[contact]
v_reg = 0.01

[mission]
breakaway_force = 0.8
grasp_aperture = 0.01
gripper_slew = 0.05
grip_close_delay = 2.5
tracking_blend = 1.5

[setpoints]
initial_uav = 0.5 0.0 -0.94
arm_nominal = 0.06 0.0 0.02
uav_setpoint_rate = 1.0
waypoint = 0.0 0.5 0.0 -0.94
waypoint = 1.0 0.5 0.0 -0.94
waypoint = 5.8 1.80 0.0 -0.94
waypoint = 13.0 1.80 0.0 -0.94
waypoint = 14.25 1.55 0.0 -0.94
waypoint = 15.75 1.20 0.0 -0.94
tracking_window = 5.5 11.5
)";

const char* kPassivityPreset = R"(# Aggressive free-flight maneuvering followed by a dock: stresses the
# energy monitor across impacts and reference motion.
name = passivity-suite

[sim]
dt = 0.001
t_end = 20.0

[gains.gripper]
stiffness = 200
damping = 8

[gains.attitude]
kr = 900
kw = 60

[contact]
v_reg = 0.01

[mission]
breakaway_force = 0.8
grasp_aperture = 0.01
grip_close_delay = 2.5
tracking_blend = 1.5

[setpoints]
initial_uav = 0.5 0.0 -0.94
arm_nominal = 0.06 0.0 0.02
uav_setpoint_rate = 2.0
waypoint = 0.0 0.5 0.0 -0.94
waypoint = 1.0 0.9 0.3 -1.3
waypoint = 2.5 0.4 -0.3 -0.7
waypoint = 4.0 0.5 0.0 -0.94
waypoint = 9.0 1.80 0.0 -0.94
waypoint = 14.0 1.80 0.0 -0.94
waypoint = 15.25 1.55 0.0 -0.94
waypoint = 16.75 1.20 0.0 -0.94
tracking_window = 8.5 13.0
)";

}  // namespace

std::vector<std::string> preset_names() {
  return {"hover", "fig3-mission", "fig4-manipulator", "passivity-suite"};
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string preset_text(const std::string& name) {
  if (name == "hover") return kHoverPreset;
  if (name == "fig3-mission") return kFig3Preset;
  if (name == "fig4-manipulator") return kFig4Preset;
  if (name == "passivity-suite") return kPassivityPreset;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace airgrasp
