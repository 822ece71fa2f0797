#include "airgrasp/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace airgrasp {

namespace {

struct Column {
  std::string name;
  std::function<double(const TraceStep&)> get;
};

std::vector<Column> columns() {
  std::vector<Column> cols;
  auto add = [&cols](std::string name, std::function<double(const TraceStep&)> get) {
    cols.push_back({std::move(name), std::move(get)});
  };
  add("t", [](const TraceStep& r) { return r.t; });
  add("mission", [](const TraceStep& r) { return static_cast<double>(r.state.mission); });
  const char* axes = "xyz";
  for (int i = 0; i < 3; ++i)
    add(std::string("p_b_") + axes[i], [i](const TraceStep& r) { return r.state.p_b(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("v_b_") + axes[i], [i](const TraceStep& r) { return r.state.v_b(i); });
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      add("r_b_" + std::to_string(i) + std::to_string(j),
          [i, j](const TraceStep& r) { return r.state.r_b(i, j); });
  for (int i = 0; i < 3; ++i)
    add(std::string("omega_") + axes[i], [i](const TraceStep& r) { return r.state.omega(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("p_e_") + axes[i], [i](const TraceStep& r) { return r.state.p_e(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("v_e_") + axes[i], [i](const TraceStep& r) { return r.state.v_e(i); });
  add("s", [](const TraceStep& r) { return r.state.s; });
  add("s_dot", [](const TraceStep& r) { return r.state.s_dot; });
  for (int i = 0; i < 3; ++i)
    add(std::string("obj_") + axes[i],
        [i](const TraceStep& r) { return r.state.object_pose.position(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("sp_uav_") + axes[i],
        [i](const TraceStep& r) { return r.setpoints.p_b_star(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("sp_arm_") + axes[i],
        [i](const TraceStep& r) { return r.setpoints.p_e_star(i); });
  add("sp_aperture", [](const TraceStep& r) { return r.setpoints.aperture_star; });
  add("grip_target", [](const TraceStep& r) { return r.gripper_target; });
  add("tracking_enabled",
      [](const TraceStep& r) { return r.setpoints.object_tracking_enabled ? 1.0 : 0.0; });
  add("thrust", [](const TraceStep& r) { return r.thrust; });
  for (int i = 0; i < 3; ++i)
    add(std::string("torque_") + axes[i], [i](const TraceStep& r) { return r.torque(i); });
  for (int i = 0; i < 4; ++i)
    add("rotor_" + std::to_string(i + 1), [i](const TraceStep& r) { return r.rotors(i); });
  add("attitude_err", [](const TraceStep& r) { return r.attitude_error; });
  auto add_wrench = [&add](const std::string& prefix,
                           std::function<const Wrench&(const TraceStep&)> w) {
    const char* ax = "xyz";
    for (int i = 0; i < 3; ++i)
      add(prefix + "_f" + ax[i], [w, i](const TraceStep& r) { return w(r).force(i); });
    for (int i = 0; i < 3; ++i)
      add(prefix + "_m" + ax[i], [w, i](const TraceStep& r) { return w(r).moment(i); });
  };
  add_wrench("w_man", [](const TraceStep& r) -> const Wrench& { return r.w_man; });
  add_wrench("f_h", [](const TraceStep& r) -> const Wrench& { return r.f_h; });
  add_wrench("w_obj", [](const TraceStep& r) -> const Wrench& { return r.w_obj; });
  for (int i = 0; i < kContactForceDim; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    add(std::string("fc_") + buf, [i](const TraceStep& r) { return r.f_c(i); });
  }
  for (int i = 0; i < 3; ++i)
    add(std::string("d_uav_") + axes[i], [i](const TraceStep& r) { return r.d_uav(i); });
  for (int i = 0; i < 3; ++i)
    add(std::string("d_man_") + axes[i], [i](const TraceStep& r) { return r.d_man(i); });
  add("d_grip", [](const TraceStep& r) { return r.d_grip; });
  auto add_energy = [&add](const std::string& prefix,
                           std::function<const SubsystemEnergy&(const TraceStep&)> e) {
    add(prefix + "_kinetic", [e](const TraceStep& r) { return e(r).kinetic; });
    add(prefix + "_potential", [e](const TraceStep& r) { return e(r).potential; });
    add(prefix + "_supply", [e](const TraceStep& r) { return e(r).supply; });
    add(prefix + "_dissipation", [e](const TraceStep& r) { return e(r).dissipation; });
  };
  add_energy("en_uav", [](const TraceStep& r) -> const SubsystemEnergy& { return r.energy.uav; });
  add_energy("en_man",
             [](const TraceStep& r) -> const SubsystemEnergy& { return r.energy.manip; });
  add_energy("en_grip",
             [](const TraceStep& r) -> const SubsystemEnergy& { return r.energy.gripper; });
  add("palm_pen", [](const TraceStep& r) { return r.palm_pen; });
  add("max_pen", [](const TraceStep& r) { return r.max_penetration; });
  add("min_finger_normal", [](const TraceStep& r) { return r.min_finger_normal; });
  add("wall_tension", [](const TraceStep& r) { return r.wall_tension; });
  add("impact", [](const TraceStep& r) { return r.impact_flag ? 1.0 : 0.0; });
  add("degenerate", [](const TraceStep& r) { return r.thrust_degenerate ? 1.0 : 0.0; });
  return cols;
}

const std::vector<Column>& column_table() {
  static const std::vector<Column> table = columns();
  return table;
}

}  // namespace

std::vector<std::string> trace_csv_columns() {
  std::vector<std::string> names;
  for (const auto& c : column_table()) names.push_back(c.name);
  return names;
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
  const auto& cols = column_table();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i == 0 ? "" : ",") << cols[i].name;
  }
  out << "\n";
  char buf[40];
  for (const auto& row : trace.steps) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", cols[i].get(row));
      if (i != 0) out << ',';
      out << buf;
    }
    out << "\n";
  }
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace_csv(trace, f);
  if (!f.good()) throw std::runtime_error("write failed for '" + path + "'");
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.header.size());
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_csv(f);
}

namespace {

struct Series {
  std::string label;
  std::function<double(const TraceStep&)> actual;
  std::function<double(const TraceStep&)> setpoint;
};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_tracking_svg(const SimTrace& trace, const std::string& path) {
  if (trace.steps.empty()) throw std::runtime_error("no data to plot");
  const std::vector<Series> series = {
      {"uav x [m]", [](const TraceStep& r) { return r.state.p_b.x(); },
       [](const TraceStep& r) { return r.setpoints.p_b_star.x(); }},
      {"uav y [m]", [](const TraceStep& r) { return r.state.p_b.y(); },
       [](const TraceStep& r) { return r.setpoints.p_b_star.y(); }},
      {"uav z [m]", [](const TraceStep& r) { return r.state.p_b.z(); },
       [](const TraceStep& r) { return r.setpoints.p_b_star.z(); }},
      {"arm x [m]", [](const TraceStep& r) { return r.state.p_e.x(); },
       [](const TraceStep& r) { return r.setpoints.p_e_star.x(); }},
      {"arm y [m]", [](const TraceStep& r) { return r.state.p_e.y(); },
       [](const TraceStep& r) { return r.setpoints.p_e_star.y(); }},
      {"arm z [m]", [](const TraceStep& r) { return r.state.p_e.z(); },
       [](const TraceStep& r) { return r.setpoints.p_e_star.z(); }},
  };

  const int panel_w = 860, panel_h = 150, margin_l = 70, margin_t = 24, gap = 36;
  const int width = margin_l + panel_w + 30;
  const int height = margin_t + static_cast<int>(series.size()) * (panel_h + gap);
  const double t0 = trace.steps.front().t;
  const double t1 = trace.steps.back().t;
  const std::size_t stride = std::max<std::size_t>(1, trace.steps.size() / 1600);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < series.size(); ++p) {
    const auto& s = series[p];
    const int top = margin_t + static_cast<int>(p) * (panel_h + gap);
    double lo = 1e300, hi = -1e300;
    for (const auto& r : trace.steps) {
      lo = std::min({lo, s.actual(r), s.setpoint(r)});
      hi = std::max({hi, s.actual(r), s.setpoint(r)});
    }
    if (hi - lo < 1e-9) {
      hi += 0.5e-3;
      lo -= 0.5e-3;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto x_of = [&](double t) { return margin_l + (t - t0) / std::max(t1 - t0, 1e-12) * panel_w; };
    auto y_of = [&](double v) { return top + panel_h - (v - lo) / (hi - lo) * panel_h; };

    // Mission shading: dock in light orange, aerial grasp in light green.
    std::size_t k = 0;
    while (k < trace.steps.size()) {
      const MissionPhase ph = trace.steps[k].state.mission;
      std::size_t j = k;
      while (j + 1 < trace.steps.size() && trace.steps[j + 1].state.mission == ph) ++j;
      if (ph != MissionPhase::FreeFlight) {
        const char* color = ph == MissionPhase::Dock ? "#ffe7c7" : "#d9f2d9";
        o << "<rect x=\"" << svg_num(x_of(trace.steps[k].t)) << "\" y=\"" << top << "\" width=\""
          << svg_num(x_of(trace.steps[j].t) - x_of(trace.steps[k].t)) << "\" height=\"" << panel_h
          << "\" fill=\"" << color << "\"/>\n";
      }
      k = j + 1;
    }

    o << "<rect x=\"" << margin_l << "\" y=\"" << top << "\" width=\"" << panel_w
      << "\" height=\"" << panel_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
    o << "<text x=\"8\" y=\"" << top + 14 << "\">" << s.label << "</text>\n";
    o << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + 12
      << "\" text-anchor=\"end\">" << svg_num(hi) << "</text>\n";
    o << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + panel_h
      << "\" text-anchor=\"end\">" << svg_num(lo) << "</text>\n";

    for (int which = 0; which < 2; ++which) {
      o << "<polyline fill=\"none\" stroke=\""
        << (which == 0 ? "#b0b0b0" : "#1f5fbf") << "\""
        << (which == 0 ? " stroke-dasharray=\"5,4\"" : "") << " stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < trace.steps.size(); i += stride) {
        const auto& r = trace.steps[i];
        const double v = which == 0 ? s.setpoint(r) : s.actual(r);
        o << svg_num(x_of(r.t)) << ',' << svg_num(y_of(v)) << ' ';
      }
      o << "\"/>\n";
    }
  }
  o << "<text x=\"" << margin_l << "\" y=\"" << height - 8 << "\">t = " << svg_num(t0)
    << " .. " << svg_num(t1) << " s; dashed = setpoint, shaded = dock / aerial grasp</text>\n";
  o << "</svg>\n";

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << o.str();
  if (!f.good()) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

std::string json_num(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string metrics_to_json(const SummaryMetrics& m) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"phases\": [\n";
  for (std::size_t i = 0; i < m.phases.size(); ++i) {
    const auto& p = m.phases[i];
    o << "    {\"phase\": \"" << mission_name(p.phase) << "\", \"duration_s\": "
      << json_num(p.duration) << ",\n"
      << "     \"uav_rms_m\": [" << json_num(p.uav_rms.x()) << ", " << json_num(p.uav_rms.y())
      << ", " << json_num(p.uav_rms.z()) << "],\n"
      << "     \"arm_rms_m\": [" << json_num(p.arm_rms.x()) << ", " << json_num(p.arm_rms.y())
      << ", " << json_num(p.arm_rms.z()) << "]}" << (i + 1 < m.phases.size() ? "," : "") << "\n";
  }
  o << "  ],\n";
  o << "  \"max_dock_deviation_m\": " << json_num(m.max_dock_deviation) << ",\n";
  o << "  \"contact_time_s\": " << json_num(m.contact_time) << ",\n";
  o << "  \"detach_time_s\": " << json_num(m.detach_time) << ",\n";
  o << "  \"final_uav_error_m\": " << json_num(m.final_uav_error) << ",\n";
  o << "  \"final_arm_error_m\": " << json_num(m.final_arm_error) << ",\n";
  o << "  \"diverged\": " << (m.diverged ? "true" : "false") << ",\n";
  o << "  \"passivity\": {\"passed\": " << (m.passivity_passed ? "true" : "false")
    << ", \"violations\": " << m.passivity_violations
    << ", \"flagged_steps\": " << m.flagged_steps << "}\n";
  o << "}\n";
  return o.str();
}

void write_metrics_json(const SummaryMetrics& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << metrics_to_json(m);
  if (!f.good()) throw std::runtime_error("write failed for '" + path + "'");
}

EmittedFiles emit_outputs(const SimTrace& trace, const ScenarioConfig& config,
                          const std::string& out_dir) {
  if (trace.steps.empty()) throw std::runtime_error("no data: trace is empty");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  EmittedFiles files;
  files.csv = (fs::path(out_dir) / config.output.csv).string();
  files.svg = (fs::path(out_dir) / config.output.svg).string();
  files.metrics = (fs::path(out_dir) / config.output.metrics).string();
  write_trace_csv(trace, files.csv);
  write_tracking_svg(trace, files.svg);
  write_metrics_json(compute_metrics(trace, config.model), files.metrics);
  return files;
}

}  // namespace airgrasp
