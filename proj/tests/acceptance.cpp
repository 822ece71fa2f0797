// Acceptance suite: end-to-end checks of the simulator and controllers.
// Each criterion prints one PASS/FAIL line; the process exits nonzero if
// any fail.

#include "airgrasp/engine.hpp"
#include "airgrasp/scenario.hpp"
#include "airgrasp/trace_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace airgrasp;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-34s %s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_hover_equilibrium() {
  ScenarioConfig c = parse_scenario(preset_text("hover"));
  c.sim.t_end = 5.0;
  Engine engine(c.model, c.sim);
  const SystemState st = initial_state(c);
  const Setpoints sp = generate_setpoints(c, 0.0, st, 0.0);

  const auto t0 = std::chrono::steady_clock::now();
  const auto acc = engine.accelerations(st, sp);
  const double acc_max =
      std::max({acc.uav_linear.norm(), acc.uav_angular.norm(), acc.arm.norm(),
                std::abs(acc.aperture)});

  const SimTrace trace = run_scenario(c);
  const double runtime = seconds_since(t0);
  const double drift = (trace.steps.back().state.p_b - st.p_b).norm();

  const bool pass = acc_max < 1e-12 && drift < 1e-9 && !trace.diverged && runtime < 1.0;
  report(1, "hover equilibrium exactness", pass,
         fmt("|accel| = %.2e, drift = %.2e m, runtime %.2f s", acc_max, drift, runtime));
}

void criterion_2_constant_setpoint_convergence() {
  const auto t0 = std::chrono::steady_clock::now();

  // 0.5 m vehicle step in free flight: error below 1e-3 m within 10 s.
  ScenarioConfig c = parse_scenario(preset_text("hover"));
  c.sim.t_end = 10.0;
  SystemState st = initial_state(c);
  st.p_b += Vec3(0.5, 0.0, 0.0);
  Engine engine(c.model, c.sim);
  const auto provider = [&c](double t, const SystemState& s, double entry) {
    return generate_setpoints(c, t, s, entry);
  };
  const SimTrace uav_trace = engine.run(provider, st);
  const double uav_err =
      (uav_trace.steps.back().state.p_b - uav_trace.steps.back().setpoints.p_b_star).norm();

  // 20 mm manipulator step: below 1e-3 m within 3 s.
  ScenarioConfig cm = parse_scenario(preset_text("hover"));
  cm.sim.t_end = 3.0;
  SystemState stm = initial_state(cm);
  stm.p_e += Vec3(0.02, 0.0, 0.0);
  Engine em(cm.model, cm.sim);
  const auto provider_m = [&cm](double t, const SystemState& s, double entry) {
    return generate_setpoints(cm, t, s, entry);
  };
  const SimTrace arm_trace = em.run(provider_m, stm);
  const double arm_err =
      (arm_trace.steps.back().state.p_e - arm_trace.steps.back().setpoints.p_e_star).norm();

  const double runtime = seconds_since(t0);
  const bool pass = uav_err < 1e-3 && arm_err < 1e-3 && runtime < 5.0 && !uav_trace.diverged &&
                    !arm_trace.diverged;
  report(2, "constant-setpoint convergence", pass,
         fmt("uav err = %.2e m, arm err = %.2e m, runtime %.2f s", uav_err, arm_err, runtime));
}

void criterion_3_passivity(const SimTrace& fig3, const ModelParams& params) {
  const PassivityReport rep = passivity_monitor(fig3, params);
  const bool pass = rep.total_violations() == 0 && !fig3.steps.empty();
  std::ostringstream detail;
  detail << "violations outside impacts = " << rep.total_violations()
         << " (flagged steps = " << rep.flagged_steps
         << ", worst residual = " << rep.uav.worst_residual << "/" << rep.manip.worst_residual
         << "/" << rep.gripper.worst_residual << " J)";
  report(3, "output strict passivity", pass, detail.str());
}

void criterion_4_mission_timeline(const SimTrace& fig3, const ScenarioConfig& config) {
  bool saw_dock = false, saw_grasp = false, order_ok = true;
  MissionPhase prev = MissionPhase::FreeFlight;
  for (const auto& row : fig3.steps) {
    const MissionPhase m = row.state.mission;
    if (m == MissionPhase::Dock) saw_dock = true;
    if (m == MissionPhase::AerialGrasp) saw_grasp = true;
    if (static_cast<int>(m) < static_cast<int>(prev)) order_ok = false;
    prev = m;
  }
  const bool contact_ok = fig3.contact_time >= 6.0 && fig3.contact_time <= 8.0;
  const bool detach_ok = fig3.detach_time >= 10.0 && fig3.detach_time <= 12.0;

  double post_detach_worst = 0.0;
  double final_err = 1e9;
  const double t_last_wp = config.waypoints.back().t;
  for (const auto& row : fig3.steps) {
    if (fig3.detach_time >= 0.0 && row.t >= fig3.detach_time) {
      post_detach_worst =
          std::max(post_detach_worst, (row.state.p_b - row.setpoints.p_b_star).norm());
    }
    if (row.t >= t_last_wp + 10.0 && final_err > 1e8) {
      final_err = (row.state.p_b - row.setpoints.p_b_star).norm();
    }
  }
  const bool pass = saw_dock && saw_grasp && order_ok && contact_ok && detach_ok &&
                    post_detach_worst < 0.3 && final_err < 1e-2 && !fig3.diverged;
  std::ostringstream detail;
  detail << "contact t = " << fig3.contact_time << " s, detach t = " << fig3.detach_time
         << " s, post-detach max err = " << post_detach_worst
         << " m, err at last wp + 10 s = " << final_err << " m";
  report(4, "mission timeline reproduction", pass, detail.str());
}

void criterion_5_impact_boundedness(const SimTrace& fig3, const ModelParams& params) {
  const SummaryMetrics m = compute_metrics(fig3, params);
  const bool pass = m.max_dock_deviation < 0.2 && !m.diverged;
  report(5, "impact fluctuation boundedness", pass,
         fmt("max dock deviation = %.3f m, diverged = %.0f", m.max_dock_deviation,
             m.diverged ? 1.0 : 0.0));
}

void criterion_6_grasp_wrench_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(0xacce97a0u);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<Pose, kNumContacts> frames;
    for (auto& f : frames) {
      f.position = Vec3(d(rng), d(rng), d(rng)) * 0.2;
      Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
      q.normalize();
      f.orientation = q.toRotationMatrix();
    }
    VecX f_c(kContactForceDim);
    for (int i = 0; i < kContactForceDim; ++i) f_c(i) = 10.0 * d(rng);

    const Wrench w = object_wrench_docked(build_grasp_matrix(frames), f_c);
    Vec3 force = Vec3::Zero(), moment = Vec3::Zero();
    for (int k = 0; k < kNumContacts; ++k) {
      const Vec3 fk = frames[static_cast<std::size_t>(k)].orientation * f_c.segment<3>(3 * k);
      force += fk;
      moment += frames[static_cast<std::size_t>(k)].position.cross(fk);
    }
    const double scale = std::max(1.0, force.norm() + moment.norm());
    worst = std::max(worst,
                     ((w.force - force).norm() + (w.moment - moment).norm()) / scale);
  }
  const double runtime = seconds_since(t0);
  const bool pass = worst < 1e-10 && runtime < 1.0;
  report(6, "grasp-wrench oracle equivalence", pass,
         fmt("worst relative error = %.2e, runtime %.2f s", worst, runtime));
}

void criterion_7_integrator_order() {
  // Generalized closed loop m p_dd + D p_d + K (p - p*) = d against the
  // closed-form solution; the RK4 global error must scale as dt^4 within a
  // factor of two across dt in {2, 1, 0.5} ms.
  const double m = 1.0, K = 4.0, D = 1.0, d_in = 0.5, p_star = 0.2;
  const double p_eq = p_star + d_in / K;
  const double wn = std::sqrt(K / m);
  const double zeta = D / (2.0 * std::sqrt(K * m));
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double e0 = 1.0 - p_eq;
  const auto exact = [&](double t) {
    return p_eq + std::exp(-zeta * wn * t) *
                      (e0 * std::cos(wd * t) + (zeta * wn * e0) / wd * std::sin(wd * t));
  };
  const auto field = [&](double, const VecX& y) {
    VecX dy(2);
    dy << y(1), (d_in - D * y(1) - K * (y(0) - p_star)) / m;
    return dy;
  };
  const auto global_err = [&](double dt) {
    VecX x(2);
    x << 1.0, 0.0;
    const int n = static_cast<int>(std::llround(4.0 / dt));
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      x = rk4_step(field, k * dt, x, dt);
      worst = std::max(worst, std::abs(x(0) - exact((k + 1) * dt)));
    }
    return worst;
  };
  const double e2 = global_err(2e-3), e1 = global_err(1e-3), e05 = global_err(0.5e-3);
  const double r21 = e2 / e1, r105 = e1 / e05;
  const bool pass = r21 > 8.0 && r21 < 32.0 && r105 > 8.0 && r105 < 32.0;
  report(7, "RK4 order of convergence", pass,
         fmt("error ratios %.1f and %.1f (ideal 16)", r21, r105));
}

void criterion_8_mixer_roundtrip() {
  UavParams p;
  std::mt19937_64 rng(0x310cbea7u);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ThrustTorque in{30.0 * d(rng), Vec3(d(rng), d(rng), d(rng)) * 2.0};
    const ThrustTorque out = mixer_forward(mixer_inverse(in, p), p);
    worst = std::max({worst, std::abs(out.thrust - in.thrust),
                      (out.torque - in.torque).cwiseAbs().maxCoeff()});
  }
  report(8, "mixer round-trip identity", worst < 1e-12, fmt("worst residual = %.2e", worst));
}

void criterion_9_friction_cone(const std::vector<const SimTrace*>& traces, double mu) {
  double worst_excess = -1.0;
  long rows = 0;
  for (const SimTrace* trace : traces) {
    for (const auto& row : trace->steps) {
      ++rows;
      for (int k = 0; k < kNumContacts; ++k) {
        const Vec3 f = row.f_c.segment<3>(3 * k);
        const double f_n = f.z();
        const double f_t = f.head<2>().norm();
        worst_excess = std::max(worst_excess, f_t - mu * f_n);
      }
    }
  }
  const bool pass = worst_excess <= 1e-12;
  report(9, "friction cone at every contact", pass,
         fmt("worst |f_t| - mu f_n = %.2e N over %.0f rows", worst_excess,
             static_cast<double>(rows)));
}

void criterion_10_determinism() {
  ScenarioConfig c = parse_scenario(preset_text("fig3-mission"));
  c.sim.t_end = 8.0;  // covers free flight and docking; full run checked elsewhere
  const SimTrace a = run_scenario(c);
  const SimTrace b = run_scenario(c);
  std::ostringstream sa, sb;
  write_trace_csv(a, sa);
  write_trace_csv(b, sb);
  const bool pass = sa.str() == sb.str() && !sa.str().empty();
  report(10, "byte-identical determinism", pass,
         fmt("%.0f bytes compared", static_cast<double>(sa.str().size())));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  criterion_1_hover_equilibrium();
  criterion_2_constant_setpoint_convergence();

  const ScenarioConfig fig3_cfg = parse_scenario(preset_text("fig3-mission"));
  const SimTrace fig3 = run_scenario(fig3_cfg);
  const ScenarioConfig fig4_cfg = parse_scenario(preset_text("fig4-manipulator"));
  const SimTrace fig4 = run_scenario(fig4_cfg);
  const ScenarioConfig pas_cfg = parse_scenario(preset_text("passivity-suite"));
  const SimTrace pas = run_scenario(pas_cfg);
  const ScenarioConfig hov_cfg = parse_scenario(preset_text("hover"));
  const SimTrace hov = run_scenario(hov_cfg);

  criterion_3_passivity(fig3, fig3_cfg.model);
  criterion_4_mission_timeline(fig3, fig3_cfg);
  criterion_5_impact_boundedness(fig3, fig3_cfg.model);
  criterion_6_grasp_wrench_oracle();
  criterion_7_integrator_order();
  criterion_8_mixer_roundtrip();
  criterion_9_friction_cone({&fig3, &fig4, &pas, &hov}, fig3_cfg.model.contact.friction);
  criterion_10_determinism();

  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
