#include "airgrasp/control.hpp"

#include "airgrasp/dynamics.hpp"
#include "airgrasp/engine.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace airgrasp;

namespace {

std::mt19937_64 rng(0xc047201u);

Vec3 rnd3(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng)};
}

}  // namespace

TEST_CASE("uav_control: at the setpoint with zero velocity and no feed-forward") {
  SystemState st;
  st.p_b = {1.0, 2.0, -1.0};
  Setpoints sp;
  sp.p_b_star = st.p_b;
  ImpedanceGains g;
  FeedForward ff;
  CHECK(uav_control(st, sp, g, ff).isZero(0.0));
}

TEST_CASE("uav_control: unit error against diag(4) stiffness") {
  SystemState st;
  st.p_b = {1.0, 0.0, 0.0};
  Setpoints sp;  // setpoint at the origin
  ImpedanceGains g;
  g.stiffness = Vec3::Constant(4.0);
  FeedForward ff;
  CHECK(uav_control(st, sp, g, ff).isApprox(Vec3(-4.0, 0.0, 0.0)));
}

TEST_CASE("feed-forward: grasping a 100 g object adds 0.981 N along gravity") {
  UavParams uav;
  ManipulatorParams manip;
  GripperParams grip;
  ObjectParams obj;
  obj.mass = 0.1;
  const FeedForward ff = FeedForward::nominal(uav, manip, grip, obj);
  const Vec3 delta = ff.uav(MissionPhase::AerialGrasp) - ff.uav(MissionPhase::FreeFlight);
  CHECK(delta.x() == 0.0);
  CHECK(delta.y() == 0.0);
  CHECK(delta.z() == doctest::Approx(0.981).epsilon(1e-12));
  // The dock phase holds the free-flight compensation.
  CHECK(ff.uav(MissionPhase::Dock).isApprox(ff.uav(MissionPhase::FreeFlight)));
}

TEST_CASE("thrust extraction: hover command gives weight thrust and level attitude") {
  const auto out = thrust_attitude_from_u(Vec3::Zero(), 1.3, Mat3::Identity());
  CHECK_FALSE(out.degenerate);
  CHECK(out.thrust == doctest::Approx(1.3 * kGravity).epsilon(1e-14));
  CHECK(out.r_star.isApprox(Mat3::Identity(), 1e-12));
}

TEST_CASE("thrust extraction: lateral command tilts 45 degrees at sqrt(2) weight") {
  const double mg = 1.3 * kGravity;
  const auto out = thrust_attitude_from_u(Vec3(mg, 0.0, 0.0), 1.3, Mat3::Identity());
  CHECK(out.thrust == doctest::Approx(mg * std::sqrt(2.0)).epsilon(1e-12));
  const double tilt = rotation_angle(out.r_star, Mat3::Identity());
  CHECK(tilt == doctest::Approx(M_PI / 4.0).epsilon(1e-9));
  // The realized force direction must match the commanded one.
  const Vec3 f_real = out.thrust * (out.r_star * Vec3(0, 0, -1));
  const Vec3 f_cmd = Vec3(mg, 0, 0) - 1.3 * kGravity * Vec3::UnitZ();
  CHECK((f_real - f_cmd).norm() < 1e-10);
}

TEST_CASE("thrust extraction: a command cancelling gravity is degenerate") {
  const Mat3 r = axis_angle(Vec3::UnitY(), 0.3);
  const auto out = thrust_attitude_from_u(1.3 * kGravity * Vec3::UnitZ(), 1.3, r);
  CHECK(out.degenerate);
  CHECK(out.r_star.isApprox(r));  // keeps the current attitude
}

TEST_CASE("attitude authority: aligned, at rest, unloaded gives zero torque") {
  SystemState st;
  UavParams uav;
  ManipulatorParams manip;
  AttitudeGains g;
  const Vec3 m = attitude_authority(st, Mat3::Identity(), Wrench::zero(Frame::ManipBase), g, uav,
                                    manip);
  CHECK(m.isZero(0.0));
}

TEST_CASE("attitude authority: reaction wrenches are compensated exactly") {
  SystemState st;
  st.r_b = axis_angle(rnd3().normalized(), 0.2);
  UavParams uav;
  ManipulatorParams manip;
  AttitudeGains g;
  const Wrench w{rnd3(5.0), rnd3(2.0), Frame::ManipBase};
  const Vec3 m = attitude_authority(st, st.r_b, w, g, uav, manip);
  // e_R = 0 and omega = 0, so the output is exactly minus the plant coupling.
  CHECK((m + mount_coupling_moment(w, st.r_b, manip)).norm() == 0.0);
}

TEST_CASE("attitude authority: constant uncompensated disturbance reaches the PD balance") {
  UavParams uav;
  ManipulatorParams manip;
  AttitudeGains g;
  const Vec3 m_d(0.02, -0.01, 0.015);

  SystemState st;
  const double dt = 1e-3;
  for (int k = 0; k < 8000; ++k) {
    const Vec3 m_p = attitude_authority(st, Mat3::Identity(), Wrench::zero(Frame::ManipBase), g,
                                        uav, manip);
    const auto acc = uav_accel(st, ThrustTorque{0.0, m_p + m_d},
                               Wrench::zero(Frame::ManipBase), Vec3::Zero(), uav, manip);
    st.omega += dt * acc.angular;
    st.r_b = orthonormalize(st.r_b + dt * st.r_b * skew(st.omega));
    st.v_b.setZero();
    st.p_b.setZero();
  }
  // Steady state: PD torque balances -m_d, attitude offset bounded by m_d/kr.
  const Vec3 m_ss = attitude_authority(st, Mat3::Identity(), Wrench::zero(Frame::ManipBase), g,
                                       uav, manip);
  CHECK((m_ss + m_d).norm() < 1e-6);
  const double e_bound = m_d.norm() / (g.kr * uav.inertia.diagonal().minCoeff());
  CHECK(rotation_angle(st.r_b, Mat3::Identity()) < 1.1 * e_bound);
}

TEST_CASE("attitude authority: small-angle step decays like the linearized second order") {
  UavParams uav;
  uav.inertia = Mat3::Identity() * 0.02;
  ManipulatorParams manip;
  AttitudeGains g;  // theta_dd + kw theta_d + kr theta = 0 per unit inertia
  g.kr = 20.0;      // underdamped pair so the oscillatory solution applies
  g.kw = 4.0;
  const double theta0 = 0.02;

  SystemState st;
  st.r_b = axis_angle(Vec3::UnitY(), theta0);
  const double dt = 1e-4;
  const double t_end = 1.0;
  for (int k = 0; k * dt < t_end; ++k) {
    const Vec3 m_p = attitude_authority(st, Mat3::Identity(), Wrench::zero(Frame::ManipBase), g,
                                        uav, manip);
    const auto acc =
        uav_accel(st, ThrustTorque{0.0, m_p}, Wrench::zero(Frame::ManipBase), Vec3::Zero(), uav,
                  manip);
    st.omega += dt * acc.angular;
    st.r_b = orthonormalize(st.r_b + dt * st.r_b * skew(st.omega));
  }
  // Underdamped solution of theta_dd + kw theta_d + kr theta = 0.
  const double wn = std::sqrt(g.kr);
  const double zeta = g.kw / (2.0 * wn);
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double expected =
      theta0 * std::exp(-zeta * wn * t_end) *
      (std::cos(wd * t_end) + zeta * wn / wd * std::sin(wd * t_end));
  const double actual = rotation_angle(st.r_b, Mat3::Identity()) *
                        ((st.r_b(0, 2) > 0.0) ? 1.0 : -1.0);  // signed pitch about y
  CHECK(actual == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("manipulator_control: at the setpoint, static, no feed-forward") {
  SystemState st;
  Setpoints sp;
  sp.p_e_star = st.p_e;
  ImpedanceGains g{Vec3::Constant(50.0), Vec3::Constant(8.0)};
  FeedForward ff;
  CHECK(manipulator_control(st, sp, g, ff).isZero(0.0));
}

TEST_CASE("manipulator_control: gravity-only hover commands exactly minus eta") {
  // No gripper: the feed-forward vanishes and the base command reduces to
  // the weight cancellation.
  UavParams uav;
  ManipulatorParams manip;
  GripperParams grip;
  grip.phalange_mass = 1e-300;  // effectively massless but still valid
  ObjectParams obj;
  const FeedForward ff = FeedForward::nominal(uav, manip, grip, obj);

  SystemState st;
  Setpoints sp;
  sp.p_e_star = st.p_e;
  ImpedanceGains g{Vec3::Constant(50.0), Vec3::Constant(8.0)};
  const Vec3 u = manipulator_control(st, sp, g, ff);
  CHECK(u.norm() < 1e-200);
  const Vec3 cmd = manipulator_base_command(u, st, manip);
  const Vec3 eta = weight_in_frame(manip.mass, st.r_b * manip.mount_pose.orientation);
  CHECK((cmd + eta).norm() < 1e-12);
}

TEST_CASE("controllers are translation equivariant") {
  ImpedanceGains g{Vec3(8, 9, 10), Vec3(5, 4, 3)};
  FeedForward ff;
  ff.uav_free = rnd3();
  for (int i = 0; i < 50; ++i) {
    SystemState st;
    st.p_b = rnd3(5.0);
    st.v_b = rnd3(2.0);
    Setpoints sp;
    sp.p_b_star = rnd3(5.0);
    const Vec3 shift = rnd3(10.0);
    SystemState st2 = st;
    st2.p_b += shift;
    Setpoints sp2 = sp;
    sp2.p_b_star += shift;
    CHECK((uav_control(st, sp, g, ff) - uav_control(st2, sp2, g, ff)).norm() < 1e-12);
  }
}

TEST_CASE("controller output at zero error and velocity is exactly minus the feed-forward") {
  ImpedanceGains g;
  FeedForward ff;
  ff.uav_free = {0.1, -0.2, 3.9};
  ff.manip_free = {0.0, 0.5, -0.1};
  SystemState st;
  Setpoints sp;
  sp.p_b_star = st.p_b;
  sp.p_e_star = st.p_e;
  CHECK((uav_control(st, sp, g, ff) + ff.uav_free).isZero(0.0));
  CHECK((manipulator_control(st, sp, g, ff) + ff.manip_free).isZero(0.0));
}

TEST_CASE("gripper_control: at the dock target, static, only the feed-forward remains") {
  GripperGeometry geom;
  GripperParams params;
  GripperGains g;
  FeedForward ff;
  ff.gripper_free = 0.25;
  SystemState st;
  st.mission = MissionPhase::Dock;
  st.s = 0.02;
  Setpoints sp;
  sp.aperture_star = 0.02;
  CHECK(gripper_control(st, sp, g, ff, geom, params) ==
        doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("gripper_control: 10 mm aperture error against 100 N/m gives 1 N") {
  GripperGeometry geom;
  GripperParams params;
  GripperGains g;
  g.stiffness = 100.0;
  FeedForward ff;
  SystemState st;
  st.mission = MissionPhase::Dock;
  st.s = 0.030;
  Setpoints sp;
  sp.aperture_star = 0.020;
  CHECK(gripper_control(st, sp, g, ff, geom, params) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("gripper_control: idle phases regulate toward the hold apertures") {
  GripperGeometry geom;
  GripperParams params;
  GripperGains g;
  FeedForward ff;
  SystemState st;
  Setpoints sp;
  sp.aperture_star = 0.01;  // ignored outside dock

  st.mission = MissionPhase::FreeFlight;
  st.s = params.open_hold;
  CHECK(gripper_control(st, sp, g, ff, geom, params) == doctest::Approx(0.0).epsilon(1e-9));
  st.s = params.open_hold - 0.01;
  CHECK(gripper_control(st, sp, g, ff, geom, params) > 0.0);  // pushes open

  st.mission = MissionPhase::AerialGrasp;
  st.s = params.closed_hold + 0.01;
  CHECK(gripper_control(st, sp, g, ff, geom, params) < 0.0);  // pulls closed
}

TEST_CASE("object tracking setpoint: composition, extension and clamping") {
  ManipulatorParams manip;
  ObjectParams obj;
  const double palm_offset = 0.02;
  const double press = 0.003;
  const Vec3 nominal(0.06, 0.0, 0.02);

  // Vehicle placed so the tracked image is exactly the nominal extension.
  const double face_x = obj.attach_pose.position.x() - obj.depth / 2.0;
  Pose uav;
  uav.position = {face_x + press - manip.mount_pose.position.x() - nominal.z() - palm_offset,
                  obj.attach_pose.position.y() - nominal.y(),
                  obj.attach_pose.position.z() + nominal.x()};
  const auto at_standoff = object_tracking_setpoint(uav, obj.attach_pose, true, nominal, manip,
                                                    obj, palm_offset, press);
  CHECK_FALSE(at_standoff.clamped);
  CHECK((at_standoff.p_e_star - nominal).norm() < 1e-12);

  // 10 mm farther from the wall: the setpoint extends 10 mm.
  Pose back = uav;
  back.position.x() -= 0.010;
  const auto extended = object_tracking_setpoint(back, obj.attach_pose, true, nominal, manip,
                                                 obj, palm_offset, press);
  CHECK(extended.p_e_star.z() == doctest::Approx(nominal.z() + 0.010).epsilon(1e-9));

  // Far out of reach: clamped to the workspace and flagged.
  back.position.x() -= 1.0;
  const auto clamped = object_tracking_setpoint(back, obj.attach_pose, true, nominal, manip, obj,
                                                palm_offset, press);
  CHECK(clamped.clamped);
  CHECK(clamped.p_e_star.z() == doctest::Approx(manip.workspace.max.z()));

  // Disabled: nominal regardless of the poses.
  const auto off = object_tracking_setpoint(back, obj.attach_pose, false, nominal, manip, obj,
                                            palm_offset, press);
  CHECK((off.p_e_star - nominal).norm() == 0.0);
}

TEST_CASE("manipulator closed loop matches the damped second-order solution") {
  // m p_dd + D p_d + K e = 0 along one axis, via the engine-grade integrator.
  const double m = 0.3, K = 50.0, D = 8.0, e0 = 0.02;
  const double dt = 1e-3, t_end = 3.0;
  VecX x(2);
  x << e0, 0.0;
  const auto field = [&](double, const VecX& y) {
    VecX dy(2);
    dy << y(1), (-K * y(0) - D * y(1)) / m;
    return dy;
  };
  int n = static_cast<int>(t_end / dt);
  for (int k = 0; k < n; ++k) x = rk4_step(field, k * dt, x, dt);

  const double wn = std::sqrt(K / m);
  const double zeta = D / (2.0 * std::sqrt(K * m));
  REQUIRE(zeta > 1.0);  // overdamped with these gains
  const double r1 = -wn * (zeta - std::sqrt(zeta * zeta - 1.0));
  const double r2 = -wn * (zeta + std::sqrt(zeta * zeta - 1.0));
  const double c1 = e0 * r2 / (r2 - r1);
  const double c2 = e0 - c1;
  const double expected = c1 * std::exp(r1 * t_end) + c2 * std::exp(r2 * t_end);
  CHECK(x(0) == doctest::Approx(expected).epsilon(1e-8));
}
