#include "airgrasp/control.hpp"

#include "airgrasp/dynamics.hpp"

#include <cmath>

namespace airgrasp {

FeedForward FeedForward::nominal(const UavParams& uav, const ManipulatorParams& manip,
                                 const GripperParams& gripper, const ObjectParams& object) {
  (void)uav;
  FeedForward ff;
  const Mat3& r_m = manip.mount_pose.orientation;  // level attitude: R_b = I

  ff.uav_free = weight_in_frame(manip.mass + gripper.phalange_mass, Mat3::Identity());
  ff.uav_grasp = ff.uav_free + weight_in_frame(object.mass, Mat3::Identity());
  ff.manip_free = weight_in_frame(gripper.phalange_mass, r_m);
  ff.manip_grasp = ff.manip_free + weight_in_frame(object.mass, r_m);
  ff.gripper_free = 0.0;
  ff.gripper_grasp = 0.0;  // finalized from the grasp configuration at detach
  return ff;
}

Vec3 uav_control(const SystemState& st, const Setpoints& sp, const ImpedanceGains& g,
                 const FeedForward& ff) {
  const Vec3 e = st.p_b - sp.p_b_star;
  return -g.stiffness.cwiseProduct(e) - g.damping.cwiseProduct(st.v_b) - ff.uav(st.mission);
}

ThrustAttitude thrust_attitude_from_u(const Vec3& u, double mass, const Mat3& r_current,
                                      double yaw_ref) {
  ThrustAttitude out;
  const Vec3 f_des = u - mass * kGravity * gravity_dir_inertial();
  out.thrust = f_des.norm();
  if (out.thrust < 1e-9) {
    out.degenerate = true;
    out.r_star = r_current;
    return out;
  }
  // Thrust acts along R [0,0,-1]; the desired body z axis opposes f_des.
  const Vec3 z_b = -f_des / out.thrust;
  const Vec3 x_c(std::cos(yaw_ref), std::sin(yaw_ref), 0.0);
  Vec3 y_b = z_b.cross(x_c);
  if (y_b.norm() < 1e-9) {
    // Thrust parallel to the heading: fall back to the world y axis.
    y_b = z_b.cross(Vec3::UnitY());
  }
  y_b.normalize();
  const Vec3 x_b = y_b.cross(z_b);
  out.r_star.col(0) = x_b;
  out.r_star.col(1) = y_b;
  out.r_star.col(2) = z_b;
  return out;
}

Vec3 attitude_authority(const SystemState& st, const Mat3& r_star, const Wrench& w_man,
                        const AttitudeGains& g, const UavParams& uav,
                        const ManipulatorParams& manip) {
  const Vec3 e_r = 0.5 * unskew(r_star.transpose() * st.r_b - st.r_b.transpose() * r_star);
  const Vec3 pd = uav.inertia * (-g.kr * e_r - g.kw * st.omega);
  return pd - mount_coupling_moment(w_man, st.r_b, manip);
}

Vec3 manipulator_control(const SystemState& st, const Setpoints& sp, const ImpedanceGains& g,
                         const FeedForward& ff) {
  const Vec3 e = st.p_e - sp.p_e_star;
  return -g.stiffness.cwiseProduct(e) - g.damping.cwiseProduct(st.v_e) - ff.manip(st.mission);
}

Vec3 manipulator_base_command(const Vec3& u_man, const SystemState& st,
                              const ManipulatorParams& manip) {
  const Mat3 r_m_i = st.r_b * manip.mount_pose.orientation;
  return u_man - weight_in_frame(manip.mass, r_m_i);
}

double gripper_control(const SystemState& st, const Setpoints& sp, const GripperGains& g,
                       const FeedForward& ff, const GripperGeometry& geom,
                       const GripperParams& params) {
  double target = sp.aperture_star;
  if (st.mission == MissionPhase::FreeFlight) target = params.open_hold;
  if (st.mission == MissionPhase::AerialGrasp) target = params.closed_hold;

  // Measured finger coordinate through the underactuation map: stack the
  // phalange displacements from the open reference and project them back with
  // the pseudoinverse of the synergy stack.
  const VecX syn = geom.synergy_stack();
  const MatX recover = pinv(syn);  // 1 x 21
  VecX displacement(kContactForceDim);
  VecX rate(kContactForceDim);
  for (int k = 0; k < kNumContacts; ++k) {
    displacement.segment<3>(3 * k) = geom.point_in_ee(k, st.s) - geom.point_in_ee(k, 0.0);
    rate.segment<3>(3 * k) = geom.synergy_dir(k) * st.s_dot;
  }
  const double s_meas = (recover * displacement)(0);
  const double s_rate = (recover * rate)(0);

  return -g.stiffness * (s_meas - target) - g.damping * s_rate - ff.gripper(st.mission);
}

TrackingSetpoint object_tracking_setpoint(const Pose& uav_pose, const Pose& object_pose,
                                          bool enabled, const Vec3& nominal,
                                          const ManipulatorParams& manip,
                                          const ObjectParams& object, double palm_offset,
                                          double press_depth) {
  TrackingSetpoint out;
  if (!enabled) {
    out.p_e_star = nominal;
    return out;
  }
  // Palm target: press_depth beyond the free face of the knob.
  const Vec3 palm_target_i =
      object_pose.apply(Vec3(-object.depth / 2.0 + press_depth, 0.0, 0.0));
  const Pose base_i = uav_pose.compose(manip.mount_pose);
  const Vec3 target_m = base_i.inverse().apply(palm_target_i) - Vec3(0.0, 0.0, palm_offset);
  out.p_e_star = manip.workspace.clamp(target_m);
  out.clamped = (out.p_e_star - target_m).norm() > 1e-12;
  return out;
}

}  // namespace airgrasp
