#include "airgrasp/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace airgrasp {

std::string_view mission_name(MissionPhase m) {
  switch (m) {
    case MissionPhase::FreeFlight: return "free_flight";
    case MissionPhase::Dock: return "dock";
    case MissionPhase::AerialGrasp: return "aerial_grasp";
  }
  return "?";
}

ThrustTorque mixer_forward(const RotorThrusts& f, const UavParams& p) {
  const double d = p.arm_length;
  const double c = p.torque_thrust_ratio;
  ThrustTorque out;
  out.thrust = f(0) + f(1) + f(2) + f(3);
  out.torque.x() = -d * f(1) + d * f(3);
  out.torque.y() = d * f(0) - d * f(2);
  out.torque.z() = -c * f(0) + c * f(1) - c * f(2) + c * f(3);
  return out;
}

RotorThrusts mixer_inverse(const ThrustTorque& in, const UavParams& p) {
  const double d = p.arm_length;
  const double c = p.torque_thrust_ratio;
  if (d == 0.0 || c == 0.0) {
    throw std::invalid_argument("mixer_inverse: allocation matrix is singular (d or c is zero)");
  }
  const double q = in.thrust / 4.0;
  const double mx = in.torque.x() / (2.0 * d);
  const double my = in.torque.y() / (2.0 * d);
  const double mz = in.torque.z() / (4.0 * c);
  RotorThrusts f;
  f(0) = q + my - mz;
  f(1) = q - mx + mz;
  f(2) = q - my - mz;
  f(3) = q + mx + mz;
  return f;
}

Vec3 gyroscopic_moment(const RotorThrusts& thrusts, const Vec3& omega, const UavParams& p) {
  if (p.gyro_model == GyroModel::Zero) return Vec3::Zero();
  // Rotors 1,3 spin opposite to 2,4; speed from thrust via f = k_f Omega^2.
  double net_momentum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double f = std::max(thrusts(i), 0.0);
    const double speed = std::sqrt(f / p.thrust_coefficient);
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    net_momentum += sign * p.rotor_inertia * speed;
  }
  return net_momentum * omega.cross(Vec3::UnitZ());
}

Vec3 mount_coupling_moment(const Wrench& w_man, const Mat3& r_b, const ManipulatorParams& manip) {
  const Mat3& r_m = manip.mount_pose.orientation;
  return r_b * (r_m * w_man.moment) +
         r_b * ((r_m * w_man.force).cross(manip.mount_pose.position));
}

Accel uav_accel(const SystemState& st, const ThrustTorque& in, const Wrench& w_man,
                const Vec3& m_gy, const UavParams& p, const ManipulatorParams& manip) {
  const Mat3& r_b = st.r_b;
  const Mat3& r_m = manip.mount_pose.orientation;

  Accel a;
  const Vec3 gravity = p.mass * kGravity * gravity_dir_inertial();
  const Vec3 thrust = in.thrust * (r_b * Vec3(0.0, 0.0, -1.0));
  const Vec3 coupling = r_b * (r_m * w_man.force);
  a.linear = (gravity + thrust + coupling) / p.mass;

  const Vec3 gyro_rigid = -st.omega.cross(p.inertia * st.omega);
  a.angular = p.inertia.inverse() *
              (gyro_rigid + m_gy + in.torque + mount_coupling_moment(w_man, r_b, manip));
  return a;
}

Wrench manipulator_reaction(const SystemState& st, const ManipulatorParams& mp,
                            const Vec3& accel_e, const Wrench& f_h, double effective_mass) {
  const Mat3 r_m_i = st.r_b * mp.mount_pose.orientation;
  // eta carries the manipulator's own gravity; the weight of anything the
  // gripper holds arrives through f_h. Only the inertial term scales with
  // the carried point mass.
  const Vec3 eta_man = weight_in_frame(mp.mass, r_m_i);
  const Vec3 content = -eta_man + effective_mass * accel_e;
  Wrench out;
  out.frame = Frame::ManipBase;
  out.force = content + f_h.force;
  out.moment = content.cross(st.p_e) + f_h.moment + f_h.force.cross(st.p_e);
  return out;
}

Wrench gripper_reaction(const SystemState& st, const ManipulatorParams& manip,
                        const GripperParams& gp, const Vec3& f_phal, const Wrench& w_obj) {
  const Pose ee_i = end_effector_in_inertial(st, manip);
  const Vec3 eta_h = weight_in_frame(gp.phalange_mass, ee_i.orientation);
  const Pose object_in_ee = ee_i.inverse().compose(st.object_pose);
  const Mat3& r_o_e = object_in_ee.orientation;
  const Vec3& p_o_e = object_in_ee.position;

  Wrench out;
  out.frame = Frame::EndEffector;
  const Vec3 content = -eta_h + f_phal;
  out.force = content + r_o_e * w_obj.force;
  out.moment = content.cross(gp.cg_offset) + r_o_e * w_obj.moment +
               (r_o_e * w_obj.force).cross(p_o_e);
  return out;
}

Wrench object_inertial_wrench(const SystemState& st, const ObjectParams& op, const Vec3& accel) {
  if (st.mission != MissionPhase::AerialGrasp) {
    throw std::logic_error("object_inertial_wrench: object is not part of the system outside aerial grasp");
  }
  const Mat3& r_o_i = st.object_pose.orientation;
  Wrench out;
  out.frame = Frame::Object;
  out.force = r_o_i.transpose() * (op.mass * (kGravity * gravity_dir_inertial() - accel));
  out.moment = op.cg_offset.cross(out.force);
  return out;
}

}  // namespace airgrasp
