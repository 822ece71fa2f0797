#pragma once

#include "airgrasp/spatial.hpp"

#include <cstdint>
#include <string_view>

namespace airgrasp {

// Sign conventions used by every module:
//  - the inertial z axis points DOWN, so gravity is +g*z_i and the weight of a
//    mass m is m*g*z_i; propeller thrust acts along R_b^i*[0,0,-1]^T;
//  - interconnection wrenches carry the action of the upper body on the one
//    below it (vehicle on manipulator, manipulator on gripper, gripper on
//    object); the engine applies the Newton pair (a sign flip) where a
//    subsystem consumes the reaction instead.
inline constexpr double kGravity = 9.81;  // m/s^2

inline Vec3 gravity_dir_inertial() { return Vec3::UnitZ(); }

/// Weight vector of `mass` expressed in a frame whose rotation to the
/// inertial frame is `r_frame_to_inertial`.
inline Vec3 weight_in_frame(double mass, const Mat3& r_frame_to_inertial) {
  return mass * kGravity * (r_frame_to_inertial.transpose() * gravity_dir_inertial());
}

enum class GyroModel : std::uint8_t { Zero, RotorMomentum };

struct UavParams {
  double mass = 1.3;              // kg
  Mat3 inertia = (Vec3(0.02, 0.02, 0.03)).asDiagonal();  // kg m^2
  double arm_length = 0.2;        // m, c.g. to propeller centre
  double torque_thrust_ratio = 0.01;  // m, reaction torque per unit thrust
  GyroModel gyro_model = GyroModel::Zero;
  double rotor_inertia = 0.0;     // kg m^2, used by RotorMomentum only
  double thrust_coefficient = 1e-5;  // N/(rad/s)^2, maps thrust to rotor speed

  bool valid() const {
    return mass > 0.0 && arm_length > 0.0 && torque_thrust_ratio > 0.0 &&
           inertia.isApprox(inertia.transpose(), 1e-12) &&
           inertia.diagonal().minCoeff() > 0.0;
  }
};

struct WorkspaceBox {
  Vec3 min{0.0, -0.03, 0.0};
  Vec3 max{0.120, 0.03, 0.050};

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
};

/// Manipulator base frame convention: x is the height axis (up when the
/// vehicle is level), y is sideways, z is the forward/extension axis.
inline Mat3 default_mount_rotation() {
  Mat3 r;
  r.col(0) = Vec3(0, 0, -1);  // x_m = -z_b (up)
  r.col(1) = Vec3(0, 1, 0);   // y_m = y_b
  r.col(2) = Vec3(1, 0, 0);   // z_m = x_b (forward)
  return r;
}

struct ManipulatorParams {
  double mass = 0.3;  // kg, lumped at the end-effector
  Pose mount_pose{Vec3(0.12, 0.0, 0.0), default_mount_rotation()};  // F_m in F_b
  WorkspaceBox workspace;

  bool valid() const { return mass > 0.0; }
};

struct GripperParams {
  double phalange_mass = 0.08;  // kg, all phalanges lumped
  int n_fingers = 3;
  int n_phalanges_per_finger = 2;
  double aperture_min = 0.0;    // m
  double aperture_max = 0.045;  // m
  double open_hold = 0.045;     // idle aperture setpoint outside contact
  double closed_hold = 0.005;   // idle aperture setpoint with grasped object
  Vec3 cg_offset{Vec3::Zero()}; // phalange c.g. in F_e

  bool valid() const {
    return phalange_mass > 0.0 && aperture_min < aperture_max && n_fingers == 3 &&
           n_phalanges_per_finger == 2;
  }
};

struct ObjectParams {
  double mass = 0.1;     // kg
  double half_width = 0.025;   // m, radius of the graspable body
  double depth = 0.05;         // m, extent along the wall normal
  Pose attach_pose{Vec3(1.975, 0.0, -1.0), Mat3::Identity()};  // F_o in F_i on the wall
  Vec3 cg_offset{Vec3::Zero()};  // c.g. in F_o

  bool valid() const { return mass >= 0.0 && half_width > 0.0 && depth > 0.0; }
};

enum class MissionPhase : std::uint8_t { FreeFlight, Dock, AerialGrasp };

std::string_view mission_name(MissionPhase m);

struct SystemState {
  // UAV
  Vec3 p_b{Vec3::Zero()};   // position of F_b in F_i, m
  Vec3 v_b{Vec3::Zero()};   // velocity in F_i, m/s
  Mat3 r_b{Mat3::Identity()};  // F_b in F_i
  Vec3 omega{Vec3::Zero()}; // body rates in F_b, rad/s
  // Manipulator (integrated in F_m)
  Vec3 p_e{Vec3(0.06, 0.0, 0.02)};  // end-effector in F_m, m
  Vec3 v_e{Vec3::Zero()};           // m/s
  // Gripper aperture DOF
  double s = 0.045;   // m
  double s_dot = 0.0; // m/s
  // Object
  Pose object_pose{};  // F_o in F_i
  MissionPhase mission = MissionPhase::FreeFlight;

  bool all_finite() const {
    return p_b.allFinite() && v_b.allFinite() && r_b.allFinite() && omega.allFinite() &&
           p_e.allFinite() && v_e.allFinite() && std::isfinite(s) && std::isfinite(s_dot) &&
           object_pose.position.allFinite() && object_pose.orientation.allFinite();
  }
};

/// Pose of F_m in F_i for the given state.
inline Pose manip_base_in_inertial(const SystemState& st, const ManipulatorParams& mp) {
  return Pose{st.p_b, st.r_b}.compose(mp.mount_pose);
}

/// Pose of F_e in F_i. The delta structure keeps the platform orientation
/// fixed, so R_e^m = I.
inline Pose end_effector_in_inertial(const SystemState& st, const ManipulatorParams& mp) {
  return manip_base_in_inertial(st, mp).compose(Pose{st.p_e, Mat3::Identity()});
}

}  // namespace airgrasp
