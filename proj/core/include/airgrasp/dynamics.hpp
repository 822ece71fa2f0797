#pragma once

#include "airgrasp/model.hpp"
#include "airgrasp/spatial.hpp"

namespace airgrasp {

/// Net thrust along -z_b plus control torque at the UAV c.g.
struct ThrustTorque {
  double thrust = 0.0;  // N
  Vec3 torque{Vec3::Zero()};  // N m, in F_b
};

using RotorThrusts = Eigen::Vector4d;

/// Propeller map: [f, Mx, My, Mz]^T = [1 1 1 1; 0 -d 0 d; d 0 -d 0; -c c -c c] * f_{1..4}.
ThrustTorque mixer_forward(const RotorThrusts& thrusts, const UavParams& params);

/// Exact inverse of the propeller map. Throws std::invalid_argument when the
/// allocation matrix is singular (zero arm length or torque ratio).
RotorThrusts mixer_inverse(const ThrustTorque& input, const UavParams& params);

/// Gyroscopic moment of the spinning rotors. Zero model returns 0; the
/// rotor-momentum model uses M_gy = J_r * sum_i(sign_i * Omega_i) * (omega x z_b).
Vec3 gyroscopic_moment(const RotorThrusts& thrusts, const Vec3& omega, const UavParams& params);

struct Accel {
  Vec3 linear{Vec3::Zero()};   // v_dot in F_i
  Vec3 angular{Vec3::Zero()};  // omega_dot in F_b
};

/// Coupling moment the manipulator imposes on the vehicle, exactly as it
/// enters the rotational balance: R_b R_m M + R_b (R_m f x p_m). Shared with
/// the attitude compensation so the two cancel bit-exactly.
Vec3 mount_coupling_moment(const Wrench& w_man, const Mat3& r_b, const ManipulatorParams& manip);

/// Vehicle translational/rotational accelerations. `w_man` is the wrench the
/// manipulator applies to the vehicle at the mount, expressed in F_m:
///   m v_dot = m g z_i + f_p R_b [0,0,-1]^T + R_b R_m f
///   J w_dot = -w x J w + M_gy + M_p + R_b R_m M + R_b (R_m f x p_m)
Accel uav_accel(const SystemState& state, const ThrustTorque& input, const Wrench& w_man,
                const Vec3& m_gy, const UavParams& params, const ManipulatorParams& manip);

/// Wrench the vehicle-side actuators apply to the manipulator base, in F_m:
///   f_man = -eta_man + m * a_e + R_e^m f_h
/// with eta_man the manipulator's own weight in F_m and f_h the wrench the
/// manipulator applies to the gripper (in F_e). `effective_mass` is the
/// point mass carried at the end-effector for the inertial term only
/// (manipulator mass, plus the object mass once it is rigidly grasped);
/// gravity of anything held below arrives through f_h. Moments are levered
/// at p_e^m using the (force x position) transport convention.
Wrench manipulator_reaction(const SystemState& state, const ManipulatorParams& params,
                            const Vec3& accel_e, const Wrench& f_h, double effective_mass);

/// Wrench the manipulator applies to the gripper, in F_e:
///   f_h = -eta_h + f_phal + R_o^e f_obj
/// with eta_h the lumped phalange weight in F_e, f_phal the phalange inertial
/// force, and `w_obj` the wrench the gripper applies to the object (in F_o).
Wrench gripper_reaction(const SystemState& state, const ManipulatorParams& manip,
                        const GripperParams& params, const Vec3& f_phal, const Wrench& w_obj);

/// Inertial-plus-gravitational content of the rigidly grasped object in F_o
/// (what the object hands down the chain): f = m (g z_i - a), with `accel`
/// the object's absolute acceleration in F_i. Only meaningful in the aerial
/// grasp phase; throws std::logic_error otherwise.
Wrench object_inertial_wrench(const SystemState& state, const ObjectParams& params,
                              const Vec3& accel = Vec3::Zero());

}  // namespace airgrasp
