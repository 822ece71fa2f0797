#pragma once

#include "airgrasp/contact.hpp"
#include "airgrasp/model.hpp"
#include "airgrasp/spatial.hpp"

namespace airgrasp {

/// Diagonal spring/damper pair of one Cartesian impedance loop.
struct ImpedanceGains {
  Vec3 stiffness{8.0, 8.0, 8.0};  // N/m
  Vec3 damping{5.0, 5.0, 5.0};    // N s/m

  bool valid() const {
    return stiffness.minCoeff() > 0.0 && damping.minCoeff() > 0.0;
  }
};

struct GripperGains {
  double stiffness = 100.0;  // N/m on the aperture DOF
  double damping = 5.0;      // N s/m

  bool valid() const { return stiffness > 0.0 && damping > 0.0; }
};

/// Inner-loop SO(3) gains, scaled by the vehicle inertia. The inner loop
/// must be much faster than the position loop it serves; the defaults give
/// a 20 rad/s critically damped loop, an order of magnitude above the
/// default outer bandwidth.
struct AttitudeGains {
  double kr = 400.0;
  double kw = 40.0;
};

/// Gravity compensation terms per mission phase. The dock phase holds the
/// free-flight values; the grasp entries add the object weight. The gripper
/// grasp entry depends on the grasp configuration and is finalized by the
/// engine when the object comes off the wall.
struct FeedForward {
  Vec3 uav_free{Vec3::Zero()};
  Vec3 uav_grasp{Vec3::Zero()};
  Vec3 manip_free{Vec3::Zero()};
  Vec3 manip_grasp{Vec3::Zero()};
  double gripper_free = 0.0;
  double gripper_grasp = 0.0;

  Vec3 uav(MissionPhase m) const {
    return m == MissionPhase::AerialGrasp ? uav_grasp : uav_free;
  }
  Vec3 manip(MissionPhase m) const {
    return m == MissionPhase::AerialGrasp ? manip_grasp : manip_free;
  }
  double gripper(MissionPhase m) const {
    return m == MissionPhase::AerialGrasp ? gripper_grasp : gripper_free;
  }

  /// Weights of the hanging chain at level attitude.
  static FeedForward nominal(const UavParams& uav, const ManipulatorParams& manip,
                             const GripperParams& gripper, const ObjectParams& object);
};

struct Setpoints {
  Vec3 p_b_star{Vec3::Zero()};   // desired UAV position, F_i
  Vec3 p_e_star{Vec3::Zero()};   // desired end-effector position, F_m
  double aperture_star = 0.0;    // desired finger aperture, m
  bool object_tracking_enabled = false;
};

/// u_uav = -K (p_b - p_b*) - D v - u_ff
Vec3 uav_control(const SystemState& state, const Setpoints& sp, const ImpedanceGains& gains,
                 const FeedForward& ff);

struct ThrustAttitude {
  double thrust = 0.0;    // N
  Mat3 r_star{Mat3::Identity()};
  bool degenerate = false;  // commanded force vanished (free-fall command)
};

/// Splits the desired force f_p R [0,0,-1]^T = u - m g z_i into scalar
/// thrust and a desired attitude whose -z body axis carries it, holding the
/// yaw reference. A vanishing force direction is reported as degenerate and
/// the current attitude is kept.
ThrustAttitude thrust_attitude_from_u(const Vec3& u_uav, double uav_mass, const Mat3& r_current,
                                      double yaw_ref = 0.0);

/// High-authority inner loop: J (-kr e_R - kw w) minus the mount coupling
/// moment, so the translational reduction of the outer loop holds.
Vec3 attitude_authority(const SystemState& state, const Mat3& r_star, const Wrench& w_man,
                        const AttitudeGains& gains, const UavParams& uav,
                        const ManipulatorParams& manip);

/// u_man = -K (p_e - p_e*) - D v_e - u_ff, in F_m.
Vec3 manipulator_control(const SystemState& state, const Setpoints& sp,
                         const ImpedanceGains& gains, const FeedForward& ff);

/// Base wrench command f_man = u_man - eta_man (force the vehicle-side
/// actuators apply to the manipulator); eta_man is the manipulator's own
/// weight in F_m.
Vec3 manipulator_base_command(const Vec3& u_man, const SystemState& state,
                              const ManipulatorParams& manip);

/// Scalar aperture impedance. The measured finger coordinate is recovered by
/// projecting the stacked phalange displacements through the Moore-Penrose
/// pseudoinverse of the synergy stack (the underactuation map). Outside the
/// dock phase the law regulates to the idle hold aperture (open in free
/// flight, closed with a grasped object).
double gripper_control(const SystemState& state, const Setpoints& sp, const GripperGains& gains,
                       const FeedForward& ff, const GripperGeometry& geom,
                       const GripperParams& params);

struct TrackingSetpoint {
  Vec3 p_e_star{Vec3::Zero()};
  bool clamped = false;
};

/// Inverse-kinematic image of the wall grasp point in F_m, placing the palm
/// `press_depth` beyond the free face; clamped to the workspace. When
/// tracking is disabled the nominal retracted setpoint is returned.
TrackingSetpoint object_tracking_setpoint(const Pose& uav_pose, const Pose& object_pose,
                                          bool enabled, const Vec3& nominal,
                                          const ManipulatorParams& manip,
                                          const ObjectParams& object, double palm_offset,
                                          double press_depth);

}  // namespace airgrasp
