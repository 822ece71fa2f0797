#pragma once

#include "airgrasp/contact.hpp"
#include "airgrasp/control.hpp"
#include "airgrasp/dynamics.hpp"
#include "airgrasp/mission.hpp"
#include "airgrasp/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace airgrasp {

enum class IntegratorKind : std::uint8_t { RK4, SemiImplicitEuler };

struct SimConfig {
  double dt = 1e-3;       // s
  double t_end = 5.0;     // s
  IntegratorKind integrator = IntegratorKind::RK4;
  std::uint64_t seed = 0;
  bool clamp_thrust = false;
  double thrust_min = 0.0;   // N per rotor, applied when clamp_thrust
  double thrust_max = 40.0;  // N per rotor
  double divergence_limit = 1e6;
  double yaw_ref = 0.0;      // rad, heading held by the attitude loop

  bool valid() const { return dt > 0.0 && t_end > dt; }
};

/// Every physical and control parameter of the cascade.
struct ModelParams {
  UavParams uav;
  ManipulatorParams manip;
  GripperParams gripper;
  ObjectParams object;
  ContactParams contact;
  GripperGeometry geometry;
  ImpedanceGains uav_gains{Vec3(8, 8, 8), Vec3(5, 5, 5)};
  ImpedanceGains manip_gains{Vec3(50, 50, 50), Vec3(8, 8, 8)};
  GripperGains gripper_gains;
  AttitudeGains attitude_gains;
  double breakaway_force = 5.0;        // N, wall attachment
  double grasp_secure_threshold = 0.1; // N on every phalange normal
  double grasp_secure_dwell = 0.05;    // s
  double press_depth = 0.003;          // m, tracking target beyond the face

  FeedForward feed_forward() const {
    return FeedForward::nominal(uav, manip, gripper, object);
  }
};

struct SubsystemEnergy {
  double kinetic = 0.0;
  double potential = 0.0;   // controller spring, referenced to the setpoint
  double supply = 0.0;      // cumulative input energy through d (and reference motion)
  double dissipation = 0.0; // cumulative damper losses

  double storage() const { return kinetic + potential; }
};

struct EnergyRecord {
  SubsystemEnergy uav;
  SubsystemEnergy manip;
  SubsystemEnergy gripper;

  double kinetic() const { return uav.kinetic + manip.kinetic + gripper.kinetic; }
  double potential() const { return uav.potential + manip.potential + gripper.potential; }
  double storage() const { return kinetic() + potential(); }
  double supply() const { return uav.supply + manip.supply + gripper.supply; }
  double dissipation() const {
    return uav.dissipation + manip.dissipation + gripper.dissipation;
  }
};

struct TraceStep {
  double t = 0.0;
  SystemState state;
  Setpoints setpoints;
  double gripper_target = 0.0;  // effective aperture setpoint after hold logic
  // Interconnection wrenches (directions noted in the fields of ChainForces).
  Wrench w_man{Vec3::Zero(), Vec3::Zero(), Frame::ManipBase};
  Wrench f_h{Vec3::Zero(), Vec3::Zero(), Frame::EndEffector};
  Wrench w_obj{Vec3::Zero(), Vec3::Zero(), Frame::Object};
  VecX f_c{VecX::Zero(kContactForceDim)};
  double thrust = 0.0;
  Vec3 torque{Vec3::Zero()};
  RotorThrusts rotors{RotorThrusts::Zero()};
  double attitude_error = 0.0;  // rad, actual vs commanded
  // Subsystem inputs for the passivity bookkeeping.
  Vec3 d_uav{Vec3::Zero()};
  Vec3 d_man{Vec3::Zero()};
  double d_grip = 0.0;
  EnergyRecord energy;
  double palm_pen = 0.0;
  double max_penetration = 0.0;
  double min_finger_normal = 0.0;
  double wall_tension = 0.0;
  bool impact_flag = false;     // contact set changed or state clamped this step
  bool tracking_clamped = false;
  bool thrust_degenerate = false;
};

struct SimTrace {
  double dt = 0.0;
  IntegratorKind integrator = IntegratorKind::RK4;
  std::vector<TraceStep> steps;
  bool diverged = false;
  double diverged_at = -1.0;
  std::string abort_reason;
  double contact_time = -1.0;
  double secured_time = -1.0;
  double detach_time = -1.0;

  bool empty() const { return steps.empty(); }
};

/// Setpoint schedule: evaluated at every step start with the live state (the
/// tracking setpoint needs the vehicle pose) and the entry time of the
/// current mission phase.
using SetpointProvider =
    std::function<Setpoints(double t, const SystemState& state, double mission_entry_time)>;

/// One classical RK4 step of dx/dt = f(t, x).
VecX rk4_step(const std::function<VecX(double, const VecX&)>& f, double t, const VecX& x,
              double dt);

/// Interconnection forces of the cascade for one state under frozen controls;
/// exposed for tests of the chain sign discipline.
struct ChainForces {
  ContactSet contacts;
  GraspMatrix grasp;
  Wrench w_obj;       // object-side wrench, F_o (object content handed down)
  Wrench f_h;         // wrench the manipulator applies to the gripper, F_e
  Wrench f_man_cmd;   // wrench the vehicle side applies to the manipulator, F_m
  Wrench w_man;       // reaction consumed by the vehicle equation: -f_man_cmd
  Vec3 accel_e{Vec3::Zero()};
  double s_ddot = 0.0;
  double aperture_coupling = 0.0;  // generalized contact force on the DOF
};

class Engine {
 public:
  Engine(ModelParams params, SimConfig config);

  /// Deterministic fixed-step simulation. Divergence aborts the run and marks
  /// the returned trace instead of throwing.
  SimTrace run(const SetpointProvider& setpoints, const SystemState& initial) const;

  /// Single fixed-step advance with controls held over the step.
  SystemState step(const SystemState& state, const Setpoints& setpoints) const;

  /// Interconnection forces at a state under the controls the engine would
  /// apply there (lag-free); used by diagnostics and tests.
  ChainForces chain(const SystemState& state, const Setpoints& setpoints) const;

  struct Accelerations {
    Vec3 uav_linear{Vec3::Zero()};
    Vec3 uav_angular{Vec3::Zero()};
    Vec3 arm{Vec3::Zero()};
    double aperture = 0.0;
  };
  /// Instantaneous accelerations of every subsystem at a state.
  Accelerations accelerations(const SystemState& state, const Setpoints& setpoints) const;

  const ModelParams& params() const { return params_; }
  const SimConfig& config() const { return config_; }

 private:
  ModelParams params_;
  SimConfig config_;
};

struct PassivityCheck {
  int violations = 0;        // outside flagged steps
  int flagged_violations = 0;
  double worst_residual = 0.0;
  int worst_step = -1;
};

struct PassivityReport {
  bool passed = false;
  int flagged_steps = 0;
  PassivityCheck uav;
  PassivityCheck manip;
  PassivityCheck gripper;

  int total_violations() const {
    return uav.violations + manip.violations + gripper.violations;
  }
};

/// Verifies V(t_{k+1}) - V(t_k) <= supplied energy + tol per subsystem and
/// step. The tolerance is the documented integrator bound
///   tol = 10 dt^2 (K_max |v|^2 + D_max |v| |a|) + 1e-12,
/// widened for the first-order integrator by 5 dt^2 F^2 / m with
/// F = K|e| + D|v| + |d| (its per-step energy error scales with force times
/// acceleration), plus, on steps flagged as impacts, a relaxed term
/// proportional to k * delta_max^2.
PassivityReport passivity_monitor(const SimTrace& trace, const ModelParams& params);

}  // namespace airgrasp
