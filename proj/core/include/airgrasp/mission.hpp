#pragma once

#include "airgrasp/contact.hpp"
#include "airgrasp/dynamics.hpp"
#include "airgrasp/model.hpp"

namespace airgrasp {

/// Edge detections feeding the mission machine. All flags are monotone
/// within a run: once raised they stay raised.
struct TransitionEvents {
  bool contact_made = false;   // first palm penetration
  bool grasp_secured = false;  // all phalange contacts loaded for the dwell time
  bool detach = false;         // wall attachment released
};

/// FreeFlight -> Dock on contact, Dock -> AerialGrasp on secured + detach.
/// No reverse transitions. Detach reported before any contact is rejected as
/// an inconsistent event stream (std::logic_error).
MissionPhase step_mission(MissionPhase current, const TransitionEvents& events);

/// Object-side wrench in F_o for the current phase: zero in free flight, the
/// grasp-matrix aggregation of the contact forces while docked, and the
/// object's inertial-plus-gravitational content once grasped.
Wrench environment_wrench(const SystemState& state, const GraspMatrix& grasp,
                          const VecX& stacked_contact_forces, const ObjectParams& object,
                          const Vec3& object_accel = Vec3::Zero());

}  // namespace airgrasp
