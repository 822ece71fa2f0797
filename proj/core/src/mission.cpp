#include "airgrasp/mission.hpp"

#include <stdexcept>

namespace airgrasp {

MissionPhase step_mission(MissionPhase current, const TransitionEvents& ev) {
  if (ev.detach && !ev.contact_made) {
    throw std::logic_error("step_mission: detach event before any contact");
  }
  switch (current) {
    case MissionPhase::FreeFlight:
      return ev.contact_made ? MissionPhase::Dock : MissionPhase::FreeFlight;
    case MissionPhase::Dock:
      return (ev.grasp_secured && ev.detach) ? MissionPhase::AerialGrasp : MissionPhase::Dock;
    case MissionPhase::AerialGrasp:
      return MissionPhase::AerialGrasp;
  }
  return current;
}

Wrench environment_wrench(const SystemState& st, const GraspMatrix& grasp, const VecX& f_c,
                          const ObjectParams& object, const Vec3& object_accel) {
  switch (st.mission) {
    case MissionPhase::FreeFlight:
      return Wrench::zero(Frame::Object);
    case MissionPhase::Dock:
      return object_wrench_docked(grasp, f_c);
    case MissionPhase::AerialGrasp:
      return object_inertial_wrench(st, object, object_accel);
  }
  return Wrench::zero(Frame::Object);
}

}  // namespace airgrasp
