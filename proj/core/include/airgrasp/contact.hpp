#pragma once

#include "airgrasp/model.hpp"
#include "airgrasp/spatial.hpp"

#include <array>
#include <string_view>

namespace airgrasp {

struct ContactParams {
  double stiffness = 5000.0;    // k, N/m^n
  double hertz_exponent = 1.5;  // n
  double damping = 0.5;         // lambda, s/m
  double friction = 0.8;        // mu
  double v_reg = 1e-3;          // m/s, friction regularization velocity

  bool valid() const {
    return stiffness > 0.0 && hertz_exponent >= 1.0 && damping >= 0.0 && friction >= 0.0 &&
           v_reg > 0.0;
  }
};

/// Hunt-Crossley normal force f_n = k δ^n (1 + λ δ_dot), clamped at zero
/// (contact cannot pull). Negative penetration signals a geometry bug
/// upstream and throws std::invalid_argument.
double hunt_crossley_normal(double penetration, double penetration_rate,
                            const ContactParams& params);

/// Regularized Coulomb friction acting on the moving body:
///   f_t = -mu f_n v_t / max(|v_t|, v_reg)
/// so |f_t| <= mu f_n always holds.
Vec3 tangential_friction(const Vec3& tangential_velocity, double normal_force,
                         const ContactParams& params);

inline constexpr int kNumContacts = 7;      // 6 phalange points + palm
inline constexpr int kPalmContact = 6;      // index of the palm point
inline constexpr int kContactForceDim = 3 * kNumContacts;

std::string_view contact_name(int index);   // f1..f6, palm

/// Fixed gripper kinematics: fingers close radially around the approach axis
/// z_e; the aperture DOF s is the radial distance of the contact points.
struct GripperGeometry {
  double palm_offset = 0.02;                       // palm point at z_e = palm_offset
  std::array<double, 2> finger_stations{0.035, 0.055};  // z_e of proximal/distal contacts
  std::array<double, 3> finger_angles_rad{
      0.0, 2.0943951023931953, 4.1887902047863905};  // around z_e from x_e

  /// Radial closing direction of contact k in F_e (zero for the palm).
  Vec3 synergy_dir(int index) const;
  /// Contact point position in F_e at aperture s.
  Vec3 point_in_ee(int index, double aperture) const;
  /// 21-element synergy stack d(point)/d(aperture) in F_e coordinates.
  VecX synergy_stack() const;
};

struct ContactPoint {
  int index = 0;
  Pose frame_in_object;        // x,y tangential, z = outward normal (toward the gripper)
  double penetration = 0.0;    // m, >= 0 while touching
  double penetration_rate = 0.0;  // m/s
  Vec3 tangential_velocity{Vec3::Zero()};  // gripper point rel. object, contact frame
  Vec3 force{Vec3::Zero()};    // force on the gripper point, contact frame
  bool active = false;

  double normal_force() const { return force.z(); }
  double tangential_force() const { return force.head<2>().norm(); }
};

struct ContactSet {
  std::array<ContactPoint, kNumContacts> points;

  /// f_c in R^21: per-point forces on the phalanges and palm, contact frames,
  /// ordered f1..f6 then palm.
  VecX stacked_forces() const;
  /// Generalized force of the contact set on the aperture DOF (virtual work
  /// of the on-gripper forces through the synergy).
  double aperture_force(const GripperGeometry& geom, const Pose& object_in_ee) const;
  double min_finger_normal() const;
  double max_penetration() const;
  bool any_active() const;
};

struct GraspMatrix {
  Eigen::Matrix<double, 6, kContactForceDim> g =
      Eigen::Matrix<double, 6, kContactForceDim>::Zero();
};

/// Assembles G from the 7 contact frames in F_o; block k is
/// [R_k; skew(p_k) R_k], so G f_c is the 6-D object-frame wrench equivalent
/// to the stacked contact forces.
GraspMatrix build_grasp_matrix(const std::array<Pose, kNumContacts>& frames_in_object);

/// w = G f_c, expressed in F_o. Throws std::invalid_argument on a wrong-size
/// stack.
Wrench object_wrench_docked(const GraspMatrix& g, const VecX& stacked_forces);

/// Geometry + material resolution for every contact point. Object treated as
/// a knob sticking out of the wall: a cylinder of radius `half_width` around
/// its x axis, fronted by a plane for the palm. Points outside the axial band
/// or not penetrating contribute zeros.
ContactSet resolve_contacts(const SystemState& state, const ManipulatorParams& manip,
                            const GripperParams& gripper, const GripperGeometry& geom,
                            const ObjectParams& object, const ContactParams& params);

/// Palm penetration depth for the current state (no forces); used by the
/// mission machine to detect first touch.
double palm_penetration(const SystemState& state, const ManipulatorParams& manip,
                        const GripperGeometry& geom, const ObjectParams& object);

struct WallAttachment {
  Pose attach_pose;               // F_o in F_i while on the wall
  double breakaway_force = 5.0;   // N
  bool attached = true;
  bool over_threshold_prev = false;
};

/// Updates the attachment from the wrench the gripper applies to the object
/// (in F_o). Detaches once the wall-normal tensile component has exceeded
/// the breakaway force for one full step. Returns the new attached flag.
bool check_detach(const Wrench& pull_on_object, WallAttachment& attachment);

}  // namespace airgrasp
