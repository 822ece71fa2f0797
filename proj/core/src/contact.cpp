#include "airgrasp/contact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace airgrasp {

double hunt_crossley_normal(double penetration, double penetration_rate,
                            const ContactParams& p) {
  if (penetration < 0.0) {
    throw std::invalid_argument("hunt_crossley_normal: negative penetration");
  }
  if (penetration == 0.0) return 0.0;
  const double f = p.stiffness * std::pow(penetration, p.hertz_exponent) *
                   (1.0 + p.damping * penetration_rate);
  return std::max(f, 0.0);
}

Vec3 tangential_friction(const Vec3& v_t, double f_n, const ContactParams& p) {
  const double speed = v_t.norm();
  return -p.friction * f_n / std::max(speed, p.v_reg) * v_t;
}

std::string_view contact_name(int index) {
  switch (index) {
    case 0: return "f1";
    case 1: return "f2";
    case 2: return "f3";
    case 3: return "f4";
    case 4: return "f5";
    case 5: return "f6";
    case 6: return "palm";
  }
  return "?";
}

Vec3 GripperGeometry::synergy_dir(int index) const {
  if (index == kPalmContact) return Vec3::Zero();
  const double theta = finger_angles_rad[static_cast<std::size_t>(index / 2)];
  return {std::cos(theta), std::sin(theta), 0.0};
}

Vec3 GripperGeometry::point_in_ee(int index, double aperture) const {
  if (index == kPalmContact) return {0.0, 0.0, palm_offset};
  const double station = finger_stations[static_cast<std::size_t>(index % 2)];
  return synergy_dir(index) * aperture + Vec3(0.0, 0.0, station);
}

VecX GripperGeometry::synergy_stack() const {
  VecX s = VecX::Zero(kContactForceDim);
  for (int k = 0; k < kNumContacts; ++k) {
    s.segment<3>(3 * k) = synergy_dir(k);
  }
  return s;
}

VecX ContactSet::stacked_forces() const {
  VecX f = VecX::Zero(kContactForceDim);
  for (int k = 0; k < kNumContacts; ++k) {
    f.segment<3>(3 * k) = points[static_cast<std::size_t>(k)].force;
  }
  return f;
}

double ContactSet::aperture_force(const GripperGeometry& geom, const Pose& object_in_ee) const {
  double q = 0.0;
  for (int k = 0; k < kNumContacts; ++k) {
    const auto& pt = points[static_cast<std::size_t>(k)];
    if (!pt.active) continue;
    const Vec3 force_in_ee = object_in_ee.orientation * (pt.frame_in_object.orientation * pt.force);
    q += geom.synergy_dir(k).dot(force_in_ee);
  }
  return q;
}

double ContactSet::min_finger_normal() const {
  double m = points[0].normal_force();
  for (int k = 1; k < kPalmContact; ++k) {
    m = std::min(m, points[static_cast<std::size_t>(k)].normal_force());
  }
  return m;
}

double ContactSet::max_penetration() const {
  double m = 0.0;
  for (const auto& pt : points) m = std::max(m, pt.penetration);
  return m;
}

bool ContactSet::any_active() const {
  for (const auto& pt : points) {
    if (pt.active) return true;
  }
  return false;
}

GraspMatrix build_grasp_matrix(const std::array<Pose, kNumContacts>& frames) {
  GraspMatrix gm;
  for (int k = 0; k < kNumContacts; ++k) {
    const auto& f = frames[static_cast<std::size_t>(k)];
    gm.g.block<3, 3>(0, 3 * k) = f.orientation;
    gm.g.block<3, 3>(3, 3 * k) = skew(f.position) * f.orientation;
  }
  return gm;
}

Wrench object_wrench_docked(const GraspMatrix& gm, const VecX& f_c) {
  if (f_c.size() != kContactForceDim) {
    throw std::invalid_argument("object_wrench_docked: stacked force vector must have 21 entries");
  }
  const Eigen::Matrix<double, 6, 1> w = gm.g * f_c;
  return {w.head<3>(), w.tail<3>(), Frame::Object};
}

namespace {

// World velocity of a gripper-fixed material point.
Vec3 point_velocity_world(const SystemState& st, const ManipulatorParams& manip,
                          const Vec3& point_in_ee, const Vec3& synergy_dir) {
  const Vec3 r_b = manip.mount_pose.position +
                   manip.mount_pose.orientation * (st.p_e + point_in_ee);
  const Mat3 r_m_i = st.r_b * manip.mount_pose.orientation;
  return st.v_b + st.r_b * st.omega.cross(r_b) + r_m_i * (st.v_e + synergy_dir * st.s_dot);
}

// Right-handed contact frame with z along the outward normal.
Mat3 frame_from_normal(const Vec3& normal, const Vec3& tangent_hint) {
  const Vec3 z = normal.normalized();
  Vec3 x = tangent_hint - tangent_hint.dot(z) * z;
  if (x.norm() < 1e-9) {
    x = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;
    if (x.norm() < 1e-9) x = Vec3::UnitY() - Vec3::UnitY().dot(z) * z;
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

}  // namespace

ContactSet resolve_contacts(const SystemState& st, const ManipulatorParams& manip,
                            const GripperParams& gripper, const GripperGeometry& geom,
                            const ObjectParams& object, const ContactParams& params) {
  (void)gripper;
  ContactSet set;
  const Pose ee_i = end_effector_in_inertial(st, manip);
  const Pose obj_inv = st.object_pose.inverse();
  const double half_depth = object.depth / 2.0;

  for (int k = 0; k < kNumContacts; ++k) {
    auto& pt = set.points[static_cast<std::size_t>(k)];
    pt.index = k;
    const Vec3 p_e = geom.point_in_ee(k, st.s);
    const Vec3 syn = geom.synergy_dir(k);
    const Vec3 q_i = ee_i.apply(p_e);
    const Vec3 q_o = obj_inv.apply(q_i);
    const Vec3 v_i = point_velocity_world(st, manip, p_e, syn);

    double delta = 0.0;
    Vec3 n_o = Vec3::Zero();
    bool touching = false;

    if (k == kPalmContact) {
      // Plane-point contact on the free face of the knob.
      const double lateral = q_o.tail<2>().norm();
      delta = q_o.x() + half_depth;
      touching = delta > 0.0 && delta < object.depth && lateral < object.half_width;
      n_o = -Vec3::UnitX();
    } else {
      // Radial point contact on the lateral surface.
      const Vec3 radial(0.0, q_o.y(), q_o.z());
      const double rho = radial.norm();
      const bool in_band = q_o.x() >= -half_depth && q_o.x() <= half_depth;
      delta = object.half_width - rho;
      touching = in_band && delta > 0.0;
      if (rho > 1e-9) {
        n_o = radial / rho;
      } else {
        n_o = obj_inv.orientation * (ee_i.orientation * syn);
        n_o.x() = 0.0;
        n_o = n_o.norm() > 1e-9 ? Vec3(n_o.normalized()) : Vec3::UnitY();
      }
    }

    const Mat3 r_c_o = frame_from_normal(n_o, Vec3::UnitX());
    pt.frame_in_object = Pose{q_o, r_c_o};

    if (!touching) continue;

    const Vec3 n_i = st.object_pose.orientation * n_o;
    pt.penetration = delta;
    pt.penetration_rate = -v_i.dot(n_i);
    const Vec3 v_t_world = v_i - v_i.dot(n_i) * n_i;
    const Mat3 r_c_i = st.object_pose.orientation * r_c_o;
    pt.tangential_velocity = r_c_i.transpose() * v_t_world;

    const double f_n = hunt_crossley_normal(delta, pt.penetration_rate, params);
    const Vec3 f_t = tangential_friction(pt.tangential_velocity, f_n, params);
    pt.force = Vec3(f_t.x(), f_t.y(), f_n);
    pt.active = f_n > 0.0;
  }
  return set;
}

double palm_penetration(const SystemState& st, const ManipulatorParams& manip,
                        const GripperGeometry& geom, const ObjectParams& object) {
  const Pose ee_i = end_effector_in_inertial(st, manip);
  const Vec3 q_o = st.object_pose.inverse().apply(ee_i.apply(geom.point_in_ee(kPalmContact, st.s)));
  if (q_o.tail<2>().norm() >= object.half_width) return 0.0;
  return std::max(q_o.x() + object.depth / 2.0, 0.0);
}

bool check_detach(const Wrench& pull_on_object, WallAttachment& att) {
  if (!att.attached) return false;
  // The free face of the knob looks along -x in F_o; tension is the pull
  // away from the wall.
  const double tension = pull_on_object.force.dot(-Vec3::UnitX());
  const bool over = tension > att.breakaway_force;
  if (over && att.over_threshold_prev) att.attached = false;
  att.over_threshold_prev = over;
  return att.attached;
}

}  // namespace airgrasp
