#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace airgrasp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Reference frames of the vehicle-manipulator-gripper chain.
enum class Frame : std::uint8_t {
  Inertial,      // F_i, z points down
  Body,          // F_b, UAV centre of gravity
  ManipBase,     // F_m, manipulator base (x up, z forward)
  EndEffector,   // F_e, palm / end-effector plate
  Finger1,       // F_f1..F_f3, finger contact frames
  Finger2,
  Finger3,
  Object,        // F_o
};

std::string_view frame_name(Frame f);

/// Rigid transform of a source frame expressed in a target frame.
/// `orientation` maps source coordinates into target coordinates,
/// `position` is the source origin in target coordinates.
struct Pose {
  Vec3 position{Vec3::Zero()};
  Mat3 orientation{Mat3::Identity()};

  static Pose identity() { return {}; }

  /// Coordinates of a source-frame point in the target frame.
  Vec3 apply(const Vec3& p_src) const { return position + orientation * p_src; }

  /// this ∘ other: first map through `other`, then through `this`.
  Pose compose(const Pose& other) const {
    return {position + orientation * other.position, orientation * other.orientation};
  }

  Pose inverse() const {
    Mat3 rt = orientation.transpose();
    return {-(rt * position), rt};
  }
};

/// Force-moment pair tagged with the frame its coordinates live in.
struct Wrench {
  Vec3 force{Vec3::Zero()};
  Vec3 moment{Vec3::Zero()};
  Frame frame{Frame::Inertial};

  static Wrench zero(Frame f) { return {Vec3::Zero(), Vec3::Zero(), f}; }

  Wrench operator+(const Wrench& o) const { return {force + o.force, moment + o.moment, frame}; }
  Wrench operator-() const { return {-force, -moment, frame}; }

  bool all_finite() const { return force.allFinite() && moment.allFinite(); }
};

/// skew(v) * w == v x w; skew(v)^T == -skew(v).
Mat3 skew(const Vec3& v);

/// Inverse of skew on antisymmetric matrices (the vee map).
Vec3 unskew(const Mat3& m);

/// Moment-transport convention used throughout the wrench balances:
///   f' = R f,  m' = R m + (R f) x p
/// with (R, p) the pose of the wrench's frame in the target frame.
Wrench wrench_transform(const Wrench& w, const Pose& pose_of_source_in_target,
                        Frame target = Frame::Inertial);

/// Moore-Penrose pseudoinverse by SVD. Singular values below
/// `rel_tol * sigma_max` are truncated.
MatX pinv(const MatX& m, double rel_tol = 1e-10);

/// Nearest rotation matrix (polar decomposition); used to remove
/// integration drift from attitude states.
Mat3 orthonormalize(const Mat3& m);

/// Rotation about a unit axis by `angle` radians (exp of skew(axis*angle)).
Mat3 axis_angle(const Vec3& axis, double angle);

/// Geodesic distance on SO(3) in radians.
double rotation_angle(const Mat3& r_a, const Mat3& r_b);

/// R = Rz(yaw) * Ry(pitch) * Rx(roll), angles in radians.
Mat3 rotation_from_rpy(double roll, double pitch, double yaw);

}  // namespace airgrasp
