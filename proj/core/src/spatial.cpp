#include "airgrasp/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace airgrasp {

std::string_view frame_name(Frame f) {
  switch (f) {
    case Frame::Inertial: return "F_i";
    case Frame::Body: return "F_b";
    case Frame::ManipBase: return "F_m";
    case Frame::EndEffector: return "F_e";
    case Frame::Finger1: return "F_f1";
    case Frame::Finger2: return "F_f2";
    case Frame::Finger3: return "F_f3";
    case Frame::Object: return "F_o";
  }
  return "?";
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  return m;
}

Vec3 unskew(const Mat3& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Wrench wrench_transform(const Wrench& w, const Pose& pose, Frame target) {
  const Vec3 f = pose.orientation * w.force;
  const Vec3 m = pose.orientation * w.moment + f.cross(pose.position);
  return {f, m, target};
}

MatX pinv(const MatX& m, double rel_tol) {
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return MatX::Zero(m.cols(), m.rows());
  const double cutoff = rel_tol * sv(0);
  VecX inv_sv = VecX::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Mat3& r_a, const Mat3& r_b) {
  const double c = ((r_a.transpose() * r_b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Mat3 rotation_from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace airgrasp
