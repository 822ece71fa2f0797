#include "airgrasp/spatial.hpp"

#include <doctest.h>

#include <random>

using namespace airgrasp;

namespace {

std::mt19937_64 rng(0x5ead51u);

Vec3 random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng)};
}

Mat3 random_rotation() {
  // Unit-quaternion sampling.
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Componentwise cross product, independent of skew().
Vec3 cross_oracle(const Vec3& a, const Vec3& b) {
  return {a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(),
          a.x() * b.y() - a.y() * b.x()};
}

}  // namespace

TEST_CASE("skew of zero is the zero matrix") {
  CHECK(skew(Vec3::Zero()).isZero(0.0));
}

TEST_CASE("right-handed basis: e_x cross e_y = e_z") {
  CHECK((skew(Vec3::UnitX()) * Vec3::UnitY()).isApprox(Vec3::UnitZ(), 1e-15));
}

TEST_CASE("skew matches the componentwise cross formula and is antisymmetric") {
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = random_vec(10.0);
    const Vec3 w = random_vec(10.0);
    CHECK((skew(v) * w - cross_oracle(v, w)).norm() < 1e-12);
    CHECK((skew(v).transpose() + skew(v)).norm() == 0.0);
    CHECK((unskew(skew(v)) - v).norm() == 0.0);
  }
}

TEST_CASE("wrench transform: identity pose leaves the wrench unchanged") {
  const Wrench w{{1.0, -2.0, 3.0}, {0.1, 0.2, -0.3}, Frame::EndEffector};
  const Wrench out = wrench_transform(w, Pose::identity(), Frame::EndEffector);
  CHECK(out.force.isApprox(w.force));
  CHECK(out.moment.isApprox(w.moment));
}

TEST_CASE("wrench transform: moment from a lever arm, expanded by hand") {
  // f = (0,0,-1) N at a frame offset p = (1,0,0), R = I:
  // moment = (R f) x p = (0,0,-1) x (1,0,0) = (0,-1,0).
  Wrench w{{0.0, 0.0, -1.0}, Vec3::Zero(), Frame::EndEffector};
  const Wrench out = wrench_transform(w, Pose{{1.0, 0.0, 0.0}, Mat3::Identity()});
  CHECK(out.force.isApprox(Vec3(0, 0, -1)));
  CHECK(out.moment.isApprox(Vec3(0, -1, 0)));
}

TEST_CASE("wrench transform: pure moment ignores the lever arm") {
  Wrench w{Vec3::Zero(), {0.3, -0.1, 0.7}, Frame::Object};
  const Wrench out = wrench_transform(w, Pose{{5.0, -2.0, 1.0}, Mat3::Identity()});
  CHECK(out.force.isZero(0.0));
  CHECK(out.moment.isApprox(w.moment));
}

TEST_CASE("wrench transform composed with the inverse transform is the identity") {
  for (int i = 0; i < 100; ++i) {
    const Pose pose{random_vec(2.0), random_rotation()};
    const Wrench w{random_vec(10.0), random_vec(5.0), Frame::Object};
    const Wrench back = wrench_transform(wrench_transform(w, pose), pose.inverse(), w.frame);
    CHECK((back.force - w.force).norm() < 1e-10);
    CHECK((back.moment - w.moment).norm() < 1e-10);
  }
}

TEST_CASE("wrench transform respects pose composition") {
  for (int i = 0; i < 50; ++i) {
    const Pose a{random_vec(), random_rotation()};
    const Pose b{random_vec(), random_rotation()};
    const Wrench w{random_vec(3.0), random_vec(3.0), Frame::Object};
    const Wrench two_hops = wrench_transform(wrench_transform(w, a), b);
    const Wrench one_hop = wrench_transform(w, b.compose(a));
    CHECK((two_hops.force - one_hop.force).norm() < 1e-12);
    CHECK((two_hops.moment - one_hop.moment).norm() < 1e-11);
  }
}

TEST_CASE("pinv of the identity is the identity") {
  CHECK(pinv(MatX::Identity(3, 3)).isApprox(MatX::Identity(3, 3), 1e-14));
}

TEST_CASE("pinv of a rank-deficient diagonal truncates cleanly") {
  MatX m = MatX::Zero(2, 2);
  m(0, 0) = 2.0;
  const MatX p = pinv(m);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p(0, 1) == 0.0);
  CHECK(p(1, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);
}

TEST_CASE("pinv satisfies the four Penrose conditions on random 6x21 matrices") {
  for (int i = 0; i < 30; ++i) {
    MatX m(6, 21);
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = random_vec(1.0).x();
    if (i % 3 == 0) m.row(3) = m.row(2);  // make some rank-deficient
    const MatX p = pinv(m);
    CHECK((m * p * m - m).norm() < 1e-8);
    CHECK((p * m * p - p).norm() < 1e-8);
    CHECK(((m * p).transpose() - m * p).norm() < 1e-8);
    CHECK(((p * m).transpose() - p * m).norm() < 1e-8);
  }
}

TEST_CASE("sampled rotations are orthonormal to 1e-12") {
  for (int i = 0; i < 200; ++i) {
    const Mat3 r = random_rotation();
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("orthonormalize returns the nearest proper rotation") {
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = random_rotation();
    Mat3 noisy = r;
    for (int c = 0; c < 9; ++c) noisy(c / 3, c % 3) += 1e-4 * random_vec().x();
    const Mat3 fixed = orthonormalize(noisy);
    CHECK((fixed.transpose() * fixed - Mat3::Identity()).norm() < 1e-13);
    CHECK(fixed.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((fixed - r).norm() < 1e-3);
  }
}

TEST_CASE("rotation_from_rpy pitch of 90 degrees maps x to -z") {
  const Mat3 r = rotation_from_rpy(0.0, M_PI / 2.0, 0.0);
  CHECK((r.col(0) - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((r.col(2) - Vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("rotation_angle is zero for identical rotations and pi for a flip") {
  const Mat3 r = random_rotation();
  CHECK(rotation_angle(r, r) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(rotation_angle(Mat3::Identity(), axis_angle(Vec3::UnitX(), M_PI)) ==
        doctest::Approx(M_PI).epsilon(1e-9));
}
