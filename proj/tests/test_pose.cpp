#include "doctest.h"
#include "nutrunner/pose.hpp"
#include "nutrunner/rng.hpp"

using namespace nutrunner;

namespace {

Vec3 random_vec(CounterRng& rng, double scale = 1.0) {
  return Vec3(rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale));
}

Pose random_pose(CounterRng& rng) {
  const Vec3 axis = random_vec(rng).normalized();
  return make_pose(axis_angle(axis, rng.uniform(-M_PI, M_PI)), random_vec(rng));
}

}  // namespace

TEST_CASE("skew matrix reproduces the cross product") {
  CounterRng rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vec3 a = random_vec(rng), b = random_vec(rng);
    CHECK((skew(a) * b - a.cross(b)).norm() == 0.0);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
  }
}

TEST_CASE("axis_angle matches the Rodrigues formula") {
  CounterRng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Vec3 axis = random_vec(rng).normalized();
    const double angle = rng.uniform(-M_PI, M_PI);
    const Mat3 kx = skew(axis);
    const Mat3 rodrigues =
        Mat3::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * kx * kx;
    CHECK((axis_angle(axis, angle) - rodrigues).cwiseAbs().maxCoeff() < 1e-14);
  }
  // quarter turn about z maps x onto y
  CHECK((axis_angle(Vec3::UnitZ(), M_PI / 2.0) * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
}

TEST_CASE("so3_log inverts axis_angle") {
  CounterRng rng(13);
  for (int k = 0; k < 50; ++k) {
    const Vec3 axis = random_vec(rng).normalized();
    const double angle = rng.uniform(-3.1, 3.1);
    const Vec3 w = axis * angle;
    const Vec3 back = so3_log(axis_angle(axis, angle));
    CHECK((back - w).norm() < 1e-9);
    CHECK(std::abs(back.norm() - std::abs(angle)) < 1e-9);
  }
  CHECK(so3_log(Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("rotation_angle_between is the geodesic angle") {
  CounterRng rng(14);
  for (int k = 0; k < 20; ++k) {
    const Mat3 r = random_pose(rng).matrix();
    const double angle = rng.uniform(0.0, M_PI);
    const Vec3 axis = random_vec(rng).normalized();
    CHECK(rotation_angle_between(r, r * axis_angle(axis, angle)) ==
          doctest::Approx(angle).epsilon(1e-9));
    CHECK(rotation_angle_between(r, r) == doctest::Approx(0.0));
  }
}

TEST_CASE("pose composition is associative and inverse round-trips") {
  CounterRng rng(15);
  for (int k = 0; k < 20; ++k) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Vec3 p = random_vec(rng);
    CHECK((((a * b) * c) * p - (a * (b * c)) * p).norm() < 1e-12);
    CHECK((a.inverse() * (a * p) - p).norm() < 1e-12);
    const Pose id = a * a.inverse();
    CHECK(id.translation.norm() < 1e-12);
    CHECK(rotation_angle_between(id.matrix(), Mat3::Identity()) < 1e-12);
    CHECK(a.orthonormality_defect() < 1e-12);
  }
}

TEST_CASE("pose_error splits translation and geodesic rotation") {
  CounterRng rng(16);
  const Pose d = random_pose(rng);
  Pose a = d;
  a.translation += Vec3(0.01, -0.02, 0.03);
  a.rotation = a.rotation * Eigen::Quaterniond(Eigen::AngleAxisd(0.1, Vec3::UnitX()));
  const PoseError e = pose_error(d, a);
  CHECK((e.translation - Vec3(0.01, -0.02, 0.03)).norm() < 1e-15);
  CHECK(e.rotation_angle == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("transport_wrench: identity frames leave the wrench unchanged") {
  CounterRng rng(17);
  Wrench w;
  for (int i = 0; i < 6; ++i) w[i] = rng.uniform(-2.0, 2.0);
  const Vec3 p = random_vec(rng);
  const Wrench out = transport_wrench(w, Mat3::Identity(), p, Mat3::Identity(), p);
  CHECK((out - w).norm() == 0.0);
}

TEST_CASE("transport_wrench: pure force at an offset gains the r x f moment") {
  CounterRng rng(18);
  for (int k = 0; k < 10; ++k) {
    const Vec3 f = random_vec(rng, 5.0);
    const Vec3 p_a = random_vec(rng);
    const Vec3 p_b = random_vec(rng);
    Wrench w = Wrench::Zero();
    w.tail<3>() = f;
    const Wrench out = transport_wrench(w, Mat3::Identity(), p_a, Mat3::Identity(), p_b);
    const Vec3 expected_moment = (p_a - p_b).cross(f);
    CHECK((out.head<3>() - expected_moment).norm() < 1e-14);
    CHECK((out.tail<3>() - f).norm() == 0.0);
  }
}

TEST_CASE("transport_wrench: A->B->A round trip recovers the wrench to 1e-12") {
  CounterRng rng(19);
  for (int k = 0; k < 20; ++k) {
    Wrench w;
    for (int i = 0; i < 6; ++i) w[i] = rng.uniform(-10.0, 10.0);
    const Mat3 ra = random_pose(rng).matrix();
    const Mat3 rb = random_pose(rng).matrix();
    const Vec3 pa = random_vec(rng), pb = random_vec(rng);
    const Wrench there = transport_wrench(w, ra, pa, rb, pb);
    const Wrench back = transport_wrench(there, rb, pb, ra, pa);
    CHECK((back - w).norm() < 1e-12);
  }
}
