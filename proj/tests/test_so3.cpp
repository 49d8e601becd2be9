#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "scalar_att/errors.hpp"
#include "scalar_att/so3.hpp"

using namespace scalar_att;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

// Rotation matrix built independently from Eigen's quaternion class.
Mat3 quat_oracle(const Vec3& v) {
  const double th = v.norm();
  if (th == 0.0) return Mat3::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(th, v / th)).toRotationMatrix();
}

}  // namespace

TEST(Skew, MatchesCrossProduct) {
  EXPECT_TRUE(skew(Vec3::Zero()).isZero());
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(skew(Vec3::UnitZ()), expected);
  const Vec3 r = skew(Vec3(1, 2, 3)) * Vec3::UnitX();
  EXPECT_EQ(r, Vec3(0, 3, -2));
  EXPECT_TRUE((skew(Vec3(1, 2, 3)).transpose() + skew(Vec3(1, 2, 3))).isZero());
}

TEST(Skew, UnskewRoundTripAndRejection) {
  EXPECT_EQ(unskew(skew(Vec3(1, 2, 3))), Vec3(1, 2, 3));
  EXPECT_EQ(unskew(Mat3::Zero()), Vec3::Zero());
  EXPECT_EQ(unskew(skew(Vec3::UnitZ())), Vec3::UnitZ());
  EXPECT_THROW(unskew(Mat3::Identity()), InvalidArgumentError);
}

TEST(Exp, MatchesQuaternionOracle) {
  EXPECT_TRUE(exp_so3(Vec3::Zero()).matrix().isIdentity());
  const Vec3 e2 = exp_so3(Vec3(0, 0, kPi / 2)) * Vec3::UnitX();
  EXPECT_LT((e2 - Vec3::UnitY()).norm(), 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = u(rng) * random_unit(rng);
    EXPECT_LT((exp_so3(v).matrix() - quat_oracle(v)).norm(), 1e-13);
    EXPECT_LT((exp_so3(v) * exp_so3(-v)).matrix().isIdentity(1e-13) ? 0.0 : 1.0, 0.5);
    EXPECT_LT(exp_so3(v).orthogonality_error(), 1e-14);
    EXPECT_NEAR(exp_so3(v).matrix().determinant(), 1.0, 1e-14);
  }
}

TEST(Exp, SmallAngleBranchIsContinuous) {
  const Vec3 axis = Vec3(1, -2, 0.5).normalized();
  for (double th : {1e-7, 1.0001e-8, 0.9999e-8, 1e-12}) {
    EXPECT_LT((exp_so3(th * axis).matrix() - quat_oracle(th * axis)).norm(), 1e-16 + 1e-15 * th);
  }
}

TEST(Log, RoundTripAndKnownValues) {
  EXPECT_EQ(log_so3(Rotation()), Vec3::Zero());
  EXPECT_LT((log_so3(exp_so3(Vec3(0.1, 0.2, 0.3))) - Vec3(0.1, 0.2, 0.3)).norm(), 1e-10);
  EXPECT_LT((log_so3(exp_so3(Vec3(0, 0, 3.0))) - Vec3(0, 0, 3.0)).norm(), 1e-9);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, kPi - 1e-5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 v = u(rng) * random_unit(rng);
    EXPECT_LT((log_so3(exp_so3(v)) - v).norm(), 1e-9) << v.transpose();
  }
}

TEST(Log, RejectsNearPi) {
  EXPECT_THROW(log_so3(exp_so3(Vec3(kPi, 0, 0))), NumericalError);
  EXPECT_THROW(log_so3(exp_so3(Vec3(0, 0, kPi - 1e-8))), NumericalError);
}

TEST(Quaternion, RoundTripAndCheckedConstruction) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = exp_so3(u(rng) * random_unit(rng));
    const UnitQuaternion q = to_quaternion(r);
    EXPECT_GE(q.w, 0.0);
    EXPECT_LT((from_quaternion(q).matrix() - r.matrix()).norm(), 1e-14);
    EXPECT_LT((from_quaternion(q.negated()).matrix() - r.matrix()).norm(), 1e-14);
  }
  EXPECT_THROW(UnitQuaternion::make(1.0, Vec3(0.1, 0, 0)), InvalidArgumentError);
  EXPECT_NO_THROW(UnitQuaternion::make(1.0, Vec3::Zero()));
}

TEST(ErrorLambda, SmallAngleAndSign) {
  EXPECT_EQ(error_lambda(Rotation()), Vec3::Zero());
  const Vec3 u = Vec3(2, -1, 1).normalized();
  for (double phi : {1e-1, 1e-2, 1e-3}) {
    const Vec3 lam = error_lambda(exp_so3(phi * u));
    EXPECT_LT((lam - 2.0 * std::sin(phi / 2) * u).norm(), 1e-15);
    EXPECT_LT((lam - phi * u).norm(), phi * phi * phi);
  }
  // The double cover must not matter.
  const Rotation r = exp_so3(Vec3(0.3, -0.2, 2.5));
  const UnitQuaternion q = to_quaternion(r);
  EXPECT_LT((error_lambda(from_quaternion(q.negated())) - error_lambda(r)).norm(), 1e-14);
  EXPECT_LE(error_lambda(exp_so3(Vec3(0, 3.1, 0))).norm(), 2.0);
  EXPECT_THROW(error_lambda(exp_so3(Vec3(0, kPi, 0))), NumericalError);
}

TEST(ErrorLambda, FirstOrderReconstruction) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mag(1e-6, 1e-3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 lam = mag(rng) * random_unit(rng);
    const UnitQuaternion q = UnitQuaternion::make(std::sqrt(1.0 - lam.squaredNorm() / 4), lam / 2);
    const Mat3 approx = Mat3::Identity() + skew(lam);
    EXPECT_LE((approx - from_quaternion(q).matrix()).norm(), lam.squaredNorm());
  }
}

TEST(AngularDistance, Basics) {
  EXPECT_EQ(angular_distance(Rotation(), Rotation()), 0.0);
  EXPECT_NEAR(angular_distance(exp_so3(Vec3(kPi / 4, 0, 0)), Rotation()), kPi / 4, 1e-15);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (int i = 0; i < 200; ++i) {
    const double phi = u(rng);
    EXPECT_NEAR(angular_distance(Rotation(), exp_so3(phi * random_unit(rng))), phi, 1e-12);
    const Rotation a = exp_so3(u(rng) * random_unit(rng));
    const Rotation b = exp_so3(u(rng) * random_unit(rng));
    const double d = angular_distance(a, b);
    EXPECT_EQ(d, angular_distance(b, a));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, kPi);
    if (d < kPi - 1e-3) EXPECT_NEAR(d, log_so3(a.transpose() * b).norm(), 1e-9);
  }
  EXPECT_NEAR(angular_distance(Rotation(), exp_so3(Vec3(0, 0, kPi))), kPi, 1e-15);
}

TEST(AngularDistance, MatchesArccosDefinition) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = exp_so3(u(rng) * random_unit(rng));
    const Rotation b = exp_so3(u(rng) * random_unit(rng));
    const double c = std::clamp(0.5 * ((a * b.transpose()).matrix().trace() - 1.0), -1.0, 1.0);
    EXPECT_NEAR(angular_distance(a, b), std::acos(c), 1e-7);
  }
}

TEST(Project, PolarFactor) {
  const Rotation r = exp_so3(Vec3(0.4, -1.0, 0.7));
  EXPECT_LT((project_to_so3(r.matrix()).matrix() - r.matrix()).norm(), 1e-12);
  EXPECT_LT((project_to_so3(1.01 * Mat3::Identity()).matrix() - Mat3::Identity()).norm(), 1e-14);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  Mat3 noise;
  for (int i = 0; i < 9; ++i) noise(i / 3, i % 3) = n(rng);
  const Mat3 m = r.matrix() + 1e-6 * noise;
  const Rotation p = project_to_so3(m);
  EXPECT_LT((p.matrix() - r.matrix()).norm(), 2e-6 * noise.norm());
  // SVD oracle for the polar factor.
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  EXPECT_LT((p.matrix() - svd.matrixU() * svd.matrixV().transpose()).norm(), 1e-13);
  EXPECT_LT(p.orthogonality_error(), 1e-14);

  EXPECT_THROW(project_to_so3(Mat3::Zero()), InvalidArgumentError);
  EXPECT_THROW(project_to_so3(-Mat3::Identity()), InvalidArgumentError);
}

TEST(Rotation, CheckedFromMatrix) {
  EXPECT_NO_THROW(Rotation::from_matrix(exp_so3(Vec3(1, 2, 3)).matrix()));
  EXPECT_THROW(Rotation::from_matrix(1.001 * Mat3::Identity()), InvalidArgumentError);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  EXPECT_THROW(Rotation::from_matrix(reflect), InvalidArgumentError);
}

TEST(Euler, ZyxConvention) {
  const EulerZYX id = euler_zyx(Rotation());
  EXPECT_EQ(id.roll, 0.0);
  EXPECT_EQ(id.pitch, 0.0);
  EXPECT_EQ(id.yaw, 0.0);
  EXPECT_NEAR(euler_zyx(rot_z(0.3)).yaw, 0.3, 1e-15);
  const EulerZYX e = euler_zyx(rot_z(0.1) * rot_y(0.2) * rot_x(0.3));
  EXPECT_NEAR(e.roll, 0.3, 1e-14);
  EXPECT_NEAR(e.pitch, 0.2, 1e-14);
  EXPECT_NEAR(e.yaw, 0.1, 1e-14);
  EXPECT_FALSE(e.gimbal_lock);
  EXPECT_LT((from_euler_zyx(0.3, 0.2, 0.1).matrix() - (rot_z(0.1) * rot_y(0.2) * rot_x(0.3)).matrix()).norm(),
            1e-15);
  EXPECT_LT((rot_z(kPi / 2) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}

TEST(Euler, GimbalLock) {
  const Rotation r = rot_z(0.4) * rot_y(kPi / 2) * rot_x(0.1);
  const EulerZYX e = euler_zyx(r);
  EXPECT_TRUE(e.gimbal_lock);
  EXPECT_EQ(e.yaw, 0.0);
  EXPECT_NEAR(e.pitch, kPi / 2, 1e-7);
  EXPECT_LT((from_euler_zyx(e.roll, e.pitch, e.yaw).matrix() - r.matrix()).norm(), 1e-7);
}

TEST(Euler, RandomRoundTrip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> pit(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const double r = ang(rng), p = pit(rng), y = ang(rng);
    const EulerZYX e = euler_zyx(from_euler_zyx(r, p, y));
    EXPECT_NEAR(e.roll, r, 1e-12);
    EXPECT_NEAR(e.pitch, p, 1e-12);
    EXPECT_NEAR(e.yaw, y, 1e-12);
  }
}
