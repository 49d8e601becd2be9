#include "scalar_att/so3.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scalar_att/errors.hpp"

namespace scalar_att {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kNearPiMargin = 1e-6;

}  // namespace

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) {
    throw InvalidArgumentError("rotation matrix has non-finite entries");
  }
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (orth > kTolerance || std::abs(det - 1.0) > kTolerance) {
    throw InvalidArgumentError("matrix is not a rotation: |R^T R - I| = " + std::to_string(orth) +
                               ", det = " + std::to_string(det));
  }
  return Rotation(m, Unchecked{});
}

double Rotation::orthogonality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

UnitQuaternion UnitQuaternion::make(double w, const Vec3& v) {
  const double n2 = w * w + v.squaredNorm();
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > kTolerance) {
    throw InvalidArgumentError("quaternion is not unit norm: |q|^2 = " + std::to_string(n2));
  }
  return UnitQuaternion{w, v};
}

UnitQuaternion UnitQuaternion::normalized(double w, const Vec3& v) {
  const double n = std::sqrt(w * w + v.squaredNorm());
  if (!std::isfinite(n) || n < 1e-12) {
    throw InvalidArgumentError("cannot normalize a zero or non-finite quaternion");
  }
  return UnitQuaternion{w / n, v / n};
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) {
  if ((m + m.transpose()).norm() > 1e-9) {
    throw InvalidArgumentError("unskew: matrix is not antisymmetric");
  }
  const Mat3 a = 0.5 * (m - m.transpose());
  return Vec3(a(2, 1), a(0, 2), a(1, 0));
}

Rotation exp_so3(const Vec3& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = skew(v);
  return Rotation(Mat3::Identity() + a * k + b * k * k, Rotation::Unchecked{});
}

UnitQuaternion to_quaternion(const Rotation& r) {
  // Shepperd's method: pivot on the largest of the four squared components.
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  double w, x, y, z;
  if (tr >= m(0, 0) && tr >= m(1, 1) && tr >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    w = (m(2, 1) - m(1, 2)) / s;
    x = 0.25 * s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 - m(0, 0) + m(1, 1) - m(2, 2));
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    y = 0.25 * s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 - m(0, 0) - m(1, 1) + m(2, 2));
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
    z = 0.25 * s;
  }
  UnitQuaternion q = UnitQuaternion::normalized(w, Vec3(x, y, z));
  if (q.w < 0.0) q = q.negated();
  return q;
}

Rotation from_quaternion(const UnitQuaternion& q) {
  const Mat3 qx = skew(q.v);
  return Rotation(Mat3::Identity() + 2.0 * qx * (q.w * Mat3::Identity() + qx),
                  Rotation::Unchecked{});
}

Vec3 log_so3(const Rotation& r) {
  const double theta = angular_distance(r, Rotation::identity());
  if (theta > std::numbers::pi - kNearPiMargin) {
    throw NumericalError("log_so3: rotation angle " + std::to_string(theta) +
                         " rad is too close to pi for a unique logarithm");
  }
  const Mat3& m = r.matrix();
  const Vec3 axis_sin(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));  // 2 sin(theta) u
  if (theta < kSmallAngle) {
    return 0.5 * (1.0 + theta * theta / 6.0) * axis_sin;
  }
  if (theta < 0.5 * std::numbers::pi) {
    return (theta / (2.0 * std::sin(theta))) * axis_sin;
  }
  // Large angles: the quaternion vector part keeps full precision as sin(theta) shrinks.
  const UnitQuaternion q = to_quaternion(r);
  const double vn = q.v.norm();
  return (2.0 * std::atan2(vn, q.w) / vn) * q.v;
}

Vec3 error_lambda(const Rotation& r_tilde) {
  const UnitQuaternion q = to_quaternion(r_tilde);
  if (std::abs(q.w) < 1e-12) {
    throw NumericalError("error_lambda: attitude error of pi has no first-order coordinates");
  }
  return 2.0 * (q.w > 0.0 ? 1.0 : -1.0) * q.v;
}

double angular_distance(const Rotation& r1, const Rotation& r2) {
  // Entries of r1 r2^T as ordered dot products, so swapping the arguments
  // yields exactly the transpose and the result is exactly symmetric.
  Mat3 e;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      e(i, j) = r1(i, 0) * r2(j, 0) + r1(i, 1) * r2(j, 1) + r1(i, 2) * r2(j, 2);
    }
  }
  // atan2 of (sin, cos) agrees with arccos(clamp((tr - 1) / 2)) and stays accurate near 0 and pi.
  const double c = std::clamp(0.5 * (e.trace() - 1.0), -1.0, 1.0);
  const double s = 0.5 * Vec3(e(2, 1) - e(1, 2), e(0, 2) - e(2, 0), e(1, 0) - e(0, 1)).norm();
  return std::atan2(s, c);
}

Rotation project_to_so3(const Mat3& m) {
  if (!m.allFinite() || m.determinant() <= 1e-12) {
    throw InvalidArgumentError("project_to_so3: input is singular or reflecting (det <= 0)");
  }
  // R = M (M^T M)^{-1/2}
  Eigen::SelfAdjointEigenSolver<Mat3> es(m.transpose() * m);
  const Vec3 inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  const Mat3 s_inv = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  return Rotation(m * s_inv, Rotation::Unchecked{});
}

EulerZYX euler_zyx(const Rotation& r) {
  const Mat3& m = r.matrix();
  EulerZYX out;
  const double s = std::clamp(-m(2, 0), -1.0, 1.0);
  out.pitch = std::asin(s);
  if (std::abs(s) > 1.0 - 1e-12) {
    out.gimbal_lock = true;
    out.yaw = 0.0;
    out.roll = std::atan2(-m(1, 2), m(1, 1));
    out.pitch = std::copysign(0.5 * std::numbers::pi, s);
  } else {
    out.roll = std::atan2(m(2, 1), m(2, 2));
    out.yaw = std::atan2(m(1, 0), m(0, 0));
  }
  return out;
}

Rotation rot_x(double angle) { return exp_so3(Vec3(angle, 0.0, 0.0)); }
Rotation rot_y(double angle) { return exp_so3(Vec3(0.0, angle, 0.0)); }
Rotation rot_z(double angle) { return exp_so3(Vec3(0.0, 0.0, angle)); }

Rotation from_euler_zyx(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

}  // namespace scalar_att
