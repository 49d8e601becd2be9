#pragma once

#include <Eigen/Core>

namespace scalar_att {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct UnitQuaternion;

/// Element of SO(3) mapping body-frame coordinates to inertial-frame coordinates.
///
/// Construction from an arbitrary matrix is checked (orthonormality and unit
/// determinant to 1e-9). Products of rotations are not re-checked, so long
/// recursions should call project_to_so3() periodically.
class Rotation {
 public:
  static constexpr double kTolerance = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Throws InvalidArgumentError if `m` is not a rotation within kTolerance.
  static Rotation from_matrix(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_, Unchecked{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Frobenius norm of R^T R - I.
  double orthogonality_error() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  friend Rotation exp_so3(const Vec3& v);
  friend Rotation project_to_so3(const Mat3& m);
  friend Rotation from_quaternion(const UnitQuaternion& q);

  Mat3 m_;
};

/// Unit quaternion (w, v) with w the scalar part.
struct UnitQuaternion {
  static constexpr double kTolerance = 1e-9;

  double w = 1.0;
  Vec3 v = Vec3::Zero();

  /// Checked constructor: w^2 + |v|^2 must be 1 within kTolerance.
  static UnitQuaternion make(double w, const Vec3& v);
  /// Normalizes the components; throws on a (near) zero quaternion.
  static UnitQuaternion normalized(double w, const Vec3& v);

  UnitQuaternion negated() const { return UnitQuaternion{-w, -v}; }
};

Mat3 skew(const Vec3& v);

/// Inverse of skew(). Rejects matrices whose symmetric part exceeds 1e-9.
Vec3 unskew(const Mat3& m);

/// Rodrigues exponential; Taylor coefficients below |v| = 1e-8.
Rotation exp_so3(const Vec3& v);

/// Rotation vector of `r`. Throws NumericalError when the rotation angle is
/// within 1e-6 of pi, where the axis is ill-defined.
Vec3 log_so3(const Rotation& r);

/// Quaternion with non-negative scalar part.
UnitQuaternion to_quaternion(const Rotation& r);

/// R = I + 2 q^x (q0 I + q^x).
Rotation from_quaternion(const UnitQuaternion& q);

/// First-order attitude error coordinates lambda = 2 sign(q0) q of the error
/// rotation. Satisfies r = I + skew(lambda) + O(|lambda|^2) and |lambda| <= 2.
/// Throws NumericalError for an error angle of pi (q0 == 0).
Vec3 error_lambda(const Rotation& r_tilde);

/// Angle of r1 r2^T in [0, pi].
double angular_distance(const Rotation& r1, const Rotation& r2);

/// Nearest rotation in Frobenius norm (orthogonal polar factor).
/// Throws InvalidArgumentError when det(m) <= 0.
Rotation project_to_so3(const Mat3& m);

struct EulerZYX {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  bool gimbal_lock = false;
};

/// Intrinsic Z-Y-X angles, R = Rz(yaw) Ry(pitch) Rx(roll), pitch in [-pi/2, pi/2].
/// At gimbal lock yaw is set to 0 and the flag raised.
EulerZYX euler_zyx(const Rotation& r);

Rotation from_euler_zyx(double roll, double pitch, double yaw);

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

}  // namespace scalar_att
