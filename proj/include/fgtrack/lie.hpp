#pragma once

// SO(3)/SE(3) value types with exp/log maps, group distances and the
// tangent-space Jacobians used by the factor residuals.
//
// Conventions used throughout the project:
//   * tangent vectors are ordered translation-first: x = (rho, theta)
//   * pose variables perturb on the right: T' = T * exp(delta)
//
// Closed forms follow Barfoot, "State Estimation for Robotics" (ch. 7)
// and Eade, "Lie Groups for 2D and 3D Transformations".

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fgtrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tangent6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Cov6 = Mat6;

inline Eigen::Ref<Vec3> rho(Tangent6& x) { return x.head<3>(); }
inline Eigen::Ref<Vec3> theta(Tangent6& x) { return x.tail<3>(); }
inline Vec3 rho(const Tangent6& x) { return x.head<3>(); }
inline Vec3 theta(const Tangent6& x) { return x.tail<3>(); }

inline Tangent6 tangent(const Vec3& rho_part, const Vec3& theta_part) {
  Tangent6 x;
  x.head<3>() = rho_part;
  x.tail<3>() = theta_part;
  return x;
}

// Proper rotation stored as a unit quaternion. Normalized on every
// construction so long composition chains stay orthonormal.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}
  explicit Rotation(const Mat3& m) : q_(Eigen::Quaterniond(m).normalized()) {}

  static Rotation identity() { return Rotation(); }
  static Rotation from_axis_angle(const Vec3& axis, double angle) {
    return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
  }

  Rotation operator*(const Rotation& o) const { return Rotation(q_ * o.q_); }
  Vec3 operator*(const Vec3& v) const { return q_ * v; }
  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

 private:
  Eigen::Quaterniond q_;
};

// Rigid transform: x_world = rotation * x_body + translation.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }

  Pose operator*(const Pose& o) const {
    return Pose(rotation * o.rotation, rotation * o.translation + translation);
  }
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose inverse() const {
    const Rotation rinv = rotation.inverse();
    return Pose(rinv, -(rinv * translation));
  }
  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

Mat3 hat(const Vec3& v);

Rotation exp_so3(const Vec3& theta);
Vec3 log_so3(const Rotation& r);

Pose exp_se3(const Tangent6& x);
Tangent6 log_se3(const Pose& t);

// inverse(a) * b; the relative transform all residuals are built from.
inline Pose between(const Pose& a, const Pose& b) { return a.inverse() * b; }

// Geodesic rotation angle in [0, pi].
double rotation_angle(const Rotation& r);
inline double rotation_distance(const Rotation& a, const Rotation& b) {
  return rotation_angle(a.inverse() * b);
}
inline double translation_distance(const Pose& a, const Pose& b) {
  return (a.translation - b.translation).norm();
}

// The SO(3) log has two equally valid branches when the angle reaches pi.
// log_so3 still returns one of them; callers that care can check here.
bool log_branch_ambiguous(const Rotation& r, double tol = 1e-7);

// Left Jacobian of SO(3) (also the V matrix of the SE(3) exponential).
Mat3 left_jacobian_so3(const Vec3& theta);
Mat3 left_jacobian_inv_so3(const Vec3& theta);

// Left Jacobian of SE(3) and its inverse, satisfying to first order
//   exp(x + d) == exp(left_jacobian_se3(x) * d) * exp(x).
Mat6 left_jacobian_se3(const Tangent6& x);
Mat6 left_jacobian_inv_se3(const Tangent6& x);

inline Mat6 right_jacobian_se3(const Tangent6& x) { return left_jacobian_se3(-x); }
inline Mat6 right_jacobian_inv_se3(const Tangent6& x) { return left_jacobian_inv_se3(-x); }

// Adjoint of T, mapping tangents so that T * exp(x) == exp(Ad_T x) * T.
Mat6 adjoint(const Pose& t);

}  // namespace fgtrack
