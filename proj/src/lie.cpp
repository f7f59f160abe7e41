#include "fgtrack/lie.hpp"

#include <cmath>

namespace fgtrack {

namespace {
// Below this angle the closed forms are replaced by their Taylor series.
constexpr double kSmallAngle = 1e-5;
}  // namespace

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Rotation exp_so3(const Vec3& theta) {
  const double angle = theta.norm();
  double half_sinc;  // sin(angle/2) / angle
  if (angle < kSmallAngle) {
    half_sinc = 0.5 - angle * angle / 48.0;
  } else {
    half_sinc = std::sin(0.5 * angle) / angle;
  }
  Eigen::Quaterniond q;
  q.w() = std::cos(0.5 * angle);
  q.vec() = half_sinc * theta;
  return Rotation(q);
}

Vec3 log_so3(const Rotation& r) {
  Eigen::Quaterniond q = r.quaternion();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // shortest branch
  const double vn = q.vec().norm();
  const double angle = 2.0 * std::atan2(vn, q.w());
  if (vn < kSmallAngle) {
    // theta = 2 v / w * (1 - |v|^2 / (3 w^2)) for small rotations
    const double w = q.w();
    return (2.0 / w) * (1.0 - vn * vn / (3.0 * w * w)) * q.vec();
  }
  return (angle / vn) * q.vec();
}

Pose exp_se3(const Tangent6& x) {
  const Vec3 th = theta(x);
  return Pose(exp_so3(th), left_jacobian_so3(th) * rho(x));
}

Tangent6 log_se3(const Pose& t) {
  const Vec3 th = log_so3(t.rotation);
  return tangent(left_jacobian_inv_so3(th) * t.translation, th);
}

double rotation_angle(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

bool log_branch_ambiguous(const Rotation& r, double tol) {
  return rotation_angle(r) > M_PI - tol;
}

Mat3 left_jacobian_so3(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 th = hat(theta);
  const double a2 = angle * angle;
  double c1, c2;  // (1-cos)/a^2, (a-sin)/a^3
  if (angle < 1e-2) {
    // The closed forms cancel catastrophically here; the truncated series
    // is exact to machine precision below this threshold.
    c1 = 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
    c2 = 1.0 / 6.0 - a2 / 120.0 + a2 * a2 / 5040.0;
  } else {
    c1 = (1.0 - std::cos(angle)) / a2;
    c2 = (angle - std::sin(angle)) / (a2 * angle);
  }
  return Mat3::Identity() + c1 * th + c2 * th * th;
}

Mat3 left_jacobian_inv_so3(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 th = hat(theta);
  const double a2 = angle * angle;
  double c;  // coefficient of th^2
  if (angle < 1e-1) {
    c = 1.0 / 12.0 + a2 / 720.0 + a2 * a2 / 30240.0;
  } else {
    // (1 - a sin(a) / (2 (1 - cos(a)))) / a^2, stable up to a = pi
    c = (1.0 - angle * std::sin(angle) / (2.0 * (1.0 - std::cos(angle)))) / a2;
  }
  return Mat3::Identity() - 0.5 * th + c * th * th;
}

namespace {

// Translation-rotation coupling block of the SE(3) left Jacobian
// (Barfoot eq. 7.86b).
Mat3 se3_jacobian_q(const Tangent6& x) {
  const Vec3 r = rho(x);
  const Vec3 t = theta(x);
  const double angle = t.norm();
  const Mat3 rh = hat(r);
  const Mat3 th = hat(t);

  double q1, s2, s3;
  const double a2 = angle * angle;
  if (angle < 1e-1) {
    q1 = 1.0 / 6.0 - a2 / 120.0 + a2 * a2 / 5040.0;
    s2 = -1.0 / 24.0 + a2 / 720.0 - a2 * a2 / 40320.0;
    s3 = -1.0 / 120.0 + a2 / 5040.0 - a2 * a2 / 362880.0;
  } else {
    const double a3 = a2 * angle;
    const double sa = std::sin(angle);
    const double ca = std::cos(angle);
    q1 = (angle - sa) / a3;
    s2 = (1.0 - 0.5 * a2 - ca) / (a2 * a2);
    s3 = (angle - sa - a3 / 6.0) / (a2 * a3);
  }

  const Mat3 thrh = th * rh;
  const Mat3 rhth = rh * th;
  return 0.5 * rh + q1 * (thrh + rhth + th * rhth) -
         s2 * (th * thrh + rhth * th - 3.0 * th * rhth) -
         0.5 * (s2 - 3.0 * s3) * (thrh * th * th + th * th * rhth);
}

}  // namespace

Mat6 left_jacobian_se3(const Tangent6& x) {
  const Mat3 j = left_jacobian_so3(theta(x));
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = j;
  out.bottomRightCorner<3, 3>() = j;
  out.topRightCorner<3, 3>() = se3_jacobian_q(x);
  return out;
}

Mat6 left_jacobian_inv_se3(const Tangent6& x) {
  const Mat3 ji = left_jacobian_inv_so3(theta(x));
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = ji;
  out.bottomRightCorner<3, 3>() = ji;
  out.topRightCorner<3, 3>() = -ji * se3_jacobian_q(x) * ji;
  return out;
}

Mat6 adjoint(const Pose& t) {
  const Mat3 r = t.rotation.matrix();
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = r;
  out.bottomRightCorner<3, 3>() = r;
  out.topRightCorner<3, 3>() = hat(t.translation) * r;
  return out;
}

}  // namespace fgtrack
