#pragma once

// Pose and twist algebra for the simulated end effector.
//
// A twist carries the seven cardinal DoFs (x, y, z, roll, pitch, yaw, gripper).
// Directions are compared in a weighted metric
//   |t|^2 = |linear|^2 + rot^2 |angular|^2 + grip^2 aperture_rate^2
// so rotational and gripper motion live on a length scale.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <utility>

#include "shared_dof/error.hpp"

namespace shared_dof {

using Eigen::Quaterniond;
using Eigen::Vector3d;
using Vector7d = Eigen::Matrix<double, 7, 1>;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Pose {
  Vector3d position = Vector3d::Zero();
  Quaterniond orientation = Quaterniond::Identity();
  double aperture = 1.0;  // 0 closed, 1 open
};

struct Twist {
  Vector3d linear = Vector3d::Zero();
  Vector3d angular = Vector3d::Zero();
  double aperture_rate = 0.0;

  static Twist translation(const Vector3d& v) { return {v, Vector3d::Zero(), 0.0}; }
  static Twist rotation(const Vector3d& w) { return {Vector3d::Zero(), w, 0.0}; }
  static Twist gripper(double rate) { return {Vector3d::Zero(), Vector3d::Zero(), rate}; }

  bool is_zero() const { return linear.isZero(0.0) && angular.isZero(0.0) && aperture_rate == 0.0; }
  bool is_finite() const {
    return linear.allFinite() && angular.allFinite() && std::isfinite(aperture_rate);
  }

  Twist operator+(const Twist& o) const {
    return {linear + o.linear, angular + o.angular, aperture_rate + o.aperture_rate};
  }
  Twist operator-(const Twist& o) const {
    return {linear - o.linear, angular - o.angular, aperture_rate - o.aperture_rate};
  }
  Twist operator*(double s) const { return {linear * s, angular * s, aperture_rate * s}; }
  friend Twist operator*(double s, const Twist& t) { return t * s; }

  // x, y, z, roll, pitch, yaw, gripper
  Vector7d components() const {
    Vector7d v;
    v << linear, angular, aperture_rate;
    return v;
  }
  static Twist from_components(const Vector7d& v) {
    return {v.segment<3>(0), v.segment<3>(3), v(6)};
  }
};

struct WorkspaceLimits {
  Vector3d min_corner{-1.0, -1.0, 0.0};
  Vector3d max_corner{1.0, 1.0, 1.0};
  double max_linear_speed = 0.25;
  double max_angular_speed = 1.0;
  double max_aperture_rate = 2.0;

  bool valid() const {
    return (min_corner.array() < max_corner.array()).all() && max_linear_speed > 0.0 &&
           max_angular_speed > 0.0 && max_aperture_rate > 0.0;
  }
  bool contains(const Vector3d& p) const {
    return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
  }
  Vector3d clamp(const Vector3d& p) const { return p.cwiseMax(min_corner).cwiseMin(max_corner); }
};

/// Length scales of the weighted twist metric: metres per radian and metres per
/// unit of gripper aperture.
struct Lambdas {
  double rot = 0.2;
  double grip = 0.1;
};

// ---------------------------------------------------------------------------
// Quaternions

/// Unit quaternion with w >= 0.
inline Quaterniond canonical(const Quaterniond& q) {
  Quaterniond n = q.normalized();
  if (n.w() < 0.0) n.coeffs() = -n.coeffs();
  return n;
}

inline Quaterniond quat_exp(const Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    Quaterniond q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    return q.normalized();
  }
  const Vector3d axis = rotvec / angle;
  const double s = std::sin(0.5 * angle);
  return Quaterniond(std::cos(0.5 * angle), s * axis.x(), s * axis.y(), s * axis.z());
}

/// Rotation vector (axis * angle) of q, taking the short way (angle <= pi).
inline Vector3d quat_log(const Quaterniond& q) {
  const Quaterniond c = canonical(q);
  const Vector3d v = c.vec();
  const double vn = v.norm();
  if (vn < 1e-15) return 2.0 * v / c.w();
  return v / vn * (2.0 * std::atan2(vn, c.w()));
}

inline Quaterniond yaw_rotation(double angle_rad) { return quat_exp(Vector3d(0.0, 0.0, angle_rad)); }

/// Smallest rotation angle between two orientations.
inline double angle_between(const Quaterniond& a, const Quaterniond& b) {
  const Quaterniond r = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(r.vec().norm(), std::abs(r.w()));
}

// ---------------------------------------------------------------------------
// Weighted metric

inline Vector7d weighted_components(const Twist& t, const Lambdas& l) {
  Vector7d v;
  v << t.linear, l.rot * t.angular, l.grip * t.aperture_rate;
  return v;
}

inline double weighted_dot(const Twist& a, const Twist& b, const Lambdas& l) {
  return a.linear.dot(b.linear) + l.rot * l.rot * a.angular.dot(b.angular) +
         l.grip * l.grip * a.aperture_rate * b.aperture_rate;
}

inline double weighted_norm(const Twist& t, const Lambdas& l) {
  return std::sqrt(weighted_dot(t, t, l));
}

/// Cosine of the weighted angle between two nonzero twists; 0 if either is zero.
inline double weighted_cos(const Twist& a, const Twist& b, const Lambdas& l) {
  const double na = weighted_norm(a, l);
  const double nb = weighted_norm(b, l);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(weighted_dot(a, b, l) / (na * nb), -1.0, 1.0);
}

inline double weighted_angle_deg(const Twist& a, const Twist& b, const Lambdas& l) {
  return rad_to_deg(std::acos(weighted_cos(a, b, l)));
}

inline Twist weighted_normalize(const Twist& t, const Lambdas& l) {
  if (!t.is_finite()) throw Error(ErrorCode::InvalidInput, "non-finite twist");
  const double n = weighted_norm(t, l);
  if (!(n > 1e-12)) throw Error(ErrorCode::DegenerateDirection, "zero twist has no direction");
  return t * (1.0 / n);
}

/// Gram-Schmidt in the weighted inner product. The second vector is
/// re-orthogonalised once more to keep the residual at round-off level.
inline std::pair<Twist, Twist> orthonormalize_pair(const Twist& primary, const Twist& secondary,
                                                   const Lambdas& l) {
  const Twist a = weighted_normalize(primary, l);
  if (!secondary.is_finite()) throw Error(ErrorCode::InvalidInput, "non-finite twist");
  Twist r = secondary - a * weighted_dot(secondary, a, l);
  const double residual = weighted_norm(r, l);
  if (residual < 1e-6) throw Error(ErrorCode::DegeneratePair, "secondary is parallel to primary");
  r = r - a * weighted_dot(r, a, l);
  return {a, r * (1.0 / weighted_norm(r, l))};
}

// ---------------------------------------------------------------------------
// Pose operations

/// Unnormalised error twist from current to target.
inline Twist pose_difference(const Pose& current, const Pose& target) {
  Twist t;
  t.linear = target.position - current.position;
  t.angular = quat_log(target.orientation * current.orientation.conjugate());
  t.aperture_rate = target.aperture - current.aperture;
  return t;
}

inline double pose_error(const Pose& current, const Pose& target, const Lambdas& l) {
  return weighted_norm(pose_difference(current, target), l);
}

/// Unit (weighted) twist pointing from current toward target.
inline Twist goal_twist(const Pose& current, const Pose& target, const Lambdas& l) {
  const Twist diff = pose_difference(current, target);
  if (!(weighted_norm(diff, l) > 1e-12))
    throw Error(ErrorCode::DegenerateDirection, "current pose equals target");
  return weighted_normalize(diff, l);
}

inline Vector3d clamp_norm(const Vector3d& v, double max_norm) {
  const double n = v.norm();
  return n > max_norm ? Vector3d(v * (max_norm / n)) : v;
}

/// Advance a pose by a world-frame twist for dt seconds, saturating speeds and
/// the workspace box.
inline Pose integrate(const Pose& pose, const Twist& twist, double dt, const WorkspaceLimits& limits) {
  if (!twist.is_finite()) throw Error(ErrorCode::InvalidInput, "non-finite twist");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidInput, "dt must be positive");

  Pose out = pose;
  const Vector3d v = clamp_norm(twist.linear, limits.max_linear_speed);
  const Vector3d w = clamp_norm(twist.angular, limits.max_angular_speed);
  const double g = std::clamp(twist.aperture_rate, -limits.max_aperture_rate, limits.max_aperture_rate);

  out.position = limits.clamp(pose.position + v * dt);
  if (!w.isZero(0.0)) out.orientation = canonical(quat_exp(w * dt) * pose.orientation);
  out.aperture = std::clamp(pose.aperture + g * dt, 0.0, 1.0);
  return out;
}

}  // namespace shared_dof
