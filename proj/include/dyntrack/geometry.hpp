#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>

#include "dyntrack/errors.hpp"

namespace dyntrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Element of SO(3), stored as a unit quaternion.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}

  /// Quaternions already unit to rounding are kept bit-for-bit, so a
  /// serialised rotation reads back identically.
  static Rotation from_quaternion(const Eigen::Quaterniond& q) {
    Rotation r;
    const double n2 = q.squaredNorm();
    r.q_ = std::abs(n2 - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? q : q.normalized();
    return r;
  }
  static Rotation from_matrix(const Mat3& m) {
    return from_quaternion(Eigen::Quaterniond(m));
  }
  static Rotation from_axis_angle(const Vec3& axis, double angle) {
    return from_quaternion(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
  }
  /// Exponential map: rotation of |v| radians about v/|v|.
  static Rotation from_rotation_vector(const Vec3& v) {
    const double angle = v.norm();
    if (angle < 1e-300) return Rotation();
    return from_axis_angle(v / angle, angle);
  }
  static Rotation about_x(double a) { return from_axis_angle(Vec3::UnitX(), a); }
  static Rotation about_y(double a) { return from_axis_angle(Vec3::UnitY(), a); }
  static Rotation about_z(double a) { return from_axis_angle(Vec3::UnitZ(), a); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation inverse() const {
    Rotation r;
    r.q_ = q_.conjugate();
    return r;
  }

  Vec3 operator*(const Vec3& v) const { return q_ * v; }

  Rotation operator*(const Rotation& other) const {
    return from_quaternion(q_ * other.q_);
  }

  /// Rotation angle in [0, pi].
  double angle() const {
    const double s = q_.vec().norm();
    return 2.0 * std::atan2(s, std::abs(q_.w()));
  }

  /// Logarithm map; the returned vector has norm angle() <= pi.
  Vec3 log() const {
    const double s = q_.vec().norm();
    if (s < 1e-300) return Vec3::Zero();
    const double w = q_.w();
    // Pick the short way round so the angle stays in [0, pi].
    const double sign = w < 0.0 ? -1.0 : 1.0;
    const double angle = 2.0 * std::atan2(s, std::abs(w));
    return (sign * angle / s) * q_.vec();
  }

 private:
  Eigen::Quaterniond q_;
};

/// Geodesic distance on SO(3): angle of a^T b, in [0, pi].
inline double geodesic_angle(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).angle();
}

/// Coordinate frame label, optionally stamped with a frame index.
struct FrameLabel {
  static constexpr std::int64_t kUnstamped = -1;

  std::string name;
  std::int64_t stamp = kUnstamped;

  FrameLabel() = default;
  FrameLabel(std::string n, std::int64_t s = kUnstamped) : name(std::move(n)), stamp(s) {}
  FrameLabel(const char* n, std::int64_t s = kUnstamped) : name(n), stamp(s) {}

  bool operator==(const FrameLabel&) const = default;

  std::string str() const {
    return stamp == kUnstamped ? name : name + "@" + std::to_string(stamp);
  }
};

/// Rigid transform mapping coordinates in `from` into coordinates in `to`.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  FrameLabel from = "a";
  FrameLabel to = "b";

  Pose() = default;
  Pose(Rotation r, Vec3 t, FrameLabel f, FrameLabel d)
      : rotation(std::move(r)), translation(std::move(t)), from(std::move(f)), to(std::move(d)) {}

  static Pose identity(FrameLabel from, FrameLabel to) {
    return Pose(Rotation(), Vec3::Zero(), std::move(from), std::move(to));
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Same transform with different labels.
  Pose relabeled(FrameLabel f, FrameLabel d) const {
    return Pose(rotation, translation, std::move(f), std::move(d));
  }
};

/// a: B->C, b: A->B. Returns A->C.
inline Pose compose(const Pose& a, const Pose& b) {
  if (!(b.to == a.from)) {
    throw FrameMismatch("cannot compose " + a.from.str() + "->" + a.to.str() + " with " +
                        b.from.str() + "->" + b.to.str());
  }
  return Pose(a.rotation * b.rotation, a.rotation * b.translation + a.translation, b.from, a.to);
}

inline Pose invert(const Pose& p) {
  const Rotation rt = p.rotation.inverse();
  return Pose(rt, -(rt * p.translation), p.to, p.from);
}

/// Roll/pitch/yaw, extrinsic X-Y-Z: R = Rz(yaw) * Ry(pitch) * Rx(roll).
/// Each angle is kept in (-pi, pi].
struct TaitBryan {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  TaitBryan() = default;
  TaitBryan(double r, double p, double y)
      : roll(wrap_angle(r)), pitch(wrap_angle(p)), yaw(wrap_angle(y)) {}
  explicit TaitBryan(const Vec3& v) : TaitBryan(v.x(), v.y(), v.z()) {}

  Vec3 vec() const { return {roll, pitch, yaw}; }
  double operator[](int i) const { return i == 0 ? roll : (i == 1 ? pitch : yaw); }
};

inline Rotation taitbryan_to_rotation(const TaitBryan& t) {
  return Rotation::about_z(t.yaw) * Rotation::about_y(t.pitch) * Rotation::about_x(t.roll);
}

struct TaitBryanExtraction {
  TaitBryan angles;
  bool gimbal_lock = false;
};

inline constexpr double kGimbalLockMargin = 1e-6;

/// Inverse of taitbryan_to_rotation. Pitch lands in [-pi/2, pi/2]; near
/// gimbal lock roll is pinned to 0 and the remainder goes into yaw.
inline TaitBryanExtraction extract_taitbryan(const Rotation& r) {
  const Mat3 m = r.matrix();
  const double pitch = std::asin(std::clamp(-m(2, 0), -1.0, 1.0));
  TaitBryanExtraction out;
  if (std::abs(pitch) > kPi / 2 - kGimbalLockMargin) {
    out.gimbal_lock = true;
    out.angles = TaitBryan(0.0, pitch, std::atan2(-m(0, 1), m(1, 1)));
    return out;
  }
  out.angles = TaitBryan(std::atan2(m(2, 1), m(2, 2)), pitch, std::atan2(m(1, 0), m(0, 0)));
  return out;
}

inline TaitBryan rotation_to_taitbryan(const Rotation& r) { return extract_taitbryan(r).angles; }

/// Pinhole intrinsics without distortion.
struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidConfig("intrinsics: focal lengths must be > 0");
    if (width <= 0 || height <= 0) throw InvalidConfig("intrinsics: image size must be > 0");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      throw InvalidConfig("intrinsics: principal point must lie inside the image");
    }
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < width && v < height;
  }
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Camera-frame point for pixel (u, v) at depth z.
inline Vec3 backproject(const CameraIntrinsics& k, double u, double v, double z) {
  if (!(z > 0.0)) throw NonPositiveDepth("backproject: depth must be > 0, got " + std::to_string(z));
  return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

inline Pixel project(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > 0.0)) throw BehindCamera("project: point has z = " + std::to_string(p.z()));
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

/// Moves the previous object pose into the current camera frame using the
/// camera's inter-frame motion. Exact when the object is static in the world.
inline Pose compensate_camera_motion(const Pose& obj_prev_in_cam_prev, const Pose& cam_delta) {
  return compose(cam_delta, obj_prev_in_cam_prev);
}

inline std::ostream& operator<<(std::ostream& os, const TaitBryan& t) {
  return os << "(" << t.roll << ", " << t.pitch << ", " << t.yaw << ")";
}

inline std::ostream& operator<<(std::ostream& os, const Pose& p) {
  const auto& q = p.rotation.quaternion();
  return os << p.from.str() << "->" << p.to.str() << " q=(" << q.w() << ", " << q.x() << ", "
            << q.y() << ", " << q.z() << ") t=(" << p.translation.transpose() << ")";
}

}  // namespace dyntrack
