#pragma once

#include <gtest/gtest.h>

#include <random>

#include "dyntrack/geometry.hpp"

namespace testutil {

using dyntrack::Mat3;
using dyntrack::Pose;
using dyntrack::Rotation;
using dyntrack::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

/// Uniform on SO(3) via a normalised Gaussian quaternion.
inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Rotation::from_quaternion(Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)));
}

inline Pose random_pose(std::mt19937_64& rng, dyntrack::FrameLabel from = "a", dyntrack::FrameLabel to = "b") {
  return Pose(random_rotation(rng), random_vec(rng, 2.0), std::move(from), std::move(to));
}

/// Hand-written rotation matrices, independent of the library.
inline Mat3 rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
inline Mat3 ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Mat3 rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

/// Geodesic angle from the trace formula, as an independent check.
inline double trace_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

inline void expect_pose_near(const Pose& a, const Pose& b, double tol) {
  EXPECT_LE((a.rotation.matrix() - b.rotation.matrix()).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((a.translation - b.translation).cwiseAbs().maxCoeff(), tol);
}

}  // namespace testutil
