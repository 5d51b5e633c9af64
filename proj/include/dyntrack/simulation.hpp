#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"
#include "dyntrack/model.hpp"

namespace dyntrack {

enum class TrajectoryKind { kConstantVelocity, kSinusoidal, kStepChange, kWaypointSpline };

inline std::string to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::kConstantVelocity: return "constant-velocity";
    case TrajectoryKind::kSinusoidal: return "sinusoidal";
    case TrajectoryKind::kStepChange: return "step-change";
    case TrajectoryKind::kWaypointSpline: return "waypoint-spline";
  }
  return "?";
}

inline TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "constant-velocity") return TrajectoryKind::kConstantVelocity;
  if (s == "sinusoidal") return TrajectoryKind::kSinusoidal;
  if (s == "step-change") return TrajectoryKind::kStepChange;
  if (s == "waypoint-spline") return TrajectoryKind::kWaypointSpline;
  throw InvalidConfig("unknown trajectory kind '" + s + "'");
}

/// World-frame motion of a rigid body.
///
/// Angular velocities are body-frame rotation vectors, so the orientation is
/// R(t) = R0 * Exp(phi(t)) with phi the integrated angular profile.
/// - constant-velocity: translation v*t, rotation angle omega*t.
/// - sinusoidal: velocity v*cos(2 pi f t); `linear_velocity` and
///   `angular_velocity` are the peak rates.
/// - step-change: rates switch to the `*_after` values at `step_time`.
/// - waypoint-spline: Catmull-Rom through `waypoints` (offsets from the initial
///   position, evenly spaced in time, ending at `duration`); rotation as for
///   constant-velocity.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kConstantVelocity;
  Vec3 initial_position = Vec3::Zero();
  TaitBryan initial_orientation;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  double linear_frequency = 1.0;
  double angular_frequency = 1.0;
  double step_time = 0.0;
  Vec3 linear_velocity_after = Vec3::Zero();
  Vec3 angular_velocity_after = Vec3::Zero();
  std::vector<Vec3> waypoints;
  double duration = 1.0;

  void validate(const std::string& prefix) const {
    if (!(duration > 0.0)) throw InvalidConfig(prefix + ".duration must be > 0");
    if (kind == TrajectoryKind::kSinusoidal && (!(linear_frequency > 0.0) || !(angular_frequency > 0.0))) {
      throw InvalidConfig(prefix + ".linear_frequency and " + prefix + ".angular_frequency must be > 0");
    }
    if (kind == TrajectoryKind::kStepChange && !(step_time >= 0.0 && step_time <= duration)) {
      throw InvalidConfig(prefix + ".step_time must lie in [0, duration]");
    }
    if (kind == TrajectoryKind::kWaypointSpline && waypoints.empty()) {
      throw InvalidConfig(prefix + ".waypoints must list at least one point");
    }
  }
};

namespace detail {

inline Vec3 catmull_rom(const std::vector<Vec3>& pts, double t, double duration) {
  const std::size_t n = pts.size() - 1;
  const double h = duration / static_cast<double>(n);
  const std::size_t i = std::min(n - 1, static_cast<std::size_t>(std::floor(t / h)));
  const double s = (t - static_cast<double>(i) * h) / h;
  auto tangent = [&](std::size_t k) -> Vec3 {
    if (k == 0) return (pts[1] - pts[0]) / h;
    if (k == n) return (pts[n] - pts[n - 1]) / h;
    return (pts[k + 1] - pts[k - 1]) / (2.0 * h);
  };
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * pts[i] + (s3 - 2 * s2 + s) * h * tangent(i) +
         (-2 * s3 + 3 * s2) * pts[i + 1] + (s3 - s2) * h * tangent(i + 1);
}

}  // namespace detail

/// Pose of the body in the world at time t (body -> world).
inline Pose evaluate_trajectory(const TrajectorySpec& spec, double t, FrameLabel body = "body") {
  if (!(t >= 0.0 && t <= spec.duration)) {
    throw OutOfRange("trajectory time " + std::to_string(t) + " outside [0, " +
                     std::to_string(spec.duration) + "]");
  }
  Vec3 p = spec.initial_position;
  Rotation r = taitbryan_to_rotation(spec.initial_orientation);
  switch (spec.kind) {
    case TrajectoryKind::kConstantVelocity:
      p += spec.linear_velocity * t;
      r = r * Rotation::from_rotation_vector(spec.angular_velocity * t);
      break;
    case TrajectoryKind::kSinusoidal: {
      const double wl = kTwoPi * spec.linear_frequency;
      const double wa = kTwoPi * spec.angular_frequency;
      p += spec.linear_velocity * (std::sin(wl * t) / wl);
      r = r * Rotation::from_rotation_vector(spec.angular_velocity * (std::sin(wa * t) / wa));
      break;
    }
    case TrajectoryKind::kStepChange: {
      const double before = std::min(t, spec.step_time);
      const double after = std::max(0.0, t - spec.step_time);
      p += spec.linear_velocity * before + spec.linear_velocity_after * after;
      r = r * Rotation::from_rotation_vector(spec.angular_velocity * before) *
          Rotation::from_rotation_vector(spec.angular_velocity_after * after);
      break;
    }
    case TrajectoryKind::kWaypointSpline: {
      std::vector<Vec3> pts;
      pts.reserve(spec.waypoints.size() + 1);
      pts.push_back(Vec3::Zero());
      pts.insert(pts.end(), spec.waypoints.begin(), spec.waypoints.end());
      p += detail::catmull_rom(pts, t, spec.duration);
      r = r * Rotation::from_rotation_vector(spec.angular_velocity * t);
      break;
    }
  }
  return Pose(r, p, std::move(body), "world");
}

struct NoiseSpec {
  double vio_rot_sigma = 0.0;    // rad per step
  double vio_trans_sigma = 0.0;  // m per step, per axis
  Vec3 vio_trans_bias = Vec3::Zero();
  double bbox_pixel_sigma = 0.0;
  double depth_sigma = 0.0;
  double depth_bias = 0.0;
  double dropout_prob = 0.0;

  void validate() const {
    if (vio_rot_sigma < 0 || vio_trans_sigma < 0 || bbox_pixel_sigma < 0 || depth_sigma < 0) {
      throw InvalidConfig("noise: sigmas must be >= 0");
    }
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
      throw InvalidConfig("noise.dropout_prob must lie in [0, 1]");
    }
  }
};

struct ScenarioConfig {
  TrajectorySpec object_trajectory;
  TrajectorySpec camera_trajectory;
  double frame_rate = 30.0;
  CameraIntrinsics intrinsics;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  std::string object_model_id = "box";
  std::size_t model_points = 1000;

  double duration() const { return std::min(object_trajectory.duration, camera_trajectory.duration); }

  std::size_t frame_count() const {
    return static_cast<std::size_t>(std::floor(duration() * frame_rate + 1e-9));
  }

  void validate() const {
    object_trajectory.validate("object");
    camera_trajectory.validate("camera");
    intrinsics.validate();
    noise.validate();
    if (!(frame_rate > 0.0)) throw InvalidConfig("scenario.frame_rate must be > 0");
    if (frame_count() < 2) {
      throw InvalidConfig("scenario: duration x frame_rate must give at least 2 frames");
    }
    if (model_points == 0) throw InvalidConfig("scenario.model_points must be >= 1");
  }
};

/// Simulator ground truth for one frame.
struct GroundTruth {
  Pose object_world;  // object -> world
  Pose camera_world;  // camera -> world
  Pose object_cam;    // object -> camera
};

/// Observation from the 2D tracker: box plus median depth at its centre.
struct BoxObservation {
  BoundingBox box;
  double median_depth = 0.0;
};

class SensorFrame;

/// The only doors to simulator truth. Tracking code must not call these; the
/// oracle refiner, metrics and test code do.
namespace oracle {
const GroundTruth* find_truth(const SensorFrame& f);
const GroundTruth& ground_truth(const SensorFrame& f);
void attach_truth(SensorFrame& f, GroundTruth truth);
}  // namespace oracle

/// One timestep of observations.
class SensorFrame {
 public:
  std::int64_t index = 0;
  double timestamp = 0.0;
  Pose vio_delta;  // camera@(index-1) -> camera@index
  std::optional<BoxObservation> observation;

  bool has_truth() const { return truth_.has_value(); }

 private:
  std::optional<GroundTruth> truth_;

  friend const GroundTruth* oracle::find_truth(const SensorFrame&);
  friend void oracle::attach_truth(SensorFrame&, GroundTruth);
};

namespace oracle {
inline const GroundTruth* find_truth(const SensorFrame& f) { return f.truth_ ? &*f.truth_ : nullptr; }
inline const GroundTruth& ground_truth(const SensorFrame& f) {
  const GroundTruth* t = find_truth(f);
  if (t == nullptr) throw MissingTruth("frame " + std::to_string(f.index) + " carries no ground truth");
  return *t;
}
inline void attach_truth(SensorFrame& f, GroundTruth truth) { f.truth_ = std::move(truth); }
}  // namespace oracle

inline FrameLabel camera_label(std::int64_t i) { return {"camera", i}; }
inline FrameLabel object_label(std::int64_t i) { return {"object", i}; }

namespace detail {

inline double std_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
  for (;;) {
    Vec3 v(std_normal(rng), std_normal(rng), std_normal(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace detail

/// Noisy VIO relative pose camera(prev) -> camera(now).
inline Pose measure_vio(const Pose& cam_prev_world, const Pose& cam_now_world, const NoiseSpec& noise,
                        std::mt19937_64& rng) {
  const Pose truth = compose(invert(cam_now_world), cam_prev_world);
  const Vec3 axis = detail::random_unit_vector(rng);
  const double angle = detail::std_normal(rng) * noise.vio_rot_sigma;
  Vec3 dt;
  for (int i = 0; i < 3; ++i) dt[i] = detail::std_normal(rng) * noise.vio_trans_sigma;
  if (noise.vio_rot_sigma == 0.0 && noise.vio_trans_sigma == 0.0 && noise.vio_trans_bias.isZero()) {
    return truth;
  }
  return Pose(Rotation::from_axis_angle(axis, angle) * truth.rotation,
              truth.translation + dt + noise.vio_trans_bias, truth.from, truth.to);
}

/// Simulated depth-informed 2D tracker output. Absent on dropout or when the
/// model origin projects outside the image.
inline std::optional<BoxObservation> measure_bbox(const Pose& obj_pose_cam, const ObjectModel& model,
                                                  const CameraIntrinsics& k, const NoiseSpec& noise,
                                                  std::mt19937_64& rng) {
  if (!(obj_pose_cam.translation.z() > 0.0)) {
    throw BehindCamera("measure_bbox: object centre is behind the camera");
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double drop = uni(rng);
  const double nu = detail::std_normal(rng) * noise.bbox_pixel_sigma;
  const double nv = detail::std_normal(rng) * noise.bbox_pixel_sigma;
  const double nz = detail::std_normal(rng) * noise.depth_sigma;
  if (drop < noise.dropout_prob) return std::nullopt;
  BoundingBox box = project_region(obj_pose_cam, model, k);
  if (!k.contains(box.u, box.v)) return std::nullopt;
  box.u += nu;
  box.v += nv;
  const double z = obj_pose_cam.translation.z() + noise.depth_bias + nz;
  if (!(z > 0.0)) return std::nullopt;
  return BoxObservation{box, z};
}

struct Scenario {
  ScenarioConfig config;
  std::vector<SensorFrame> frames;
};

inline Scenario generate_scenario(const ScenarioConfig& config, const ObjectModel& model) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Scenario out{config, {}};
  const std::size_t n = config.frame_count();
  out.frames.reserve(n);
  Pose cam_prev;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::int64_t>(i);
    const double t = static_cast<double>(i) / config.frame_rate;
    const Pose obj_w = evaluate_trajectory(config.object_trajectory, t, object_label(idx));
    const Pose cam_w = evaluate_trajectory(config.camera_trajectory, t, camera_label(idx));
    const Pose obj_c = compose(invert(cam_w), obj_w);

    SensorFrame f;
    f.index = idx;
    f.timestamp = t;
    f.vio_delta = i == 0 ? Pose::identity(camera_label(-1), camera_label(0))
                         : measure_vio(cam_prev, cam_w, config.noise, rng);
    f.observation = measure_bbox(obj_c, model, config.intrinsics, config.noise, rng);
    oracle::attach_truth(f, GroundTruth{obj_w, cam_w, obj_c});
    out.frames.push_back(std::move(f));
    cam_prev = cam_w;
  }
  return out;
}

inline Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  return generate_scenario(config, builtin_model(config.object_model_id, config.model_points));
}

/// Ground-truth relative motion between object and camera, by finite
/// differences of the object-in-camera pose between consecutive frames.
struct RelativeMotion {
  std::vector<double> speed;          // m/s, per frame step
  std::vector<double> angular_speed;  // rad/s
  std::vector<double> step_rotation;  // rad per frame
  double peak_speed = 0.0;
  double peak_angular_speed = 0.0;

  double fraction_steps_above(double angle) const {
    if (step_rotation.empty()) return 0.0;
    const auto n = std::count_if(step_rotation.begin(), step_rotation.end(),
                                 [&](double a) { return a > angle; });
    return static_cast<double>(n) / static_cast<double>(step_rotation.size());
  }
};

inline RelativeMotion relative_motion(const Scenario& s) {
  RelativeMotion m;
  for (std::size_t i = 1; i < s.frames.size(); ++i) {
    const auto& a = oracle::ground_truth(s.frames[i - 1]).object_cam;
    const auto& b = oracle::ground_truth(s.frames[i]).object_cam;
    const double dt = s.frames[i].timestamp - s.frames[i - 1].timestamp;
    const double ang = geodesic_angle(a.rotation, b.rotation);
    m.speed.push_back((b.translation - a.translation).norm() / dt);
    m.angular_speed.push_back(ang / dt);
    m.step_rotation.push_back(ang);
    m.peak_speed = std::max(m.peak_speed, m.speed.back());
    m.peak_angular_speed = std::max(m.peak_angular_speed, m.angular_speed.back());
  }
  return m;
}

/// Named scenario presets.
///  - slow: gentle noise-free motion, the exactness tier.
///  - fast: relative speed > 1.5 m/s and angular speed > 3 rad/s.
///  - stress: relative speed > 3 m/s and angular speed > 8 rad/s.
inline ScenarioConfig scenario_preset(const std::string& name) {
  ScenarioConfig c;
  c.object_model_id = "036_wood_block";
  c.camera_trajectory.kind = TrajectoryKind::kSinusoidal;
  c.object_trajectory.kind = TrajectoryKind::kSinusoidal;
  c.object_trajectory.initial_position = Vec3(0.0, 0.0, 1.1);
  c.object_trajectory.initial_orientation = TaitBryan(0.2, 0.1, 0.0);
  if (name == "slow") {
    c.object_trajectory.kind = TrajectoryKind::kConstantVelocity;
    c.object_trajectory.linear_velocity = Vec3(0.05, 0.02, 0.0);
    c.object_trajectory.angular_velocity = Vec3(0.1, 0.0, 0.5);
    c.camera_trajectory.kind = TrajectoryKind::kConstantVelocity;
    c.camera_trajectory.linear_velocity = Vec3(0.0, 0.03, 0.0);
    c.camera_trajectory.angular_velocity = Vec3(0.0, 0.0, 0.2);
    c.object_trajectory.duration = c.camera_trajectory.duration = 3.0;
    return c;
  }
  c.noise.vio_rot_sigma = 0.002;
  c.noise.vio_trans_sigma = 0.002;
  c.noise.bbox_pixel_sigma = 1.0;
  c.noise.depth_sigma = 0.005;
  if (name == "fast") {
    c.object_trajectory.linear_velocity = Vec3(1.7, 0.5, 0.0);
    c.object_trajectory.linear_frequency = 1.5;
    c.object_trajectory.angular_velocity = Vec3(0.8, 0.5, 3.0);
    c.object_trajectory.angular_frequency = 0.5;
    c.camera_trajectory.linear_velocity = Vec3(0.0, 0.5, 0.3);
    c.camera_trajectory.linear_frequency = 1.0;
    c.camera_trajectory.angular_velocity = Vec3(0.3, 0.3, -1.0);
    c.camera_trajectory.angular_frequency = 1.0;
    c.noise.dropout_prob = 0.02;
    c.object_trajectory.duration = c.camera_trajectory.duration = 4.0;
    return c;
  }
  if (name == "stress") {
    c.object_trajectory.linear_velocity = Vec3(3.2, 0.8, 0.0);
    c.object_trajectory.linear_frequency = 2.0;
    c.object_trajectory.angular_velocity = Vec3(2.5, 1.5, 9.5);
    c.object_trajectory.angular_frequency = 0.5;
    c.camera_trajectory.linear_velocity = Vec3(0.0, 1.0, 0.5);
    c.camera_trajectory.linear_frequency = 1.5;
    c.camera_trajectory.angular_velocity = Vec3(0.5, 0.5, -4.0);
    c.camera_trajectory.angular_frequency = 1.0;
    c.object_trajectory.duration = c.camera_trajectory.duration = 4.0;
    return c;
  }
  throw InvalidConfig("unknown preset '" + name + "' (expected slow, fast or stress)");
}

}  // namespace dyntrack
