#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dyntrack/candidates.hpp"
#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"
#include "dyntrack/kalman.hpp"
#include "dyntrack/model.hpp"
#include "dyntrack/refine.hpp"
#include "dyntrack/simulation.hpp"

namespace dyntrack {

struct AblationFlags {
  bool disable_translation_compensation = false;  // never use the 2D tracker
  bool disable_rotation_estimation = false;       // propagate the previous rotation only
};

struct TrackerConfig {
  FilterNoiseConfig filter_noise;
  SamplerConfig sampler;
  CascadeSchedule schedule;
  AblationFlags ablation;
  double bbox_gate = 120.0;  // px, max jump of the box centre from the template

  void validate() const {
    filter_noise.validate();
    sampler.validate();
    schedule.validate();
    if (!(bbox_gate > 0.0)) throw InvalidConfig("tracker.bbox_gate must be > 0");
  }
};

inline TrackerConfig ablation_variant(TrackerConfig config, const AblationFlags& flags) {
  config.ablation = flags;
  return config;
}

/// Named ablation variants: "full", "no-translation", "no-rotation".
inline AblationFlags variant_flags(const std::string& name) {
  if (name == "full") return {};
  if (name == "no-translation") return {true, false};
  if (name == "no-rotation") return {false, true};
  throw InvalidConfig("unknown variant '" + name + "' (expected full, no-translation or no-rotation)");
}

enum class TranslationSource { kVioCompensation, kBboxBackprojection };

inline std::string to_string(TranslationSource s) {
  return s == TranslationSource::kVioCompensation ? "vio-compensation" : "bbox-backprojection";
}

/// Fixed inputs of one tracking run.
struct TrackingSetup {
  CameraIntrinsics intrinsics;
  const ObjectModel* model = nullptr;
};

struct TrackerState {
  Pose last_pose_cam;   // object@k -> camera@k
  KalmanState kf;       // world-frame orientation
  Pose cam_pose_world;  // camera@k -> world, integrated from VIO
  BoundingBox template_bbox;
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
};

struct TrackResult {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  Pose pose_cam;
  std::size_t candidate_count = 1;
  TranslationSource translation_source = TranslationSource::kVioCompensation;
  Vec3 sigma = Vec3::Zero();
  std::vector<double> update_magnitudes;  // winner's rotation update per round
  double step_seconds = 0.0;              // wall time, not persisted
};

/// World frame := camera frame at the first frame.
inline TrackerState initialize(const Pose& first_pose, const TrackingSetup& setup, const TrackerConfig& config,
                               std::int64_t frame_index = 0, double timestamp = 0.0) {
  TrackerState s;
  s.frame_index = frame_index;
  s.timestamp = timestamp;
  s.last_pose_cam = first_pose.relabeled(object_label(frame_index), camera_label(frame_index));
  s.cam_pose_world = Pose::identity(camera_label(frame_index), "world");
  s.kf = make_kalman_state(rotation_to_taitbryan(first_pose.rotation), config.filter_noise.initial_variance,
                           timestamp, /*rate_known=*/false);
  if (setup.model != nullptr && first_pose.translation.z() > 0.0) {
    s.template_bbox = project_region(s.last_pose_cam, *setup.model, setup.intrinsics);
  }
  return s;
}

/// One closed-loop tracking step.
inline std::pair<TrackerState, TrackResult> step(const TrackerState& state, const SensorFrame& frame,
                                                 const TrackerConfig& config, const Refiner& refiner,
                                                 const TrackingSetup& setup) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(frame.timestamp > state.timestamp)) {
    throw OutOfOrderFrame("frame " + std::to_string(frame.index) + " at t=" + std::to_string(frame.timestamp) +
                          " does not follow t=" + std::to_string(state.timestamp));
  }
  const double dt = frame.timestamp - state.timestamp;
  const std::int64_t k = frame.index;
  TrackerState next = state;
  TrackResult res;
  res.frame_index = k;
  res.timestamp = frame.timestamp;

  // (1) Camera ego-motion.
  next.cam_pose_world = compose(state.cam_pose_world, invert(frame.vio_delta));

  // (2) Translation hypothesis: 2D tracker when plausible, else VIO compensation.
  const Pose compensated = compensate_camera_motion(state.last_pose_cam, frame.vio_delta);
  Vec3 translation = compensated.translation;
  res.translation_source = TranslationSource::kVioCompensation;
  if (!config.ablation.disable_translation_compensation && frame.observation) {
    const auto& obs = *frame.observation;
    const double jump = std::hypot(obs.box.u - state.template_bbox.u, obs.box.v - state.template_bbox.v);
    if (jump <= config.bbox_gate && obs.median_depth > 0.0) {
      translation = backproject(setup.intrinsics, obs.box.u, obs.box.v, obs.median_depth);
      res.translation_source = TranslationSource::kBboxBackprojection;
    }
  }

  // (3, 4) Rotation hypotheses.
  std::vector<Pose> candidates;
  KalmanState predicted = state.kf;
  if (config.ablation.disable_rotation_estimation) {
    candidates.emplace_back(state.last_pose_cam.rotation, translation, object_label(k), camera_label(k));
  } else {
    predicted = predict(state.kf, dt, config.filter_noise);
    CandidateSet set = sample_candidates(predicted, config.sampler);
    set.translation = translation;
    res.sigma = set.sigma;
    candidates = to_camera_frame(set, next.cam_pose_world, object_label(k));
  }
  res.candidate_count = candidates.size();

  // (5) Hierarchical refinement.
  const CascadeResult cascade = run_cascade(candidates, frame, refiner, config.schedule);
  for (const auto& round : cascade.rounds) {
    const auto pos = std::find(round.refined.begin(), round.refined.end(), cascade.winner);
    res.update_magnitudes.push_back(round.magnitudes[static_cast<std::size_t>(pos - round.refined.begin())]);
  }
  next.last_pose_cam = cascade.final_pose;
  res.pose_cam = cascade.final_pose;

  // (6) Filter update with the refined world-frame orientation.
  if (!config.ablation.disable_rotation_estimation) {
    const Rotation obj_world = next.cam_pose_world.rotation * cascade.final_pose.rotation;
    next.kf = update(predicted, rotation_to_taitbryan(obj_world), config.filter_noise);
  }

  // (7) Feed the projected region back to the 2D tracker.
  if (setup.model != nullptr && cascade.final_pose.translation.z() > 0.0) {
    next.template_bbox = project_region(cascade.final_pose, *setup.model, setup.intrinsics);
  }

  next.frame_index = k;
  next.timestamp = frame.timestamp;
  res.step_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(next), std::move(res)};
}

/// Tracks a whole sequence. The first frame is consumed by initialisation
/// and reported as the initial pose.
inline std::vector<TrackResult> run_sequence(const std::vector<SensorFrame>& frames, const Pose& initial_pose,
                                             const TrackerConfig& config, const Refiner& refiner,
                                             const TrackingSetup& setup) {
  if (frames.empty()) throw EmptyInput("run_sequence: no frames");
  config.validate();
  TrackerState state = initialize(initial_pose, setup, config, frames.front().index, frames.front().timestamp);
  std::vector<TrackResult> out;
  out.reserve(frames.size());
  TrackResult first;
  first.frame_index = frames.front().index;
  first.timestamp = frames.front().timestamp;
  first.pose_cam = state.last_pose_cam;
  first.sigma = per_axis_sigma(state.kf);
  out.push_back(std::move(first));
  for (std::size_t i = 1; i < frames.size(); ++i) {
    auto [next, res] = step(state, frames[i], config, refiner, setup);
    state = std::move(next);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace dyntrack
