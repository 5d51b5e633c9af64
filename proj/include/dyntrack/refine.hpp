#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"
#include "dyntrack/simulation.hpp"

namespace dyntrack {

/// Output of one refiner call: t' = t + delta_t, R' = delta_r * R.
struct PoseUpdate {
  Vec3 delta_t = Vec3::Zero();
  Rotation delta_r;
};

/// Pose refinement contract.
///
/// A refiner sees a coarse object -> camera pose and the current frame and
/// returns a correction. Implementations must be deterministic for a given
/// (candidate, frame, seed) and safe to call concurrently. An out-of-process
/// adapter would pass the pose, the intrinsics, the frame's box and median
/// depth, and read back (delta_t, delta_r).
class Refiner {
 public:
  virtual ~Refiner() = default;
  virtual PoseUpdate refine(const Pose& candidate, const SensorFrame& frame) const = 0;
};

inline Pose apply_update(const Pose& pose, const PoseUpdate& upd) {
  return Pose(upd.delta_r * pose.rotation, pose.translation + upd.delta_t, pose.from, pose.to);
}

/// Geodesic angle of delta_r; used to rank hypotheses.
inline double rotation_update_magnitude(const PoseUpdate& upd) { return upd.delta_r.angle(); }

struct BasinRefinerConfig {
  double basin_angle = 0.15;           // rad, largest correctable rotation error
  double basin_translation = 0.05;     // m, largest correctable translation error
  double gain = 0.6;                   // fraction of the error removed per call
  double residual_rot_noise = 0.005;   // rad per axis
  double residual_trans_noise = 0.001; // m per axis
  double wander_angle = 0.1;           // rad, out-of-basin update size
  double wander_translation = 0.01;    // m, out-of-basin update size
  std::uint64_t seed = 0;

  void validate() const {
    if (!(basin_angle > 0.0 && basin_angle <= kPi)) throw InvalidConfig("refiner.basin_angle must lie in (0, pi]");
    if (!(basin_translation > 0.0)) throw InvalidConfig("refiner.basin_translation must be > 0");
    if (!(gain > 0.0 && gain <= 1.0)) throw InvalidConfig("refiner.gain must lie in (0, 1]");
    if (residual_rot_noise < 0 || residual_trans_noise < 0 || wander_angle < 0 || wander_translation < 0) {
      throw InvalidConfig("refiner: noise and wander sizes must be >= 0");
    }
  }
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finaliser over a running combination
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t h, double v) { return mix64(h, std::bit_cast<std::uint64_t>(v)); }

}  // namespace detail

/// Stand-in for a learned render-and-compare refiner with a finite basin of
/// convergence. Inside the basin it pulls the candidate a fraction `gain` of
/// the way to the simulator truth, plus residual noise. Outside it returns a
/// fixed-size update in a random direction that carries no information about
/// the truth.
class BasinRefiner final : public Refiner {
 public:
  explicit BasinRefiner(BasinRefinerConfig config = {}) : config_(config) { config_.validate(); }

  const BasinRefinerConfig& config() const { return config_; }

  PoseUpdate refine(const Pose& candidate, const SensorFrame& frame) const override {
    const GroundTruth& truth = oracle::ground_truth(frame);
    std::mt19937_64 rng(seed_for(candidate, frame));
    const Rotation err = truth.object_cam.rotation * candidate.rotation.inverse();
    const Vec3 err_t = truth.object_cam.translation - candidate.translation;

    PoseUpdate upd;
    if (err.angle() < config_.basin_angle && err_t.norm() < config_.basin_translation) {
      Vec3 nr, nt;
      for (int i = 0; i < 3; ++i) nr[i] = detail::std_normal(rng) * config_.residual_rot_noise;
      for (int i = 0; i < 3; ++i) nt[i] = detail::std_normal(rng) * config_.residual_trans_noise;
      upd.delta_r = Rotation::from_rotation_vector(nr) * Rotation::from_rotation_vector(config_.gain * err.log());
      upd.delta_t = config_.gain * err_t + nt;
      return upd;
    }
    upd.delta_r = Rotation::from_axis_angle(detail::random_unit_vector(rng), config_.wander_angle);
    upd.delta_t = config_.wander_translation * detail::random_unit_vector(rng);
    return upd;
  }

 private:
  std::uint64_t seed_for(const Pose& c, const SensorFrame& f) const {
    std::uint64_t h = detail::mix64(config_.seed, static_cast<std::uint64_t>(f.index));
    h = detail::mix64(h, f.timestamp);
    const auto& q = c.rotation.quaternion();
    for (double v : {q.w(), q.x(), q.y(), q.z()}) h = detail::mix64(h, v);
    for (int i = 0; i < 3; ++i) h = detail::mix64(h, c.translation[i]);
    return h;
  }

  BasinRefinerConfig config_;
};

/// Candidate counts per refinement round. Round i refines k_sequence[i]
/// hypotheses and keeps k_sequence[i + 1]; the final entry is 1.
struct CascadeSchedule {
  std::vector<std::size_t> k_sequence = {27, 9, 3, 1};

  std::size_t iterations() const { return k_sequence.empty() ? 0 : k_sequence.size() - 1; }

  void validate() const {
    if (k_sequence.size() < 2) throw InvalidConfig("schedule.k_sequence needs at least two entries");
    if (k_sequence.back() != 1) throw InvalidConfig("schedule.k_sequence must end with 1");
    for (std::size_t i = 1; i < k_sequence.size(); ++i) {
      if (k_sequence[i] > k_sequence[i - 1] || k_sequence[i] == 0) {
        throw InvalidConfig("schedule.k_sequence must be positive and non-increasing");
      }
    }
  }
};

struct CascadeRound {
  std::vector<std::size_t> refined;    // candidate indices refined this round
  std::vector<double> magnitudes;      // rotation update per refined candidate
  std::vector<std::size_t> survivors;  // indices kept, best first
};

struct CascadeResult {
  Pose final_pose;
  std::size_t winner = 0;  // index into the input candidates
  std::vector<CascadeRound> rounds;
};

/// Hierarchical refinement: refine the survivors, rank them by rotation
/// update size (ties by candidate index) and keep the next round's quota.
inline CascadeResult run_cascade(const std::vector<Pose>& candidates, const SensorFrame& frame,
                                 const Refiner& refiner, const CascadeSchedule& schedule) {
  if (candidates.empty()) throw EmptyCandidates("run_cascade: no candidates");
  schedule.validate();

  std::vector<Pose> poses = candidates;
  std::vector<std::size_t> alive(std::min(candidates.size(), schedule.k_sequence.front()));
  std::iota(alive.begin(), alive.end(), std::size_t{0});

  CascadeResult result;
  std::vector<double> mag(candidates.size(), 0.0);
  for (std::size_t it = 0; it < schedule.iterations(); ++it) {
    CascadeRound round;
    round.refined = alive;
    for (std::size_t idx : alive) {
      const PoseUpdate upd = refiner.refine(poses[idx], frame);
      poses[idx] = apply_update(poses[idx], upd);
      mag[idx] = rotation_update_magnitude(upd);
      round.magnitudes.push_back(mag[idx]);
    }
    std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
      return mag[a] < mag[b] || (mag[a] == mag[b] && a < b);
    });
    alive.resize(std::min(alive.size(), schedule.k_sequence[it + 1]));
    round.survivors = alive;
    result.rounds.push_back(std::move(round));
  }
  result.winner = alive.front();
  result.final_pose = poses[result.winner];
  return result;
}

}  // namespace dyntrack
