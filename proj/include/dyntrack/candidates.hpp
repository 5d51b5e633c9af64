#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"
#include "dyntrack/kalman.hpp"

namespace dyntrack {

struct SamplerConfig {
  double sigma_threshold = 0.1;  // rad

  void validate() const {
    if (!(sigma_threshold > 0.0)) throw InvalidConfig("sampler.sigma_threshold must be > 0");
  }
};

/// Offset of one hypothesis from the filter mean, in units of sigma per axis.
using AxisOffsets = std::array<int, 3>;

/// World-frame rotation hypotheses around the filter mean.
struct CandidateSet {
  std::vector<Rotation> rotations;
  std::vector<AxisOffsets> provenance;
  Vec3 translation = Vec3::Zero();
  TaitBryan mean;
  Vec3 sigma = Vec3::Zero();

  std::size_t size() const { return rotations.size(); }
};

/// Axes whose sigma reaches the threshold get {mu, mu - sigma, mu + sigma};
/// the others keep only mu. Candidates are the Cartesian product, and the
/// centre hypothesis is always first.
inline CandidateSet sample_candidates(const KalmanState& state, const SamplerConfig& config) {
  CandidateSet set;
  set.mean = state.theta;
  set.sigma = per_axis_sigma(state);
  std::array<std::vector<int>, 3> offsets;
  for (int i = 0; i < 3; ++i) {
    offsets[i] = set.sigma[i] < config.sigma_threshold ? std::vector<int>{0} : std::vector<int>{0, -1, 1};
  }
  for (int r : offsets[0]) {
    for (int p : offsets[1]) {
      for (int y : offsets[2]) {
        const AxisOffsets o = {r, p, y};
        Vec3 angles = set.mean.vec();
        for (int i = 0; i < 3; ++i) angles[i] += o[i] * set.sigma[i];
        set.rotations.push_back(taitbryan_to_rotation(TaitBryan(angles)));
        set.provenance.push_back(o);
      }
    }
  }
  return set;
}

/// Object -> camera poses for each hypothesis: R_o^c = (R_c^w)^T R_o^w.
inline std::vector<Pose> to_camera_frame(const CandidateSet& set, const Pose& cam_pose_world,
                                         const FrameLabel& object_frame = "object") {
  const Rotation world_to_cam = cam_pose_world.rotation.inverse();
  std::vector<Pose> out;
  out.reserve(set.size());
  for (const auto& r : set.rotations) {
    out.emplace_back(world_to_cam * r, set.translation, object_frame, cam_pose_world.from);
  }
  return out;
}

struct TemplateConfig {
  int n_views = 42;
  int n_inplane = 12;

  void validate() const {
    if (n_views < 1 || n_inplane < 1) throw InvalidConfig("templates: n_views and n_inplane must be >= 1");
  }
};

/// Unit-sphere viewpoints: the 12 icosahedron vertices, or 42 after one
/// midpoint subdivision.
inline std::vector<Vec3> icosahedron_viewpoints(int n_views) {
  if (n_views != 12 && n_views != 42) {
    throw UnsupportedViewCount("icosahedron viewpoints: n_views must be 12 or 42, got " +
                               std::to_string(n_views));
  }
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  if (n_views == 12) return v;

  // Edges join vertices at the minimum pairwise distance.
  double edge = 1e9;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) edge = std::min(edge, (v[i] - v[j]).norm());
  const std::size_t base = v.size();
  for (std::size_t i = 0; i < base; ++i) {
    for (std::size_t j = i + 1; j < base; ++j) {
      if ((v[i] - v[j]).norm() < edge * (1.0 + 1e-9)) v.push_back((v[i] + v[j]).normalized());
    }
  }
  return v;
}

/// Object -> camera rotation for a camera sitting at `dir` on the viewing
/// sphere and looking at the object origin. Camera z points at the origin and
/// camera x is perpendicular to world z (world y near the poles).
inline Rotation look_at_rotation(const Vec3& dir) {
  const Vec3 z = -dir.normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(z.dot(up)) > 0.999) up = Vec3::UnitY();
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 cam_in_obj;
  cam_in_obj.col(0) = x;
  cam_in_obj.col(1) = y;
  cam_in_obj.col(2) = z;
  return Rotation::from_matrix(cam_in_obj.transpose());
}

/// n_views x n_inplane initialisation templates; in-plane rotations are about
/// the camera optical axis in steps of 2 pi / n_inplane.
inline std::vector<Rotation> icosahedron_templates(const TemplateConfig& config) {
  config.validate();
  const auto views = icosahedron_viewpoints(config.n_views);
  std::vector<Rotation> out;
  out.reserve(views.size() * static_cast<std::size_t>(config.n_inplane));
  for (const auto& d : views) {
    const Rotation base = look_at_rotation(d);
    for (int k = 0; k < config.n_inplane; ++k) {
      out.push_back(Rotation::about_z(kTwoPi * k / config.n_inplane) * base);
    }
  }
  return out;
}

}  // namespace dyntrack
