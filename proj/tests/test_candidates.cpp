#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dyntrack/candidates.hpp"
#include "test_util.hpp"

using namespace dyntrack;
using namespace testutil;

namespace {

KalmanState state_with_sigma(const Vec3& mean, const Vec3& sigma) {
  KalmanState s = make_kalman_state(TaitBryan(mean), 0.0);
  s.variance = sigma.cwiseProduct(sigma);
  return s;
}

}  // namespace

TEST(Sampler, AllBelowThresholdGivesMeanOnly) {
  const Vec3 mean(0.3, -0.2, 1.1);
  const CandidateSet set = sample_candidates(state_with_sigma(mean, Vec3(0.01, 0.02, 0.05)), SamplerConfig{});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_LT(geodesic_angle(set.rotations[0], Rotation::from_matrix(rz(1.1) * ry(-0.2) * rx(0.3))), 1e-12);
}

TEST(Sampler, AllAboveThresholdGives27) {
  const CandidateSet set = sample_candidates(state_with_sigma(Vec3::Zero(), Vec3::Constant(0.2)), SamplerConfig{});
  EXPECT_EQ(set.size(), 27u);
  std::set<AxisOffsets> seen(set.provenance.begin(), set.provenance.end());
  EXPECT_EQ(seen.size(), 27u);
}

TEST(Sampler, MixedPatternEnumeration) {
  const Vec3 mean(0.1, 0.2, -0.4);
  const CandidateSet set = sample_candidates(state_with_sigma(mean, Vec3(0.2, 0.01, 0.3)), SamplerConfig{0.1});
  ASSERT_EQ(set.size(), 9u);
  bool plus = false, minus = false;
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(set.provenance[i][1], 0);
    const Vec3 angles = mean + Vec3(set.provenance[i][0] * 0.2, 0.0, set.provenance[i][2] * 0.3);
    const Mat3 expected = rz(angles.z()) * ry(angles.y()) * rx(angles.x());
    EXPECT_LT(geodesic_angle(set.rotations[i], Rotation::from_matrix(expected)), 1e-12);
    plus = plus || set.provenance[i][2] == 1;
    minus = minus || set.provenance[i][2] == -1;
  }
  EXPECT_TRUE(plus && minus);
}

TEST(Sampler, CountLawForAllEightPatterns) {
  const double th = 0.1;
  for (int mask = 0; mask < 8; ++mask) {
    Vec3 sigma;
    std::size_t expected = 1;
    for (int i = 0; i < 3; ++i) {
      const bool above = (mask >> i) & 1;
      sigma[i] = above ? th : th * 0.999;  // exactly at the threshold counts as above
      expected *= above ? 3 : 1;
    }
    const KalmanState s = state_with_sigma(Vec3(0.5, -0.5, 2.0), sigma);
    const CandidateSet set = sample_candidates(s, SamplerConfig{th});
    EXPECT_EQ(set.size(), expected) << "mask " << mask;
    std::size_t centred = 0;
    for (const auto& o : set.provenance) {
      for (int v : o) EXPECT_TRUE(v == -1 || v == 0 || v == 1);
      if (o == AxisOffsets{0, 0, 0}) ++centred;
    }
    EXPECT_EQ(centred, 1u);
    EXPECT_EQ(set.provenance[0], (AxisOffsets{0, 0, 0}));
    // The centre candidate is the filter mean exactly.
    const Rotation mean = taitbryan_to_rotation(s.theta);
    EXPECT_EQ(set.rotations[0].quaternion().coeffs(), mean.quaternion().coeffs());
  }
}

TEST(Sampler, RaisingThresholdNeverAddsCandidates) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 sigma = random_vec(rng, 0.4).cwiseAbs();
    const KalmanState s = state_with_sigma(random_vec(rng, 1.0), sigma);
    std::size_t last = 27;
    for (double th = 0.01; th < 0.5; th += 0.01) {
      const std::size_t n = sample_candidates(s, SamplerConfig{th}).size();
      EXPECT_LE(n, last);
      last = n;
    }
  }
}

TEST(Sampler, ConfigValidation) {
  EXPECT_THROW(SamplerConfig{0.0}.validate(), InvalidConfig);
  EXPECT_THROW(SamplerConfig{-1.0}.validate(), InvalidConfig);
}

TEST(ToCameraFrame, IdentityCamera) {
  const CandidateSet set = sample_candidates(state_with_sigma(Vec3(0.1, 0.2, 0.3), Vec3::Constant(0.2)), {});
  const auto poses = to_camera_frame(set, Pose::identity("camera", "world"));
  ASSERT_EQ(poses.size(), set.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_LT(geodesic_angle(poses[i].rotation, set.rotations[i]), 1e-15);
    EXPECT_EQ(poses[i].to, FrameLabel("camera"));
  }
}

TEST(ToCameraFrame, WorldRecompositionRecoversCandidate) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    CandidateSet set = sample_candidates(state_with_sigma(random_vec(rng, 1.0), Vec3::Constant(0.2)), {});
    set.translation = random_vec(rng, 1.0);
    const Pose cam = random_pose(rng, "camera", "world");
    const auto poses = to_camera_frame(set, cam);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const Mat3 world = cam.rotation.matrix() * poses[i].rotation.matrix();  // R_o^w = R_c^w R_o^c
      EXPECT_LT((world - set.rotations[i].matrix()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_EQ(poses[i].translation, set.translation);
    }
  }
}

TEST(Icosahedron, ViewpointsAreUnitAndCounted) {
  for (int n : {12, 42}) {
    const auto v = icosahedron_viewpoints(n);
    ASSERT_EQ(v.size(), static_cast<std::size_t>(n));
    for (const auto& p : v) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(icosahedron_viewpoints(20), UnsupportedViewCount);
  EXPECT_THROW(icosahedron_templates({7, 1}), UnsupportedViewCount);
}

TEST(Icosahedron, MinimumArcIsEdgeArc) {
  // Adjacent vertices of a unit icosahedron subtend atan(2).
  const double edge_arc = std::atan(2.0);
  EXPECT_NEAR(edge_arc, 1.1071, 1e-4);
  const auto v = icosahedron_viewpoints(12);
  double min_arc = 10.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) min_arc = std::min(min_arc, std::acos(v[i].dot(v[j])));
  EXPECT_NEAR(min_arc, edge_arc, 1e-9);
}

TEST(Icosahedron, SubdividedViewsAreDistinct) {
  const auto v = icosahedron_viewpoints(42);
  double min_arc = 10.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) min_arc = std::min(min_arc, std::acos(std::min(1.0, v[i].dot(v[j]))));
  EXPECT_GT(min_arc, 0.5);
}

TEST(Templates, TwelveViewsAreSeparatedByEdgeArc) {
  const auto t = icosahedron_templates({12, 1});
  ASSERT_EQ(t.size(), 12u);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) EXPECT_GE(geodesic_angle(t[i], t[j]), std::atan(2.0) - 1e-9);
}

TEST(Templates, CountsAndDistinctness) {
  EXPECT_EQ(icosahedron_templates({12, 4}).size(), 48u);
  const auto t = icosahedron_templates({42, 12});
  ASSERT_EQ(t.size(), 42u * 12u);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) ASSERT_GT(geodesic_angle(t[i], t[j]), 1e-6);
}

TEST(Templates, CameraLooksAtObject) {
  for (const auto& d : icosahedron_viewpoints(42)) {
    const Rotation r = look_at_rotation(d);
    // The object origin, seen from a camera at `d`, sits on the optical axis.
    const Vec3 origin_in_cam = r * (Vec3::Zero() - d);
    EXPECT_LT(origin_in_cam.head<2>().norm(), 1e-12);
    EXPECT_GT(origin_in_cam.z(), 0.0);
  }
}

TEST(Templates, InPlaneStepsRotateAboutOpticalAxis) {
  const auto t = icosahedron_templates({12, 6});
  for (int k = 1; k < 6; ++k) {
    EXPECT_NEAR(geodesic_angle(t[0], t[static_cast<std::size_t>(k)]), std::min(k, 6 - k) * kTwoPi / 6, 1e-9);
    const Rotation rel = t[static_cast<std::size_t>(k)] * t[0].inverse();
    EXPECT_LT(std::abs(std::abs(rel.log().normalized().z()) - 1.0), 1e-9);
  }
}
