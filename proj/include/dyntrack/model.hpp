#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"

namespace dyntrack {

/// Rigid object point set in its own model frame.
///
/// The tracker treats the model-frame origin as the point that the 2D tracker's
/// box centre and median depth observe, so the built-in primitives are centred
/// on their centroid. Meshes loaded from disk are re-centred the same way.
class ObjectModel {
 public:
  ObjectModel(std::string name, std::vector<Vec3> points, bool symmetric = false)
      : name_(std::move(name)), points_(std::move(points)), symmetric_(symmetric) {
    if (points_.empty()) throw EmptyModel("object model '" + name_ + "' has no points");
    diameter_ = brute_force_diameter(points_);
    if (!(diameter_ > 0.0)) throw EmptyModel("object model '" + name_ + "' has zero extent");
  }

  const std::string& name() const { return name_; }
  const std::vector<Vec3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double diameter() const { return diameter_; }
  bool symmetric() const { return symmetric_; }

  static double brute_force_diameter(const std::vector<Vec3>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        best = std::max(best, (pts[i] - pts[j]).squaredNorm());
      }
    }
    return std::sqrt(best);
  }

 private:
  std::string name_;
  std::vector<Vec3> points_;
  bool symmetric_ = false;
  double diameter_ = 0.0;
};

namespace detail {

inline std::vector<Vec3> recentre(std::vector<Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  for (auto& p : pts) p -= c;
  return pts;
}

// Fixed seed: model geometry never depends on scenario seeds.
inline std::mt19937_64 model_rng() { return std::mt19937_64(0x5eedULL); }

}  // namespace detail

/// Points on the surface of an axis-aligned box, area-weighted.
inline ObjectModel make_box(std::string name, const Vec3& size, std::size_t n, bool symmetric = false) {
  auto rng = detail::model_rng();
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  const double ax = size.y() * size.z(), ay = size.x() * size.z(), az = size.x() * size.y();
  std::discrete_distribution<int> face({ax, ax, ay, ay, az, az});
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int f = face(rng);
    Vec3 p(uni(rng), uni(rng), uni(rng));
    p[f / 2] = (f % 2 == 0) ? -0.5 : 0.5;
    pts.push_back(p.cwiseProduct(size));
  }
  return ObjectModel(std::move(name), detail::recentre(std::move(pts)), symmetric);
}

/// Points on the side wall of a z-aligned cylinder.
inline ObjectModel make_cylinder_shell(std::string name, double radius, double height, std::size_t n,
                                       bool symmetric = true) {
  auto rng = detail::model_rng();
  std::uniform_real_distribution<double> ang(0.0, kTwoPi), h(-0.5 * height, 0.5 * height);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = ang(rng);
    pts.emplace_back(radius * std::cos(a), radius * std::sin(a), h(rng));
  }
  return ObjectModel(std::move(name), detail::recentre(std::move(pts)), symmetric);
}

/// Points on the faces of an irregular tetrahedron scaled per axis.
inline ObjectModel make_tetrahedron(std::string name, const Vec3& scale, std::size_t n) {
  const std::array<Vec3, 4> v = {Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.1, 0.0), Vec3(0.25, 0.8, 0.1),
                                 Vec3(0.3, 0.35, 0.9)};
  const std::array<std::array<int, 3>, 4> faces = {{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  auto rng = detail::model_rng();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = faces[pick(rng)];
    double a = uni(rng), b = uni(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const Vec3 p = v[f[0]] + a * (v[f[1]] - v[f[0]]) + b * (v[f[2]] - v[f[0]]);
    pts.push_back(p.cwiseProduct(scale));
  }
  return ObjectModel(std::move(name), detail::recentre(std::move(pts)), false);
}

/// Object names in the row order of the simulated YCB-Video benchmark table.
inline const std::vector<std::string>& ycb_table_objects() {
  static const std::vector<std::string> names = {
      "002_master_chef_can", "003_cracker_box",      "005_tomato_soup_can", "006_mustard_bottle",
      "009_gelatin_box",     "010_potted_meat_can",  "011_banana",          "019_pitcher_base",
      "025_mug",             "035_power_drill",      "036_wood_block",      "052_extra_large_clamp",
      "061_foam_brick"};
  return names;
}

/// Built-in synthetic models. YCB names map to primitives of roughly the
/// right size; they are stand-ins, not the real meshes.
inline ObjectModel builtin_model(std::string_view name, std::size_t n = 1000) {
  const std::string id(name);
  if (id == "box") return make_box(id, {0.10, 0.06, 0.16}, n);
  if (id == "cylinder") return make_cylinder_shell(id, 0.04, 0.12, n);
  if (id == "tetrahedron") return make_tetrahedron(id, {0.12, 0.10, 0.08}, n);
  if (id == "002_master_chef_can") return make_cylinder_shell(id, 0.051, 0.140, n);
  if (id == "003_cracker_box") return make_box(id, {0.060, 0.158, 0.210}, n);
  if (id == "005_tomato_soup_can") return make_cylinder_shell(id, 0.033, 0.101, n);
  if (id == "006_mustard_bottle") return make_box(id, {0.058, 0.095, 0.190}, n);
  if (id == "009_gelatin_box") return make_box(id, {0.089, 0.073, 0.028}, n);
  if (id == "010_potted_meat_can") return make_box(id, {0.101, 0.051, 0.083}, n);
  if (id == "011_banana") return make_tetrahedron(id, {0.19, 0.04, 0.03}, n);
  if (id == "019_pitcher_base") return make_cylinder_shell(id, 0.06, 0.24, n, false);
  if (id == "025_mug") return make_cylinder_shell(id, 0.04, 0.08, n, false);
  if (id == "035_power_drill") return make_tetrahedron(id, {0.18, 0.19, 0.05}, n);
  if (id == "036_wood_block") return make_box(id, {0.085, 0.085, 0.200}, n);
  if (id == "052_extra_large_clamp") return make_tetrahedron(id, {0.20, 0.16, 0.035}, n);
  if (id == "061_foam_brick") return make_box(id, {0.050, 0.075, 0.050}, n, true);
  throw InvalidConfig("unknown object model '" + id + "'");
}

/// Reads whitespace-separated "x y z" vertex lines; '#' starts a comment.
inline ObjectModel load_vertex_file(const std::string& path, std::string name, bool symmetric = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh vertex file '" + path + "'");
  std::vector<Vec3> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    if (!(ls >> y >> z)) throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'x y z'");
    pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw EmptyModel("mesh vertex file '" + path + "' has no vertices");
  return ObjectModel(std::move(name), detail::recentre(std::move(pts)), symmetric);
}

/// Axis-aligned image box: centre (u, v) and size (w, h), pixels.
struct BoundingBox {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Image footprint of a model at a camera-frame pose: the centre is the
/// projected model origin, the size is the extent of the projected points.
inline BoundingBox project_region(const Pose& obj_in_cam, const ObjectModel& model, const CameraIntrinsics& k) {
  const Pixel c = project(k, obj_in_cam.translation);
  double umin = c.u, umax = c.u, vmin = c.v, vmax = c.v;
  const Mat3 r = obj_in_cam.rotation.matrix();
  for (const auto& p : model.points()) {
    const Vec3 q = r * p + obj_in_cam.translation;
    if (!(q.z() > 0.0)) continue;
    const double u = k.fx * q.x() / q.z() + k.cx;
    const double v = k.fy * q.y() / q.z() + k.cy;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  return {c.u, c.v, umax - umin, vmax - vmin};
}

}  // namespace dyntrack
