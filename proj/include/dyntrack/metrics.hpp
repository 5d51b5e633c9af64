#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"
#include "dyntrack/model.hpp"

namespace dyntrack {

inline constexpr double kAucMaxThreshold = 0.1;  // m

/// Mean distance between model points under the two poses.
inline double add_distance(const Pose& gt, const Pose& est, const ObjectModel& model) {
  if (model.size() == 0) throw EmptyModel("add_distance: empty model");
  const Mat3 rg = gt.rotation.matrix(), re = est.rotation.matrix();
  double sum = 0.0;
  for (const auto& x : model.points()) {
    sum += ((rg * x + gt.translation) - (re * x + est.translation)).norm();
  }
  return sum / static_cast<double>(model.size());
}

namespace detail {

/// Exact nearest-neighbour search over a fixed point set.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> pts) : pts_(std::move(pts)), idx_(pts_.size()) {
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    build(0, idx_.size(), 0);
  }

  double nearest_distance(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, idx_.size(), 0, q, best);
    return std::sqrt(best);
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(lo), idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(std::size_t lo, std::size_t hi, int axis, const Vec3& q, double& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const Vec3& p = pts_[idx_[mid]];
    best = std::min(best, (p - q).squaredNorm());
    const double diff = q[axis] - p[axis];
    const int next = (axis + 1) % 3;
    if (diff < 0) {
      search(lo, mid, next, q, best);
      if (diff * diff < best) search(mid + 1, hi, next, q, best);
    } else {
      search(mid + 1, hi, next, q, best);
      if (diff * diff < best) search(lo, mid, next, q, best);
    }
  }

  std::vector<Vec3> pts_;
  std::vector<std::size_t> idx_;
};

inline std::vector<Vec3> transformed(const Pose& p, const ObjectModel& model) {
  const Mat3 r = p.rotation.matrix();
  std::vector<Vec3> out;
  out.reserve(model.size());
  for (const auto& x : model.points()) out.push_back(r * x + p.translation);
  return out;
}

}  // namespace detail

enum class AddsMethod { kBruteForce, kKdTree };

/// Mean closest-point distance from the ground-truth placement to the
/// estimated placement of the model.
inline double adds_distance(const Pose& gt, const Pose& est, const ObjectModel& model,
                            AddsMethod method = AddsMethod::kKdTree) {
  if (model.size() == 0) throw EmptyModel("adds_distance: empty model");
  const auto a = detail::transformed(gt, model);
  auto b = detail::transformed(est, model);
  double sum = 0.0;
  if (method == AddsMethod::kBruteForce) {
    for (const auto& x1 : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& x2 : b) best = std::min(best, (x1 - x2).squaredNorm());
      sum += std::sqrt(best);
    }
  } else {
    const detail::KdTree tree(std::move(b));
    for (const auto& x1 : a) sum += tree.nearest_distance(x1);
  }
  return sum / static_cast<double>(model.size());
}

/// Area under the accuracy-threshold curve on [0, max_threshold], normalised.
/// Accuracy(tau) is the fraction of distances below tau; the curve is a step
/// function, integrated exactly between consecutive sorted distances.
inline double auc(std::vector<double> distances, double max_threshold = kAucMaxThreshold) {
  if (distances.empty()) throw EmptyInput("auc: no distances");
  if (!(max_threshold > 0.0)) throw InvalidConfig("auc: max_threshold must be > 0");
  std::sort(distances.begin(), distances.end());
  const double n = static_cast<double>(distances.size());
  double area = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double lo = std::max(distances[i], 0.0);
    if (lo >= max_threshold) break;
    const double hi = i + 1 < distances.size() ? std::min(distances[i + 1], max_threshold) : max_threshold;
    area += (static_cast<double>(i + 1) / n) * (std::max(hi, lo) - lo);
  }
  return area / max_threshold;
}

struct MetricsReport {
  std::string object;
  double diameter = 0.0;
  bool symmetric = false;
  std::vector<double> per_frame_add;
  std::vector<double> per_frame_adds;
  double auc_add = 0.0;
  double auc_adds = 0.0;
  double success_rate = 0.0;  // fraction of frames with ADD < 0.1 * diameter

  /// Symmetric objects headline ADD-S, others ADD.
  std::string headline_metric() const { return symmetric ? "adds" : "add"; }
};

inline MetricsReport build_report(const std::vector<Pose>& gt, const std::vector<Pose>& est,
                                  const ObjectModel& model) {
  if (gt.size() != est.size()) {
    throw LengthMismatch("build_report: " + std::to_string(gt.size()) + " ground-truth poses vs " +
                         std::to_string(est.size()) + " estimates");
  }
  if (gt.empty()) throw EmptyInput("build_report: no poses");
  MetricsReport r;
  r.object = model.name();
  r.diameter = model.diameter();
  r.symmetric = model.symmetric();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    r.per_frame_add.push_back(add_distance(gt[i], est[i], model));
    r.per_frame_adds.push_back(adds_distance(gt[i], est[i], model));
    if (r.per_frame_add.back() < 0.1 * model.diameter()) ++ok;
  }
  r.auc_add = auc(r.per_frame_add);
  r.auc_adds = auc(r.per_frame_adds);
  r.success_rate = static_cast<double>(ok) / static_cast<double>(gt.size());
  return r;
}

/// Reorders reports to follow `order`; objects not listed keep their
/// relative order after the listed ones.
inline std::vector<MetricsReport> order_reports(std::vector<MetricsReport> reports,
                                                const std::vector<std::string>& order) {
  auto rank = [&](const MetricsReport& r) {
    const auto it = std::find(order.begin(), order.end(), r.object);
    return static_cast<std::size_t>(it - order.begin());
  };
  std::stable_sort(reports.begin(), reports.end(),
                   [&](const MetricsReport& a, const MetricsReport& b) { return rank(a) < rank(b); });
  return reports;
}

}  // namespace dyntrack
