#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "incalib/camera.hpp"

namespace incalib {

// Relative focal error per axis; principal-point error normalized by the
// image dimensions so errors are comparable across image sizes.
struct IntrinsicError {
  double e_fx, e_fy, e_bx, e_by;
  double e_f;  // max(e_fx, e_fy)
  double e_b;  // max(e_bx, e_by)
};

inline IntrinsicError intrinsic_error(const Intrinsics& est, const Intrinsics& gt, int width,
                                      int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("intrinsic_error: empty image");
  IntrinsicError e{};
  e.e_fx = std::abs(est.fx - gt.fx) / gt.fx;
  e.e_fy = std::abs(est.fy - gt.fy) / gt.fy;
  e.e_bx = std::abs(est.bx - gt.bx) / width;
  e.e_by = std::abs(est.by - gt.by) / height;
  e.e_f = std::max(e.e_fx, e.e_fy);
  e.e_b = std::max(e.e_bx, e.e_by);
  return e;
}

// Vertical field of view in degrees.
inline double fov_y(const Intrinsics& K, int height) {
  if (height < 1) throw std::invalid_argument("fov_y: empty image");
  return 2.0 * std::atan(height / (2.0 * K.fy)) * 180.0 / std::numbers::pi;
}

struct PoseError {
  double rotation_deg;     // geodesic angle between rotations
  double translation_deg;  // angle between translation directions
};

inline PoseError pose_error(const Eigen::Matrix3d& R_est, const Eigen::Vector3d& t_est,
                            const Eigen::Matrix3d& R_gt, const Eigen::Vector3d& t_gt) {
  const double tn_est = t_est.norm(), tn_gt = t_gt.norm();
  if (!(tn_est > 0.0) || !(tn_gt > 0.0))
    throw std::invalid_argument("pose_error: zero-length translation has no direction");
  const double cr = std::clamp(((R_est.transpose() * R_gt).trace() - 1.0) / 2.0, -1.0, 1.0);
  const double ct = std::clamp(t_est.dot(t_gt) / (tn_est * tn_gt), -1.0, 1.0);
  constexpr double deg = 180.0 / std::numbers::pi;
  return {std::acos(cr) * deg, std::acos(ct) * deg};
}

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
  int count = 0;
  // threshold -> fraction of values <= threshold
  std::vector<std::pair<double, double>> accuracy;
};

inline Aggregate aggregate(std::span<const double> values, std::span<const double> thresholds = {}) {
  if (values.empty()) throw std::invalid_argument("aggregate: no values");
  Aggregate a;
  a.count = static_cast<int>(values.size());
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  a.mean = sum / a.count;
  const std::size_t mid = sorted.size() / 2;
  a.median = (sorted.size() % 2 == 1) ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  for (double t : thresholds) {
    int hits = 0;
    for (double v : sorted)
      if (v <= t) ++hits;
    a.accuracy.emplace_back(t, static_cast<double>(hits) / a.count);
  }
  return a;
}

}  // namespace incalib
