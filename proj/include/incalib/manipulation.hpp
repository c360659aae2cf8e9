#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "incalib/camera.hpp"

namespace incalib {

// ============================================================================
// Crop/resize forensics from calibrated intrinsics.
//
// Case "known original": the original intrinsics are available (e.g. from
// metadata), so the edit is the transform taking them to the estimated ones.
// Case "simple assumption": no original available; any departure from a
// shared-focal, centered principal point is flagged. That case is blind to
// aspect-preserving centered edits, which preserve the assumption.
// ============================================================================

enum class DetectionCase { known_original, simple_assumption };

struct ManipulationVerdict {
  bool edited = false;
  CropResizeTransform delta = CropResizeTransform::identity();  // identity when not edited
  double deviation = 0.0;
  DetectionCase kind = DetectionCase::known_original;
};

struct RestorationBox {
  std::array<Eigen::Vector2d, 4> corners{};  // axis-aligned rectangle
  std::optional<double> iou_vs_ground_truth;

  double x_min() const { return std::min({corners[0].x(), corners[1].x(), corners[2].x(), corners[3].x()}); }
  double x_max() const { return std::max({corners[0].x(), corners[1].x(), corners[2].x(), corners[3].x()}); }
  double y_min() const { return std::min({corners[0].y(), corners[1].y(), corners[2].y(), corners[3].y()}); }
  double y_max() const { return std::max({corners[0].y(), corners[1].y(), corners[2].y(), corners[3].y()}); }

  static RestorationBox from_extent(double x0, double y0, double x1, double y1) {
    RestorationBox box;
    box.corners = {Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y0), Eigen::Vector2d(x0, y1),
                   Eigen::Vector2d(x1, y1)};
    return box;
  }
};

// The axis-aligned transform taking K_from to K_to (so apply_transform of the
// result on K_from reproduces K_to).
inline CropResizeTransform delta_between(const Intrinsics& K_to, const Intrinsics& K_from) {
  const double dfx = K_to.fx / K_from.fx;
  const double dfy = K_to.fy / K_from.fy;
  return {dfx, dfy, K_to.bx - dfx * K_from.bx, K_to.by - dfy * K_from.by};
}

inline ManipulationVerdict detect_known_original(const Intrinsics& K_est,
                                                 const Intrinsics& K_orig, int width, int height,
                                                 double threshold = 0.02) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("detect_known_original: image dims must be positive");
  ManipulationVerdict verdict;
  verdict.kind = DetectionCase::known_original;
  verdict.delta = delta_between(K_est, K_orig);
  verdict.deviation =
      std::max({std::abs(verdict.delta.dfx - 1.0), std::abs(verdict.delta.dfy - 1.0),
                std::abs(verdict.delta.dcx) / width, std::abs(verdict.delta.dcy) / height});
  verdict.edited = verdict.deviation > threshold;
  return verdict;
}

inline ManipulationVerdict detect_simple_assumption(const Intrinsics& K_est, int width, int height,
                                                    double threshold = 0.02) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("detect_simple_assumption: image dims must be positive");
  ManipulationVerdict verdict;
  verdict.kind = DetectionCase::simple_assumption;
  verdict.deviation = std::max({std::abs(K_est.fx / K_est.fy - 1.0),
                                std::abs(K_est.bx - width / 2.0) / width,
                                std::abs(K_est.by - height / 2.0) / height});
  verdict.edited = verdict.deviation > threshold;
  return verdict;
}

// Maps the edited image's corner frame (0,0)-(w',h') back through the inverse
// edit into original-image coordinates.
inline RestorationBox restore_known_original(int edited_width, int edited_height,
                                             const CropResizeTransform& delta) {
  if (edited_width < 1 || edited_height < 1)
    throw std::invalid_argument("restore_known_original: image dims must be positive");
  const double w = edited_width;
  const double h = edited_height;
  const std::array<Eigen::Vector2d, 4> src = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(w, 0.0),
                                              Eigen::Vector2d(0.0, h), Eigen::Vector2d(w, h)};
  RestorationBox box;
  for (std::size_t i = 0; i < src.size(); ++i)
    box.corners[i] = delta.apply_inverse(src[i].x(), src[i].y());
  return box;
}

struct RestorationPlan {
  CropResizeTransform delta;  // takes the assumed original to the estimate
  int restored_width = 0;
  int restored_height = 0;
  Intrinsics restored_K;
};

// Without the original intrinsics, restore to the nearest simple camera: a
// shared focal at the geometric mean of the axis focals, with the canvas
// rescaled per axis so the principal point lands at its center.
inline RestorationPlan restore_without_original(const Intrinsics& K_est, int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("restore_without_original: image dims must be positive");
  const double f = std::sqrt(K_est.fx * K_est.fy);
  const int rw = static_cast<int>(std::llround(width * f / K_est.fx));
  const int rh = static_cast<int>(std::llround(height * f / K_est.fy));
  if (rw < 1 || rh < 1)
    throw std::invalid_argument("restore_without_original: restored canvas collapsed");
  const SimpleCamera restored(f, rw, rh);
  const Intrinsics restored_K = restored.intrinsics();
  const CropResizeTransform delta = delta_between(K_est, restored_K);
  return {delta, rw, rh, restored_K};
}

inline double box_iou(const RestorationBox& a, const RestorationBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min()));
  const double iy = std::max(0.0, std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min()));
  const double inter = ix * iy;
  const double area_a = (a.x_max() - a.x_min()) * (a.y_max() - a.y_min());
  const double area_b = (b.x_max() - b.x_min()) * (b.y_max() - b.y_min());
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return inter > 0.0 ? 1.0 : 0.0;
  return inter / uni;
}

}  // namespace incalib
