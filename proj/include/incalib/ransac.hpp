#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/depth_normal.hpp"  // Axis
#include "incalib/errors.hpp"
#include "incalib/incidence.hpp"
#include "incalib/rng.hpp"

namespace incalib {

// ============================================================================
// Fixed-iteration RANSAC over two-point minimal samples.
//
// Each candidate is built from two field pixels: per axis, the two rays pin
// down (f, b) exactly, and candidates are ranked by how many of a fixed
// scoring sample they explain within a normalized-ray residual threshold.
// The x and y parameters decouple and are selected independently.
// ============================================================================

struct RansacConfig {
  int iterations = 256;               // candidate batches
  int candidates_per_iteration = 64;  // two-point draws per batch
  int scoring_samples = 4096;         // pixels scored per candidate (all pixels if fewer)
  double threshold_x = 0.02;          // inlier bound on |predicted - observed| ray component
  double threshold_y = 0.02;
  double f_min = 0.0;                 // <= 0 resolves to 0.3 * max(w, h)
  double f_max = 0.0;                 // <= 0 resolves to 3.0 * max(w, h)
  int focal_steps = 2048;             // enumeration steps (simple mode); 0 -> {f_min} only
  std::uint64_t seed = 0;

  static RansacConfig defaults(int width, int height) {
    RansacConfig cfg;
    const double m = std::max(width, height);
    cfg.f_min = 0.3 * m;
    cfg.f_max = 3.0 * m;
    return cfg;
  }

  // Returns a copy with the focal bounds resolved against the field size.
  RansacConfig resolved(int width, int height) const {
    RansacConfig cfg = *this;
    const double m = std::max(width, height);
    if (cfg.f_min <= 0.0) cfg.f_min = 0.3 * m;
    if (cfg.f_max <= 0.0) cfg.f_max = 3.0 * m;
    return cfg;
  }

  void validate() const {
    if (iterations < 1 || candidates_per_iteration < 1 || scoring_samples < 1)
      throw std::invalid_argument("RansacConfig: iteration/candidate/sample counts must be >= 1");
    if (!(threshold_x > 0.0) || !(threshold_y > 0.0))
      throw std::invalid_argument("RansacConfig: thresholds must be positive");
    if (!(f_min > 0.0) || !(f_min < f_max))
      throw std::invalid_argument("RansacConfig: need 0 < f_min < f_max");
    if (focal_steps < 0) throw std::invalid_argument("RansacConfig: focal_steps must be >= 0");
  }

  bool operator==(const RansacConfig&) const = default;
};

enum class CalibrationMode { four_dof, simple };

struct CalibrationResult {
  Intrinsics K;
  int score_x = 0;
  int score_y = 0;
  int total_scored = 0;
  CalibrationMode mode = CalibrationMode::four_dof;
  RansacConfig config;
};

namespace detail {

// Per-axis two-point parameters. Shared by the standalone solver and the
// RANSAC loop so the two agree to the bit.
inline bool axis_params(double p1, double p2, double v1, double v2, double& f, double& b) {
  const double dv = v1 - v2;
  if (std::abs(dv) <= 1e-12) return false;
  f = (p1 - p2) / dv;
  if (!(f > 0.0)) return false;  // nonpositive focal: invalid candidate
  b = 0.5 * (p1 - v1 * f + p2 - v2 * f);
  return true;
}

// Residual kernel shared by score_axis and the calibrate loops.
inline int score_kernel(double f, double b, std::span<const double> coords,
                        std::span<const double> rays, double threshold) {
  const double inv_f = 1.0 / f;
  int count = 0;
  const std::size_t n = coords.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (coords[i] - b) * inv_f - rays[i];
    count += (r < threshold && r > -threshold) ? 1 : 0;
  }
  return count;
}

struct AxisSamples {
  std::vector<double> coord_x, ray_x;  // pixel x and v_x of the scoring sample
  std::vector<double> coord_y, ray_y;
};

// The scoring sample is drawn once per calibration from its own stream, so
// 4-DoF and simple mode score against the same pixels for a given seed.
inline AxisSamples draw_scoring_samples(const IncidenceField& V, const RansacConfig& cfg) {
  const int n = static_cast<int>(V.size());
  const int k = std::min(cfg.scoring_samples, n);
  Rng rng(Rng::derive(cfg.seed, 0));
  AxisSamples s;
  s.coord_x.reserve(k);
  s.ray_x.reserve(k);
  s.coord_y.reserve(k);
  s.ray_y.reserve(k);
  for (int idx : rng.sample_without_replacement(n, k)) {
    s.coord_x.push_back(static_cast<double>(idx % V.width));
    s.coord_y.push_back(static_cast<double>(idx / V.width));
    s.ray_x.push_back(V.rays[idx].x());
    s.ray_y.push_back(V.rays[idx].y());
  }
  return s;
}

inline void require_calibration_input(const IncidenceField& V) {
  if (V.state != RayNormalization::z_one)
    throw std::invalid_argument("calibrate: field must be z_one normalized");
  if (V.size() < 2) throw DimensionError("calibrate: field needs at least 2 pixels");
}

}  // namespace detail

// Exact per-axis intrinsics from two pixel/ray pairs. Throws on samples whose
// ray components coincide on either axis or that imply a nonpositive focal.
inline Intrinsics two_point_solver(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                                   const Eigen::Vector3d& v1, const Eigen::Vector3d& v2) {
  double fx, bx, fy, by;
  if (!detail::axis_params(p1.x(), p2.x(), v1.x(), v2.x(), fx, bx))
    throw SolverDegenerateError("two_point_solver: x-axis sample degenerate (v_x collision or "
                                "nonpositive focal)");
  if (!detail::axis_params(p1.y(), p2.y(), v1.y(), v2.y(), fy, by))
    throw SolverDegenerateError("two_point_solver: y-axis sample degenerate (v_y collision or "
                                "nonpositive focal)");
  return {fx, fy, bx, by};
}

// Count of samples whose residual |(coord - b)/f - v| is strictly below the
// threshold on the chosen axis.
inline int score_axis(const Intrinsics& K, std::span<const Eigen::Vector2d> pixels,
                      std::span<const Eigen::Vector3d> rays, Axis axis, double threshold) {
  if (pixels.size() != rays.size())
    throw DimensionError("score_axis: pixel/ray count mismatch");
  if (pixels.empty()) throw std::invalid_argument("score_axis: no samples");
  std::vector<double> coords(pixels.size()), comps(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    coords[i] = (axis == Axis::x) ? pixels[i].x() : pixels[i].y();
    comps[i] = (axis == Axis::x) ? rays[i].x() : rays[i].y();
  }
  const double f = (axis == Axis::x) ? K.fx : K.fy;
  const double b = (axis == Axis::x) ? K.bx : K.by;
  return detail::score_kernel(f, b, coords, comps, threshold);
}

// 4-DoF calibration: K_r iterations of K_c two-point candidates; the x and y
// parameters are selected independently by their axis scores. Deterministic
// for a given seed; candidate draws come from per-iteration streams so any
// parallel schedule must reproduce the sequential result. Ties keep the
// first-found candidate.
inline CalibrationResult calibrate_4dof(const IncidenceField& V, const RansacConfig& config) {
  detail::require_calibration_input(V);
  const RansacConfig cfg = config.resolved(V.width, V.height);
  cfg.validate();
  const int n = static_cast<int>(V.size());
  const detail::AxisSamples s = detail::draw_scoring_samples(V, cfg);

  struct Best {
    int score = -1;
    double f = 0.0, b = 0.0;
  } best_x, best_y;

  for (int it = 0; it < cfg.iterations; ++it) {
    Rng rng(Rng::derive(cfg.seed, 1 + static_cast<std::uint64_t>(it)));
    for (int c = 0; c < cfg.candidates_per_iteration; ++c) {
      const int i = static_cast<int>(rng.uniform_index(n));
      int j = static_cast<int>(rng.uniform_index(n));
      while (j == i) j = static_cast<int>(rng.uniform_index(n));
      const double xi = i % V.width, yi = i / V.width;
      const double xj = j % V.width, yj = j / V.width;
      const Eigen::Vector3d& vi = V.rays[i];
      const Eigen::Vector3d& vj = V.rays[j];
      double f, b;
      if (detail::axis_params(xi, xj, vi.x(), vj.x(), f, b)) {
        const int sc = detail::score_kernel(f, b, s.coord_x, s.ray_x, cfg.threshold_x);
        if (sc > best_x.score) best_x = {sc, f, b};
      }
      if (detail::axis_params(yi, yj, vi.y(), vj.y(), f, b)) {
        const int sc = detail::score_kernel(f, b, s.coord_y, s.ray_y, cfg.threshold_y);
        if (sc > best_y.score) best_y = {sc, f, b};
      }
    }
  }
  if (best_x.score < 0 || best_y.score < 0)
    throw CalibrationFailedError(std::string("calibrate_4dof: every candidate was degenerate on "
                                             "the ") +
                                 (best_x.score < 0 ? "x" : "y") + "-axis");
  CalibrationResult result{Intrinsics(best_x.f, best_y.f, best_x.b, best_y.b),
                           best_x.score,
                           best_y.score,
                           static_cast<int>(s.coord_x.size()),
                           CalibrationMode::four_dof,
                           cfg};
  return result;
}

// Simple-camera calibration: shared focal enumerated on a uniform grid,
// principal point pinned at the image center, candidates ranked by the summed
// x+y score. Ties resolve to the smaller focal (the grid is scanned in
// ascending order and only a strictly better score replaces the incumbent).
inline CalibrationResult calibrate_simple(const IncidenceField& V, int width, int height,
                                          const RansacConfig& config) {
  detail::require_calibration_input(V);
  const RansacConfig cfg = config.resolved(width, height);
  cfg.validate();
  const detail::AxisSamples s = detail::draw_scoring_samples(V, cfg);
  const double bx = width / 2.0;
  const double by = height / 2.0;

  int best_score_x = -1, best_score_y = -1, best_sum = -1;
  double best_f = cfg.f_min;
  const int steps = cfg.focal_steps;
  for (int i = 0; i <= steps; ++i) {
    const double f =
        (steps == 0) ? cfg.f_min
                     : cfg.f_min + (static_cast<double>(i) / steps) * (cfg.f_max - cfg.f_min);
    const int sx = detail::score_kernel(f, bx, s.coord_x, s.ray_x, cfg.threshold_x);
    const int sy = detail::score_kernel(f, by, s.coord_y, s.ray_y, cfg.threshold_y);
    if (sx + sy > best_sum) {
      best_sum = sx + sy;
      best_score_x = sx;
      best_score_y = sy;
      best_f = f;
    }
  }
  CalibrationResult result{Intrinsics(best_f, best_f, bx, by),
                           best_score_x,
                           best_score_y,
                           static_cast<int>(s.coord_x.size()),
                           CalibrationMode::simple,
                           cfg};
  return result;
}

}  // namespace incalib
