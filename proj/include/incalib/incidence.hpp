#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/errors.hpp"
#include "incalib/raster.hpp"

namespace incalib {

enum class RayNormalization { z_one, unit };

// Per-pixel incidence rays: the direction from the camera origin to each
// pixel's 3D preimage. In z_one state the third component is exactly 1 and
// ray(x, y) == K^-1 * (x, y, 1); in unit state rays have Euclidean norm 1 and
// positive third component. The field depends only on the intrinsics, never
// on scene content, which is what makes it invariant under crop/resize.
struct IncidenceField {
  int width = 0;
  int height = 0;
  RayNormalization state = RayNormalization::z_one;
  std::vector<Eigen::Vector3d> rays;  // row-major

  IncidenceField() = default;
  IncidenceField(int w, int h, RayNormalization s)
      : width(w), height(h), state(s),
        rays(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), Eigen::Vector3d::Zero()) {}

  Eigen::Vector3d& ray(int x, int y) { return rays[static_cast<std::size_t>(y) * width + x]; }
  const Eigen::Vector3d& ray(int x, int y) const {
    return rays[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return rays.size(); }
};

inline IncidenceField incidence_from_intrinsics(const Intrinsics& K, int width, int height) {
  if (width < 2 || height < 2)
    throw DimensionError("incidence_from_intrinsics: field must be at least 2x2, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  IncidenceField V(width, height, RayNormalization::z_one);
  for (int y = 0; y < height; ++y) {
    const double vy = (y - K.by) / K.fy;
    for (int x = 0; x < width; ++x)
      V.ray(x, y) = {(x - K.bx) / K.fx, vy, 1.0};
  }
  return V;
}

// Rescales every ray into the target state. Idempotent; preserves direction.
// Converting to z_one requires a positive third component everywhere.
inline IncidenceField normalize_field(const IncidenceField& V, RayNormalization target) {
  IncidenceField out(V.width, V.height, target);
  for (int y = 0; y < V.height; ++y) {
    for (int x = 0; x < V.width; ++x) {
      const Eigen::Vector3d& v = V.ray(x, y);
      if (target == RayNormalization::z_one) {
        if (!(v.z() > 0.0))
          throw DegenerateRayError("normalize_field: ray at pixel (" + std::to_string(x) + ", " +
                                   std::to_string(y) + ") has non-positive third component " +
                                   std::to_string(v.z()));
        out.ray(x, y) = v / v.z();
      } else {
        const double n = v.norm();
        if (!(n > 0.0) || !(v.z() > 0.0))
          throw DegenerateRayError("normalize_field: ray at pixel (" + std::to_string(x) + ", " +
                                   std::to_string(y) + ") cannot be unit-normalized");
        out.ray(x, y) = v / n;
      }
    }
  }
  return out;
}

// Resamples a field under a crop/resize transform: the output ray at x' is the
// input ray at the preimage T^-1 x', looked up nearest-neighbor. Each input
// pixel covers the half-open unit cell around its center, so preimages within
// half a pixel of the raster edge still resolve to the border pixel.
inline IncidenceField transform_field(const CropResizeTransform& T, const IncidenceField& V,
                                      int out_width, int out_height) {
  if (out_width < 2 || out_height < 2)
    throw DimensionError("transform_field: output must be at least 2x2");
  IncidenceField out(out_width, out_height, V.state);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector2d p = T.apply_inverse(x, y);
      if (p.x() < -0.5 || p.x() > V.width - 0.5 || p.y() < -0.5 || p.y() > V.height - 0.5)
        throw CoverageError("transform_field: preimage of output pixel (" + std::to_string(x) +
                            ", " + std::to_string(y) + ") = (" + std::to_string(p.x()) + ", " +
                            std::to_string(p.y()) + ") lies outside the input raster");
      const int ix = std::min(V.width - 1, std::max(0, static_cast<int>(std::llround(p.x()))));
      const int iy = std::min(V.height - 1, std::max(0, static_cast<int>(std::llround(p.y()))));
      out.ray(x, y) = V.ray(ix, iy);
    }
  }
  return out;
}

// Lifts valid depth samples to 3D points P = d * v. Requires a z_one field so
// that depth values measure distance along the optical axis.
inline PointCloud backproject(const DepthMap& D, const IncidenceField& V) {
  if (D.width != V.width || D.height != V.height)
    throw DimensionError("backproject: depth " + std::to_string(D.width) + "x" +
                         std::to_string(D.height) + " vs field " + std::to_string(V.width) + "x" +
                         std::to_string(V.height));
  if (V.state != RayNormalization::z_one)
    throw std::invalid_argument("backproject: field must be z_one normalized");
  PointCloud cloud;
  cloud.reserve(D.size());
  for (int y = 0; y < D.height; ++y)
    for (int x = 0; x < D.width; ++x) {
      const double d = D.at(x, y);
      if (depth_valid(d)) cloud.push_back(d * V.ray(x, y));
    }
  return cloud;
}

}  // namespace incalib
