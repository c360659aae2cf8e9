#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/errors.hpp"
#include "incalib/incidence.hpp"
#include "incalib/raster.hpp"
#include "incalib/rng.hpp"

namespace incalib {

// ============================================================================
// Synthetic ground-truth factory. Everything in here is derived in closed
// form so downstream solvers can be tested against exact oracles.
// ============================================================================

// f uniform in [0.3, 3] * max-dim; principal point uniform in the central 80%
// of the image (exactly centered in simple mode).
inline Intrinsics random_intrinsics(Rng& rng, int width, int height, bool simple = false) {
  const double m = std::max(width, height);
  if (simple) {
    const double f = rng.uniform(0.3 * m, 3.0 * m);
    return SimpleCamera(f, width, height).intrinsics();
  }
  return {rng.uniform(0.3 * m, 3.0 * m), rng.uniform(0.3 * m, 3.0 * m),
          rng.uniform(0.1 * width, 0.9 * width), rng.uniform(0.1 * height, 0.9 * height)};
}

// Plane n . P + c = 0 with unit normal facing the camera (n . v < 0 on every
// in-view ray) and c > 0, so depth d = -c / (n . v) is positive.
struct ScenePlane {
  Eigen::Vector3d n;
  double c;
};

// Piecewise-planar scene: the image is tiled into vertical strips, one plane
// per strip. Depth, its pixel-space gradient, and the normal map are all
// analytic. region(x, y) identifies the strip so tests can avoid sampling
// finite-difference stencils across seams.
struct PlanarScene {
  Intrinsics K;
  int width = 0, height = 0;
  IncidenceField field;  // z_one
  DepthMap depth;
  Raster<double> grad_x, grad_y;  // analytic d(depth)/d(pixel)
  NormalMap normals;
  Raster<int> region;
  std::vector<ScenePlane> planes;

  PlanarScene() : K(1, 1, 0, 0) {}
};

inline PlanarScene make_planar_scene(const Intrinsics& K, int width, int height,
                                     std::span<const ScenePlane> planes) {
  if (planes.empty()) throw std::invalid_argument("make_planar_scene: no planes");
  PlanarScene S;
  S.K = K;
  S.width = width;
  S.height = height;
  S.field = incidence_from_intrinsics(K, width, height);
  S.depth = DepthMap(width, height);
  S.grad_x = Raster<double>(width, height);
  S.grad_y = Raster<double>(width, height);
  S.normals = NormalMap(width, height);
  S.region = Raster<int>(width, height);
  S.planes.assign(planes.begin(), planes.end());

  const int n_strips = static_cast<int>(planes.size());
  const double strip_w = static_cast<double>(width) / n_strips;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int s = std::min(n_strips - 1, static_cast<int>(x / strip_w));
      const ScenePlane& pl = planes[s];
      const Eigen::Vector3d& v = S.field.ray(x, y);
      const double ndotv = pl.n.dot(v);
      if (!(ndotv < 0.0) || !(pl.c > 0.0))
        throw std::invalid_argument("make_planar_scene: plane " + std::to_string(s) +
                                    " is not camera-facing at pixel (" + std::to_string(x) + ", " +
                                    std::to_string(y) + ")");
      const double d = -pl.c / ndotv;
      S.depth.at(x, y) = d;
      // From d = -c/(n.v): dd/dx = n1 d^2 / (fx c), dd/dy = n2 d^2 / (fy c).
      S.grad_x.at(x, y) = pl.n.x() * d * d / (K.fx * pl.c);
      S.grad_y.at(x, y) = pl.n.y() * d * d / (K.fy * pl.c);
      S.normals.at(x, y) = pl.n;
      S.region.at(x, y) = s;
    }
  }
  return S;
}

// Draws `count` camera-facing planes valid across the whole view. Because any
// single plane yields constraint rows spanning only two dimensions of the
// four-parameter system (and two planes only three), solver tests need three
// or more planes; this helper is how scenes get that row diversity.
inline std::vector<ScenePlane> random_planes(Rng& rng, const Intrinsics& K, int width, int height,
                                             int count) {
  // n . v is affine in the pixel, so checking the four corner rays suffices.
  const Eigen::Vector3d corners[4] = {K.ray(0, 0), K.ray(width - 1, 0), K.ray(0, height - 1),
                                      K.ray(width - 1, height - 1)};
  std::vector<ScenePlane> planes;
  while (static_cast<int>(planes.size()) < count) {
    Eigen::Vector3d n(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), 0.0);
    n.z() = -std::abs(rng.normal(0.0, 1.0)) - 0.4;
    n.normalize();
    bool facing = true;
    for (const auto& v : corners)
      if (!(n.dot(v) < -5e-2)) facing = false;
    if (!facing) continue;
    planes.push_back({n, rng.uniform(1.0, 5.0)});
  }
  return planes;
}

inline PlanarScene make_random_planar_scene(Rng& rng, const Intrinsics& K, int width, int height,
                                            int n_planes) {
  const auto planes = random_planes(rng, K, width, height, n_planes);
  return make_planar_scene(K, width, height, planes);
}

// Paraboloid Z = z0 + alpha (X^2 + Y^2): a curved surface whose per-pixel
// depth is a non-polynomial function, so stencil gradients are inexact on it
// while the closed-form gradient below stays exact. Used to demonstrate the
// numerical instability of solving from sampled depth.
struct CurvedScene {
  Intrinsics K;
  int width = 0, height = 0;
  IncidenceField field;
  DepthMap depth;
  Raster<double> grad_x, grad_y;
  NormalMap normals;
  double z0 = 0.0, alpha = 0.0;

  CurvedScene() : K(1, 1, 0, 0) {}
};

inline CurvedScene make_paraboloid_scene(const Intrinsics& K, int width, int height, double z0,
                                         double alpha) {
  if (!(z0 > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("make_paraboloid_scene: z0 and alpha must be positive");
  CurvedScene S;
  S.K = K;
  S.width = width;
  S.height = height;
  S.z0 = z0;
  S.alpha = alpha;
  S.field = incidence_from_intrinsics(K, width, height);
  S.depth = DepthMap(width, height);
  S.grad_x = Raster<double>(width, height);
  S.grad_y = Raster<double>(width, height);
  S.normals = NormalMap(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d& v = S.field.ray(x, y);
      const double rho = v.x() * v.x() + v.y() * v.y();
      const double disc = 1.0 - 4.0 * alpha * rho * z0;
      if (!(disc > 0.0))
        throw std::invalid_argument("make_paraboloid_scene: surface folds inside the view; "
                                    "reduce alpha or z0");
      // Root of alpha rho d^2 - d + z0 = 0 that tends to z0 as rho -> 0.
      const double d = (rho < 1e-14) ? z0 : (1.0 - std::sqrt(disc)) / (2.0 * alpha * rho);
      S.depth.at(x, y) = d;
      // Implicit differentiation: dd/drho = alpha d^2 / (1 - 2 alpha rho d).
      const double dd_drho = alpha * d * d / (1.0 - 2.0 * alpha * rho * d);
      S.grad_x.at(x, y) = dd_drho * 2.0 * v.x() / K.fx;
      S.grad_y.at(x, y) = dd_drho * 2.0 * v.y() / K.fy;
      // Surface normal of Z - z0 - alpha(X^2+Y^2): (2aX, 2aY, -1), camera-facing
      // as written since n . v = 2 alpha rho d - 1 < 0.
      Eigen::Vector3d n(2.0 * alpha * d * v.x(), 2.0 * alpha * d * v.y(), -1.0);
      S.normals.at(x, y) = n.normalized();
    }
  }
  return S;
}

// ============================================================================
// Field corruption: exact outlier count + angular noise on inliers.
// ============================================================================
struct NoiseModel {
  double outlier_fraction = 0.0;   // floor(fraction * N) pixels replaced
  double angular_sigma_deg = 0.0;  // Gaussian rotation angle on inliers
  std::uint64_t seed = 0;

  bool operator==(const NoiseModel&) const = default;
};

struct CorruptedField {
  IncidenceField field;
  std::vector<std::uint8_t> inlier_mask;  // 1 = untouched by the outlier law
};

namespace detail {

// Rotate `u` by `angle` about a uniformly random axis perpendicular to it.
inline Eigen::Vector3d rotate_about_random_perp(Rng& rng, const Eigen::Vector3d& u, double angle) {
  Eigen::Vector3d r(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
  Eigen::Vector3d a = r - r.dot(u) * u;
  while (a.norm() < 1e-9) {
    r = {rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};
    a = r - r.dot(u) * u;
  }
  a.normalize();
  // Rodrigues with axis ⟂ u: the (1-cos) term vanishes.
  return u * std::cos(angle) + a.cross(u) * std::sin(angle);
}

}  // namespace detail

inline CorruptedField corrupt_field(const IncidenceField& V, const NoiseModel& model) {
  if (model.outlier_fraction < 0.0 || model.outlier_fraction >= 1.0)
    throw std::invalid_argument("corrupt_field: outlier fraction outside [0, 1)");
  if (V.state != RayNormalization::z_one)
    throw std::invalid_argument("corrupt_field: field must be z_one normalized");
  const int n = static_cast<int>(V.size());
  const int n_out = static_cast<int>(std::floor(model.outlier_fraction * n));
  Rng rng(model.seed);

  CorruptedField out;
  out.field = V;
  out.inlier_mask.assign(n, 1);

  const double sigma = model.angular_sigma_deg * std::numbers::pi / 180.0;
  if (sigma > 0.0) {
    for (auto& v : out.field.rays) {
      const double norm = v.norm();
      const Eigen::Vector3d u2 =
          detail::rotate_about_random_perp(rng, v / norm, rng.normal(0.0, sigma));
      if (!(u2.z() > 1e-12))
        throw DegenerateRayError("corrupt_field: noise rotated a ray past the image plane");
      v = u2 / u2.z();
    }
  }
  for (int idx : rng.sample_without_replacement(n, n_out)) {
    out.field.rays[idx] = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), 1.0};
    out.inlier_mask[idx] = 0;
  }
  return out;
}

// Random edit per the evaluation protocol: per-axis upscale uniform in [1, 2],
// then an integer-origin crop back to the original canvas. The crop origin is
// bounded so every output pixel center has its nearest-neighbor preimage
// inside the source raster.
inline CropResizeTransform make_edit(Rng& rng, int width, int height) {
  const double sx = rng.uniform(1.0, 2.0);
  const double sy = rng.uniform(1.0, 2.0);
  const int max_ox = static_cast<int>(std::floor((width - 1) * (sx - 1.0)));
  const int max_oy = static_cast<int>(std::floor((height - 1) * (sy - 1.0)));
  const int ox = rng.uniform_int(max_ox + 1);
  const int oy = rng.uniform_int(max_oy + 1);
  return {sx, sy, -static_cast<double>(ox), -static_cast<double>(oy)};
}

}  // namespace incalib
