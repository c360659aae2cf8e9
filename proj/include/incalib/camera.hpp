#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

#include "incalib/errors.hpp"

namespace incalib {

// ============================================================================
// Pinhole intrinsics, 4 DoF: per-axis focal lengths and principal point,
// zero skew. Pixel coordinates use integer pixel centers with the origin at
// the center of the top-left pixel; pixel (row i, column j) is x = j, y = i.
// ============================================================================
struct Intrinsics {
  double fx;
  double fy;
  double bx;
  double by;

  Intrinsics(double fx_, double fy_, double bx_, double by_)
      : fx(fx_), fy(fy_), bx(bx_), by(by_) {
    if (!(fx > 0.0) || !(fy > 0.0))
      throw std::invalid_argument("Intrinsics: focal lengths must be positive (fx=" +
                                  std::to_string(fx_) + ", fy=" + std::to_string(fy_) + ")");
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d K;
    K << fx, 0.0, bx,
         0.0, fy, by,
         0.0, 0.0, 1.0;
    return K;
  }

  // Closed-form inverse of matrix().
  Eigen::Matrix3d inverse_matrix() const {
    Eigen::Matrix3d Ki;
    Ki << 1.0 / fx, 0.0, -bx / fx,
          0.0, 1.0 / fy, -by / fy,
          0.0, 0.0, 1.0;
    return Ki;
  }

  // Incidence ray of pixel (x, y), z-one normalized.
  Eigen::Vector3d ray(double x, double y) const {
    return {(x - bx) / fx, (y - by) / fy, 1.0};
  }

  bool operator==(const Intrinsics& o) const {
    return fx == o.fx && fy == o.fy && bx == o.bx && by == o.by;
  }
};

// One-parameter camera: shared focal length, principal point at the image
// center. The conversion is exact, no rounding.
struct SimpleCamera {
  double f;
  int width;
  int height;

  SimpleCamera(double f_, int width_, int height_) : f(f_), width(width_), height(height_) {
    if (!(f > 0.0)) throw std::invalid_argument("SimpleCamera: focal length must be positive");
    if (width_ < 1 || height_ < 1) throw std::invalid_argument("SimpleCamera: empty image");
  }

  Intrinsics intrinsics() const { return {f, f, width / 2.0, height / 2.0}; }
};

// ============================================================================
// Axis-aligned crop/resize acting on pixel coordinates:
//   x' = dfx * x + dcx,  y' = dfy * y + dcy
// A resize contributes the scales, a crop contributes the offsets. Acts on
// intrinsics by left multiplication of the 3x3 matrices.
// ============================================================================
struct CropResizeTransform {
  double dfx;
  double dfy;
  double dcx;
  double dcy;

  CropResizeTransform(double dfx_, double dfy_, double dcx_, double dcy_)
      : dfx(dfx_), dfy(dfy_), dcx(dcx_), dcy(dcy_) {
    if (!(dfx > 0.0) || !(dfy > 0.0))
      throw std::invalid_argument("CropResizeTransform: scales must be positive");
  }

  static CropResizeTransform identity() { return {1.0, 1.0, 0.0, 0.0}; }

  Eigen::Vector2d apply(double x, double y) const { return {dfx * x + dcx, dfy * y + dcy}; }

  // Preimage of an output pixel.
  Eigen::Vector2d apply_inverse(double x, double y) const {
    return {(x - dcx) / dfx, (y - dcy) / dfy};
  }

  CropResizeTransform inverse() const {
    return {1.0 / dfx, 1.0 / dfy, -dcx / dfx, -dcy / dfy};
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d M;
    M << dfx, 0.0, dcx,
         0.0, dfy, dcy,
         0.0, 0.0, 1.0;
    return M;
  }

  bool operator==(const CropResizeTransform& o) const {
    return dfx == o.dfx && dfy == o.dfy && dcx == o.dcx && dcy == o.dcy;
  }
};

// second ∘ first (apply `first`, then `second`).
inline CropResizeTransform compose(const CropResizeTransform& second,
                                   const CropResizeTransform& first) {
  return {second.dfx * first.dfx,
          second.dfy * first.dfy,
          second.dfx * first.dcx + second.dcx,
          second.dfy * first.dcy + second.dcy};
}

// K' = T * K: the intrinsics of the cropped/resized image.
inline Intrinsics apply_transform(const CropResizeTransform& T, const Intrinsics& K) {
  return {T.dfx * K.fx, T.dfy * K.fy, T.dfx * K.bx + T.dcx, T.dfy * K.by + T.dcy};
}

}  // namespace incalib
