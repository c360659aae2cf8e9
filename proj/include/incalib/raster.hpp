#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <vector>

namespace incalib {

// Dense row-major grid addressed as (x, y) = (column, row).
template <class T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, const T& fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::size_t size() const { return data.size(); }
};

using DepthMap = Raster<double>;
using NormalMap = Raster<Eigen::Vector3d>;
using PointCloud = std::vector<Eigen::Vector3d>;

// A depth sample participates only when finite and in front of the camera.
inline bool depth_valid(double d) { return std::isfinite(d) && d > 0.0; }

}  // namespace incalib
