#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/errors.hpp"
#include "incalib/incidence.hpp"
#include "incalib/raster.hpp"

namespace incalib {

// ============================================================================
// Intrinsics from depth + surface normals.
//
// A surface normal is orthogonal to the image-plane tangents of the
// back-projected surface P(x, y) = d(x, y) * v(x, y). Expanding that
// orthogonality for the x direction and clearing denominators gives
//
//   a1 fx fy + a2 fx by + a3 fy bx + a4 fy + a5 fx = 0
//
// with a1 = n3 gx, a2 = -n2 gx, a3 = -n1 gx, a4 = n1 (x gx + d), a5 = n2 y gx
// (gx the pixel-space depth gradient). The y direction swaps the roles: the
// "+ d" term moves from a4 to a5. Dividing by fx linearizes the system in
// X = (fy, by, r bx, r), r = fy / fx, with right-hand side -a5 per row.
//
// Note rows from a single plane span only rank 2 of the four unknowns (all of
// them share the direction (n3, -n2, -n1) in the first three columns), and a
// second plane raises that to just rank 3 — scenes need at least three
// non-parallel planes (or a curved surface) before the system is solvable.
// ============================================================================

enum class Axis { x, y };

enum class GradientScheme { sobel, central, analytic_callback };

// (d depth / d x, d depth / d y) in depth units per pixel.
using GradientCallback = std::function<std::pair<double, double>(int x, int y)>;

struct GradientField {
  Raster<double> dx;
  Raster<double> dy;
};

inline GradientField depth_gradient(const DepthMap& D, GradientScheme scheme,
                                    const GradientCallback& analytic = {}) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  GradientField g{Raster<double>(D.width, D.height, nan), Raster<double>(D.width, D.height, nan)};

  if (scheme == GradientScheme::analytic_callback) {
    if (!analytic)
      throw std::invalid_argument("depth_gradient: analytic_callback scheme needs a callback");
    for (int y = 0; y < D.height; ++y)
      for (int x = 0; x < D.width; ++x) {
        const auto [dx, dy] = analytic(x, y);
        g.dx.at(x, y) = dx;
        g.dy.at(x, y) = dy;
      }
    return g;
  }

  if (D.width < 3 || D.height < 3)
    throw DimensionError("depth_gradient: stencil schemes need at least 3x3, got " +
                         std::to_string(D.width) + "x" + std::to_string(D.height));

  for (int y = 1; y < D.height - 1; ++y) {
    for (int x = 1; x < D.width - 1; ++x) {
      bool ok = true;
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dx = -1; dx <= 1 && ok; ++dx)
          if (!depth_valid(D.at(x + dx, y + dy))) ok = false;
      if (!ok) continue;
      if (scheme == GradientScheme::central) {
        g.dx.at(x, y) = (D.at(x + 1, y) - D.at(x - 1, y)) / 2.0;
        g.dy.at(x, y) = (D.at(x, y + 1) - D.at(x, y - 1)) / 2.0;
      } else {  // sobel, normalized to a per-pixel derivative
        g.dx.at(x, y) = (D.at(x + 1, y - 1) + 2.0 * D.at(x + 1, y) + D.at(x + 1, y + 1) -
                         D.at(x - 1, y - 1) - 2.0 * D.at(x - 1, y) - D.at(x - 1, y + 1)) /
                        8.0;
        g.dy.at(x, y) = (D.at(x - 1, y + 1) + 2.0 * D.at(x, y + 1) + D.at(x + 1, y + 1) -
                         D.at(x - 1, y - 1) - 2.0 * D.at(x, y - 1) - D.at(x + 1, y - 1)) /
                        8.0;
      }
    }
  }
  return g;
}

struct ConstraintRow {
  double a1, a2, a3, a4, a5;
  Axis axis;
  int px, py;
  bool usable;  // at least one coefficient nonzero and all finite
};

// `grad` is the depth gradient along `axis` at pixel (px, py).
inline ConstraintRow build_constraint_row(int px, int py, double depth, double grad,
                                          const Eigen::Vector3d& normal, Axis axis) {
  ConstraintRow row{};
  row.axis = axis;
  row.px = px;
  row.py = py;
  const double n1 = normal.x(), n2 = normal.y(), n3 = normal.z();
  row.a1 = n3 * grad;
  row.a2 = -n2 * grad;
  row.a3 = -n1 * grad;
  if (axis == Axis::x) {
    row.a4 = n1 * (px * grad + depth);
    row.a5 = n2 * py * grad;
  } else {
    row.a4 = n1 * px * grad;
    row.a5 = n2 * (py * grad + depth);
  }
  const bool finite = std::isfinite(row.a1) && std::isfinite(row.a2) && std::isfinite(row.a3) &&
                      std::isfinite(row.a4) && std::isfinite(row.a5);
  row.usable = finite && (row.a1 != 0.0 || row.a2 != 0.0 || row.a3 != 0.0 || row.a4 != 0.0 ||
                          row.a5 != 0.0);
  return row;
}

struct DepthNormalSolution {
  Intrinsics K;
  double r;                 // fy / fx, as solved
  double residual;          // ||A X - B||_2 over the rows used
  double condition_number;  // sigma_max / sigma_min of A
};

namespace detail {

constexpr double kConditionLimit = 1e12;

inline DepthNormalSolution unpack_solution(const Eigen::Vector4d& X, double residual,
                                           double cond) {
  const double fy = X(0), by = X(1), rbx = X(2), r = X(3);
  if (!(r > 0.0) || !(fy > 0.0) || !std::isfinite(r) || !std::isfinite(fy))
    throw DegenerateConfigurationError(
        "depth-normal solve: solution implies non-positive focal (fy=" + std::to_string(fy) +
        ", r=" + std::to_string(r) + ")");
  const double fx = fy / r;
  const double bx = rbx / r;
  return {Intrinsics(fx, fy, bx, by), r, residual, cond};
}

inline Eigen::Vector4d row_lhs(const ConstraintRow& r) { return {r.a1, r.a2, r.a3, r.a4}; }

}  // namespace detail

// Gauss-Jordan elimination with partial pivoting on the square 4x4 system.
inline DepthNormalSolution solve_minimal(const std::array<ConstraintRow, 4>& rows) {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  for (int i = 0; i < 4; ++i) {
    A.row(i) = detail::row_lhs(rows[i]).transpose();
    B(i) = -rows[i].a5;
  }
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(A);
  const double smin = svd.singularValues()(3);
  const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                 : std::numeric_limits<double>::infinity();
  if (!(cond < detail::kConditionLimit))
    throw DegenerateConfigurationError("solve_minimal: condition number " + std::to_string(cond) +
                                       " exceeds 1e12");

  // Augmented [A | B] reduced to identity.
  Eigen::Matrix<double, 4, 5> M;
  M.leftCols<4>() = A;
  M.col(4) = B;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(M(r, col)) > std::abs(M(pivot, col))) pivot = r;
    if (M(pivot, col) == 0.0)
      throw DegenerateConfigurationError("solve_minimal: zero pivot in column " +
                                         std::to_string(col));
    M.row(col).swap(M.row(pivot));
    M.row(col) /= M(col, col);
    for (int r = 0; r < 4; ++r)
      if (r != col) M.row(r) -= M(r, col) * M.row(col);
  }
  const Eigen::Vector4d X = M.col(4);
  return detail::unpack_solution(X, (A * X - B).norm(), cond);
}

// Overdetermined least squares over all usable rows (SVD).
inline DepthNormalSolution solve_least_squares(std::span<const ConstraintRow> rows) {
  std::vector<const ConstraintRow*> usable;
  usable.reserve(rows.size());
  for (const auto& r : rows)
    if (r.usable) usable.push_back(&r);
  if (usable.size() < 4)
    throw std::invalid_argument("solve_least_squares: need at least 4 usable rows, got " +
                                std::to_string(usable.size()));
  Eigen::MatrixXd A(usable.size(), 4);
  Eigen::VectorXd B(usable.size());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    A.row(i) = detail::row_lhs(*usable[i]).transpose();
    B(i) = -usable[i]->a5;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()(3);
  const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                 : std::numeric_limits<double>::infinity();
  if (!(cond < detail::kConditionLimit))
    throw DegenerateConfigurationError("solve_least_squares: condition number " +
                                       std::to_string(cond) + " exceeds 1e12");
  const Eigen::Vector4d X = svd.solve(B);
  return detail::unpack_solution(X, (A * X - B).norm(), cond);
}

// Normals from central-difference tangents of the back-projected surface,
// oriented to face the camera (n . v < 0). Border pixels and pixels without a
// full valid stencil come back NaN.
inline NormalMap normals_from_depth(const DepthMap& D, const Intrinsics& K) {
  if (D.width < 3 || D.height < 3)
    throw DimensionError("normals_from_depth: need at least 3x3");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  NormalMap N(D.width, D.height, Eigen::Vector3d::Constant(nan));
  Raster<Eigen::Vector3d> P(D.width, D.height, Eigen::Vector3d::Constant(nan));
  for (int y = 0; y < D.height; ++y)
    for (int x = 0; x < D.width; ++x)
      if (depth_valid(D.at(x, y))) P.at(x, y) = D.at(x, y) * K.ray(x, y);

  const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int y = 1; y < D.height - 1; ++y) {
    for (int x = 1; x < D.width - 1; ++x) {
      bool ok = depth_valid(D.at(x, y));
      for (const auto& o : off)
        if (!depth_valid(D.at(x + o[0], y + o[1]))) ok = false;
      if (!ok) continue;
      const Eigen::Vector3d tx = (P.at(x + 1, y) - P.at(x - 1, y)) / 2.0;
      const Eigen::Vector3d ty = (P.at(x, y + 1) - P.at(x, y - 1)) / 2.0;
      Eigen::Vector3d n = tx.cross(ty);
      const double norm = n.norm();
      if (!(norm > 1e-15)) continue;  // degenerate tangents: leave invalid
      n /= norm;
      if (n.dot(K.ray(x, y)) > 0.0) n = -n;
      N.at(x, y) = n;
    }
  }
  return N;
}

}  // namespace incalib
