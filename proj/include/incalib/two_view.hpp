#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "incalib/camera.hpp"
#include "incalib/errors.hpp"
#include "incalib/rng.hpp"

namespace incalib {

// ============================================================================
// Two-view relative pose at desk scale. The pipeline is deliberately plain:
// synthetic correspondences, normalized eight-point fundamental estimation,
// essential upgrade from per-view intrinsics, and a cheirality vote over the
// four pose candidates. Pose quality is then a direct readout of intrinsic
// quality, which is the quantity under study.
// ============================================================================

struct RelativePose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d(1.0, 0.0, 0.0);  // unit direction
};

struct CorrespondenceSet {
  std::vector<Eigen::Vector2d> p1, p2;  // pixel coordinates per view
  std::vector<std::uint8_t> inlier;
  int width1 = 0, height1 = 0;
  int width2 = 0, height2 = 0;

  std::size_t size() const { return p1.size(); }
};

namespace detail {

inline void require_rotation(const Eigen::Matrix3d& R) {
  if ((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() > 1e-9 ||
      R.determinant() < 0.0)
    throw std::invalid_argument("pose rotation is not orthonormal with det +1");
}

inline Eigen::Vector2d project(const Intrinsics& K, const Eigen::Vector3d& X) {
  return {K.fx * X.x() / X.z() + K.bx, K.fy * X.y() / X.z() + K.by};
}

}  // namespace detail

// Samples scene points a few meters in front of view 1, keeps those that land
// inside both images, and (optionally) perturbs both projections with
// Gaussian pixel noise. The translation is interpreted at unit baseline.
inline CorrespondenceSet synth_pair(Rng& rng, const Intrinsics& K1, int width1, int height1,
                                    const Intrinsics& K2, int width2, int height2,
                                    const RelativePose& pose, int n_points, double noise_px) {
  if (n_points < 8) throw std::invalid_argument("synth_pair: need at least 8 points");
  if (width1 < 2 || height1 < 2 || width2 < 2 || height2 < 2)
    throw std::invalid_argument("synth_pair: image dims too small");
  if (noise_px < 0.0) throw std::invalid_argument("synth_pair: negative noise");
  detail::require_rotation(pose.R);
  if (std::abs(pose.t.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("synth_pair: translation must be a unit direction");

  CorrespondenceSet set;
  set.width1 = width1;
  set.height1 = height1;
  set.width2 = width2;
  set.height2 = height2;
  set.p1.reserve(n_points);
  set.p2.reserve(n_points);

  const Eigen::Matrix3d K1_inv_rows = K1.inverse_matrix();
  long attempts = 0;
  const long attempt_cap = 1000L * n_points;
  while (static_cast<int>(set.p1.size()) < n_points) {
    if (++attempts > attempt_cap)
      throw DegenerateConfigurationError(
          "synth_pair: could not place points inside both frusta; pose/geometry degenerate");
    const Eigen::Vector2d px(rng.uniform(0.0, width1 - 1.0), rng.uniform(0.0, height1 - 1.0));
    const double z = rng.uniform(4.0, 12.0);
    const Eigen::Vector3d X1 = z * (K1_inv_rows * Eigen::Vector3d(px.x(), px.y(), 1.0));
    const Eigen::Vector3d X2 = pose.R * X1 + pose.t;
    if (X2.z() < 0.5) continue;
    const Eigen::Vector2d px2 = detail::project(K2, X2);
    if (px2.x() < 0.0 || px2.x() > width2 - 1.0 || px2.y() < 0.0 || px2.y() > height2 - 1.0)
      continue;
    set.p1.push_back(px);
    set.p2.push_back(px2);
  }
  if (noise_px > 0.0) {
    for (int i = 0; i < n_points; ++i) {
      set.p1[i].x() += rng.normal(0.0, noise_px);
      set.p1[i].y() += rng.normal(0.0, noise_px);
      set.p2[i].x() += rng.normal(0.0, noise_px);
      set.p2[i].y() += rng.normal(0.0, noise_px);
    }
  }
  set.inlier.assign(n_points, 1);
  return set;
}

namespace detail {

// Isotropic normalization: centroid to the origin, mean distance to sqrt(2).
inline Eigen::Matrix3d hartley_normalize(const std::vector<Eigen::Vector2d>& pts,
                                         std::vector<Eigen::Vector2d>& out) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12)
    throw DegenerateConfigurationError("eight_point: coincident correspondences");
  const double s = std::sqrt(2.0) / mean_dist;
  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = s * (pts[i] - centroid);
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T(0, 0) = T(1, 1) = s;
  T(0, 2) = -s * centroid.x();
  T(1, 2) = -s * centroid.y();
  return T;
}

}  // namespace detail

// Normalized eight-point estimate of the fundamental matrix, rank-2 enforced,
// scaled to unit Frobenius norm with a deterministic sign.
inline Eigen::Matrix3d eight_point(const CorrespondenceSet& set) {
  const std::size_t n = set.size();
  if (n < 8 || set.p2.size() != n)
    throw std::invalid_argument("eight_point: need at least 8 correspondence pairs");

  std::vector<Eigen::Vector2d> q1, q2;
  const Eigen::Matrix3d T1 = detail::hartley_normalize(set.p1, q1);
  const Eigen::Matrix3d T2 = detail::hartley_normalize(set.p2, q2);

  Eigen::MatrixXd A(n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = q1[i].x(), y = q1[i].y();
    const double xp = q2[i].x(), yp = q2[i].y();
    A.row(i) << xp * x, xp * y, xp, yp * x, yp * y, yp, x, y, 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  // A clean problem leaves exactly one near-zero singular value. A second one
  // means the pairs do not constrain F (collinear/coincident geometry).
  if (sv(7) <= 1e-9 * sv(0))
    throw DegenerateConfigurationError("eight_point: correspondences are rank-deficient");
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d Fn;
  Fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

  Eigen::JacobiSVD<Eigen::Matrix3d> fsvd(Fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = fsvd.singularValues();
  s(2) = 0.0;
  Fn = fsvd.matrixU() * s.asDiagonal() * fsvd.matrixV().transpose();

  Eigen::Matrix3d F = T2.transpose() * Fn * T1;
  F /= F.norm();
  // Fix the overall sign so equal inputs give bitwise-equal outputs.
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (std::abs(F(r, c)) > 1e-12) {
        if (F(r, c) < 0.0) F = -F;
        return F;
      }
    }
  return F;
}

// Four-way decomposition of an essential matrix into pose candidates.
inline std::array<RelativePose, 4> decompose_essential(const Eigen::Matrix3d& E) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU();
  Eigen::Matrix3d V = svd.matrixV();
  if (U.determinant() < 0.0) U = -U;
  if (V.determinant() < 0.0) V = -V;
  Eigen::Matrix3d W;
  W << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d R1 = U * W * V.transpose();
  const Eigen::Matrix3d R2 = U * W.transpose() * V.transpose();
  const Eigen::Vector3d t = U.col(2).normalized();
  return {RelativePose{R1, t}, RelativePose{R1, -t}, RelativePose{R2, t}, RelativePose{R2, -t}};
}

namespace detail {

// Both depths of a correspondence are positive for (R, t) iff the 2x2 normal
// equations of z1*(R x1) + t = z2*x2 have a positive solution (rays unit).
inline bool depths_positive(const RelativePose& pose, const Eigen::Vector3d& x1_unit,
                            const Eigen::Vector3d& x2_unit) {
  const Eigen::Vector3d r1 = pose.R * x1_unit;
  const double a = -r1.dot(x2_unit);
  const double b1 = -r1.dot(pose.t);
  const double b2 = x2_unit.dot(pose.t);
  return (b1 - a * b2) > 0.0 && (-a * b1 + b2) > 0.0;
}

}  // namespace detail

// Selects among the four candidates by counting correspondences with positive
// depth in both views. A winner below a 60% majority is rejected as ambiguous.
inline RelativePose pose_from_essential(const Eigen::Matrix3d& E, const CorrespondenceSet& set,
                                        const Intrinsics& K1, const Intrinsics& K2) {
  const std::size_t n = set.size();
  if (n == 0) throw std::invalid_argument("pose_from_essential: empty correspondence set");
  const Eigen::Matrix3d K1_inv = K1.inverse_matrix();
  const Eigen::Matrix3d K2_inv = K2.inverse_matrix();
  std::vector<Eigen::Vector3d> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = (K1_inv * Eigen::Vector3d(set.p1[i].x(), set.p1[i].y(), 1.0)).normalized();
    x2[i] = (K2_inv * Eigen::Vector3d(set.p2[i].x(), set.p2[i].y(), 1.0)).normalized();
  }
  const auto candidates = decompose_essential(E);
  std::array<std::size_t, 4> votes{0, 0, 0, 0};
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < n; ++i)
      votes[c] += detail::depths_positive(candidates[c], x1[i], x2[i]) ? 1 : 0;
  std::size_t best = 0;
  for (std::size_t c = 1; c < 4; ++c)
    if (votes[c] > votes[best]) best = c;
  if (5 * votes[best] < 3 * n)  // < 60% majority
    throw AmbiguousPoseError("pose_from_essential: no candidate reaches a 60% cheirality vote");
  return candidates[best];
}

// Full uncalibrated pipeline: fundamental from pixels, essential from the
// supplied per-view intrinsics, cheirality-selected pose.
inline RelativePose pose_from_uncalibrated(const CorrespondenceSet& set, const Intrinsics& K1_est,
                                           const Intrinsics& K2_est) {
  const Eigen::Matrix3d F = eight_point(set);
  const Eigen::Matrix3d E = K2_est.matrix().transpose() * F * K1_est.matrix();
  return pose_from_essential(E, set, K1_est, K2_est);
}

}  // namespace incalib
