#include "regor/geometry.hpp"

#include "regor/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

namespace regor {

RigidTransform fit_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst,
                                   std::span<const double> weights) {
  if (src.size() != dst.size()) throw DegenerateInput("source and target lengths differ");
  if (src.size() < 3) throw DegenerateInput("at least 3 point pairs are required");
  if (!weights.empty() && weights.size() != src.size()) {
    throw DegenerateInput("weight count does not match point count");
  }
  const auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  double total = 0.0;
  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weight(i);
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateInput("weights must be finite and non-negative");
    total += w;
    src_mean += w * src[i];
    dst_mean += w * dst[i];
  }
  if (total <= 0.0) throw DegenerateInput("weights sum to zero");
  src_mean /= total;
  dst_mean /= total;

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cov += weight(i) * (dst[i] - dst_mean) * (src[i] - src_mean).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DegenerateInput("cross-covariance has rank < 2 (collinear or coincident points)");
  }

  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) s(2) = -1.0;
  Mat3 rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

  // Re-orthonormalize so the SO(3) invariant holds to the last bit.
  Eigen::JacobiSVD<Mat3> clean(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rotation = clean.matrixU() * clean.matrixV().transpose();
  if (rotation.determinant() < 0) {
    Mat3 u = clean.matrixU();
    u.col(2) *= -1.0;
    rotation = u * clean.matrixV().transpose();
  }
  return {rotation, dst_mean - rotation * src_mean};
}

RigidTransform fit_rigid_transform(std::span<const PositionedPair> pairs,
                                   std::span<const double> weights) {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const auto& p : pairs) {
    src.push_back(p.source);
    dst.push_back(p.target);
  }
  return fit_rigid_transform(src, dst, weights);
}

PointCloud apply_transform(const RigidTransform& transform, const PointCloud& cloud) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points()) out.push_back(transform.apply(p));
  return PointCloud(std::move(out));
}

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Mat3& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace regor
