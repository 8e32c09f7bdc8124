#include "regor/types.hpp"

#include "regor/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <string>
#include <unordered_set>

namespace regor {

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw InvalidArgument("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

Vec3 PointCloud::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points_) c += p;
  return points_.empty() ? c : Vec3(c / static_cast<double>(points_.size()));
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgument("rigid transform has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
    throw InvalidArgument("rotation is not a proper orthonormal matrix");
  }
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

CorrespondenceSet::CorrespondenceSet(std::vector<Correspondence> pairs, int stage) : stage_(stage) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(pairs.size() * 2);
  pairs_.reserve(pairs.size());
  for (const auto& c : pairs) {
    if (seen.insert(pair_key(c)).second) pairs_.push_back(c);
  }
}

void CorrespondenceSet::validate(std::size_t source_size, std::size_t target_size) const {
  for (const auto& c : pairs_) {
    if (c.source >= source_size || c.target >= target_size) {
      throw IndexOutOfRange("correspondence (" + std::to_string(c.source) + "," +
                            std::to_string(c.target) + ") outside clouds of size " +
                            std::to_string(source_size) + "/" + std::to_string(target_size));
    }
  }
}

CorrespondenceSet CorrespondenceSet::sorted() const {
  auto copy = pairs_;
  std::sort(copy.begin(), copy.end());
  return CorrespondenceSet(std::move(copy), stage_);
}

std::vector<PositionedPair> positioned(std::span<const Correspondence> pairs,
                                       const PointCloud& source, const PointCloud& target) {
  std::vector<PositionedPair> out;
  out.reserve(pairs.size());
  for (const auto& c : pairs) out.push_back({source[c.source], target[c.target]});
  return out;
}

}  // namespace regor
