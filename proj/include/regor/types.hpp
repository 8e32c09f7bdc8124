#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace regor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered set of finite 3-D points. Immutable after construction.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws InvalidArgument if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const noexcept { return points_; }
  Vec3 centroid() const;

 private:
  std::vector<Vec3> points_;
};

/// Rotation + translation, q = R p + t. The constructor enforces SO(3).
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  /// Builds a transform from a 4x4 homogeneous matrix (bottom row ignored).
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  /// (*this) after `other`: x -> this(other(x)).
  RigidTransform compose(const RigidTransform& other) const;
  Eigen::Matrix4d matrix() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

struct Correspondence {
  std::uint32_t source = 0;
  std::uint32_t target = 0;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
  friend auto operator<=>(const Correspondence&, const Correspondence&) = default;
};

inline std::uint64_t pair_key(const Correspondence& c) {
  return (static_cast<std::uint64_t>(c.source) << 32) | c.target;
}

/// Correspondence pairs without duplicates, plus the stage that produced them.
class CorrespondenceSet {
 public:
  CorrespondenceSet() = default;
  /// Duplicate pairs are collapsed; first occurrence order is kept.
  explicit CorrespondenceSet(std::vector<Correspondence> pairs, int stage = 0);

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const Correspondence& operator[](std::size_t i) const { return pairs_[i]; }
  std::span<const Correspondence> pairs() const noexcept { return pairs_; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  int stage() const noexcept { return stage_; }

  /// Throws IndexOutOfRange if any index falls outside the given cloud sizes.
  void validate(std::size_t source_size, std::size_t target_size) const;
  CorrespondenceSet sorted() const;

 private:
  std::vector<Correspondence> pairs_;
  int stage_ = 0;
};

/// Correspondence with its endpoint coordinates resolved.
struct PositionedPair {
  Vec3 source;
  Vec3 target;
};

std::vector<PositionedPair> positioned(std::span<const Correspondence> pairs,
                                       const PointCloud& source,
                                       const PointCloud& target);

}  // namespace regor
