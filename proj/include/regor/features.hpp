#pragma once

#include "regor/types.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace regor {

/// One D-dimensional descriptor per point, stored row-major as 32-bit floats.
class FeatureSet {
 public:
  FeatureSet() = default;
  /// Throws InvalidArgument on non-finite entries, D == 0, or a size that is
  /// not a multiple of D.
  FeatureSet(std::vector<float> values, std::size_t dimension);

  std::size_t size() const noexcept { return dimension_ ? values_.size() / dimension_ : 0; }
  std::size_t dimension() const noexcept { return dimension_; }
  bool empty() const noexcept { return size() == 0; }
  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dimension_, dimension_};
  }
  std::span<const float> values() const noexcept { return values_; }

  /// Rows `indices` in the given order.
  FeatureSet subset(std::span<const std::uint32_t> indices) const;

 private:
  std::vector<float> values_;
  std::size_t dimension_ = 0;
};

/// Throws InvalidArgument unless `features.size() == cloud.size()`.
void require_matching(const FeatureSet& features, const PointCloud& cloud);

inline constexpr std::size_t kDescriptorBins = 11;
inline constexpr std::size_t kDescriptorDimension = 3 * kDescriptorBins;

/// Unit normals from the covariance of each radius neighborhood, oriented
/// toward the cloud centroid. Points with fewer than 3 neighbors get zero.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, double support_radius);

/// Simplified FPFH-style descriptor: per point, the three Darboux-frame pair
/// angles against each radius neighbor, binned 11 ways each and L1-normalized
/// to a 33-bin histogram. Points with fewer than 5 neighbors get the zero
/// vector. Throws TooFewPoints for clouds under 10 points.
FeatureSet compute_weak_descriptor(const PointCloud& cloud, double support_radius);

/// Euclidean distance. Throws DimensionMismatch.
double feature_distance(std::span<const float> a, std::span<const float> b);

/// Little-endian `u32 N, u32 D`, then N*D float32 row-major.
FeatureSet read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const FeatureSet& features);

namespace serial {
FeatureSet compute_weak_descriptor(const PointCloud& cloud, double support_radius);
}

}  // namespace regor
