#pragma once

#include "regor/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace regor {

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;
};

/// Static kd-tree over one point cloud. Queries are const and safe to issue
/// from several threads at once. The index keeps a reference to the cloud,
/// which must outlive it.
class SpatialIndex {
 public:
  explicit SpatialIndex(const PointCloud& cloud);

  /// All i with |p_i - center| <= radius (closed ball), ascending index order.
  std::vector<std::uint32_t> radius_neighbors(const Vec3& center, double radius) const;

  /// Closest point; ties go to the smallest index. Throws EmptyCloud.
  Neighbor nearest_neighbor(const Vec3& query) const;

  const PointCloud& cloud() const noexcept { return *cloud_; }

 private:
  struct Node {
    // Leaf when `axis < 0`; then [begin, end) indexes `order_`.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  void radius_search(std::uint32_t node, const Vec3& center, double radius_sq,
                     std::vector<std::uint32_t>& out) const;
  void nearest_search(std::uint32_t node, const Vec3& query, Neighbor& best, double& best_sq) const;

  const PointCloud* cloud_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace regor
