#include "regor/spatial_index.hpp"

#include "regor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace regor {
namespace {
constexpr std::uint32_t kLeafSize = 12;
}

SpatialIndex::SpatialIndex(const PointCloud& cloud) : cloud_(&cloud), order_(cloud.size()) {
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * cloud.size() / kLeafSize + 1);
  if (!cloud.empty()) build(0, static_cast<std::uint32_t>(cloud.size()), 0);
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  // Split the widest extent at the median.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin((*cloud_)[order_[i]]);
    hi = hi.cwiseMax((*cloud_)[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  (void)depth;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return (*cloud_)[a](axis) < (*cloud_)[b](axis);
                   });
  const double split = (*cloud_)[order_[mid]](axis);
  const std::uint32_t left = build(begin, mid, depth + 1);
  const std::uint32_t right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::uint32_t> SpatialIndex::radius_neighbors(const Vec3& center, double radius) const {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  std::vector<std::uint32_t> out;
  if (!nodes_.empty()) radius_search(0, center, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void SpatialIndex::radius_search(std::uint32_t node_id, const Vec3& center, double radius_sq,
                                 std::vector<std::uint32_t>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      if (((*cloud_)[order_[i]] - center).squaredNorm() <= radius_sq) out.push_back(order_[i]);
    }
    return;
  }
  // Left holds values <= split, right holds values >= split.
  const double diff = center(node.axis) - node.split;
  const double diff_sq = diff * diff;
  if (diff <= 0.0 || diff_sq <= radius_sq) radius_search(node.left, center, radius_sq, out);
  if (diff >= 0.0 || diff_sq <= radius_sq) radius_search(node.right, center, radius_sq, out);
}

Neighbor SpatialIndex::nearest_neighbor(const Vec3& query) const {
  if (nodes_.empty()) throw EmptyCloud("nearest-neighbor query on an empty cloud");
  Neighbor best{std::numeric_limits<std::uint32_t>::max(), 0.0};
  double best_sq = std::numeric_limits<double>::infinity();
  nearest_search(0, query, best, best_sq);
  best.distance = std::sqrt(best_sq);
  return best;
}

void SpatialIndex::nearest_search(std::uint32_t node_id, const Vec3& query, Neighbor& best,
                                  double& best_sq) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d = ((*cloud_)[idx] - query).squaredNorm();
      if (d < best_sq || (d == best_sq && idx < best.index)) {
        best_sq = d;
        best.index = idx;
      }
    }
    return;
  }
  const double diff = query(node.axis) - node.split;
  const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
  const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
  nearest_search(near, query, best, best_sq);
  // Equal-distance candidates may sit across the plane; only prune strictly.
  if (diff * diff <= best_sq) nearest_search(far, query, best, best_sq);
}

}  // namespace regor
