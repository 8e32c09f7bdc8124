#include "regor/errors.hpp"
#include "regor/spatial_index.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace regor {
namespace {

std::vector<std::uint32_t> brute_radius(const PointCloud& c, const Vec3& center, double r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < c.size(); ++i) {
    if ((c[i] - center).squaredNorm() <= r * r) out.push_back(i);
  }
  return out;
}

Neighbor brute_nearest(const PointCloud& c, const Vec3& q) {
  Neighbor best{0, INFINITY};
  double best_sq = INFINITY;
  for (std::uint32_t i = 0; i < c.size(); ++i) {
    const double d = (c[i] - q).squaredNorm();
    if (d < best_sq) {
      best_sq = d;
      best.index = i;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

TEST(SpatialIndex, MatchesBruteForceOnRandomClouds) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cloud = test::random_cloud(rng, 1 + trial * 7);
    const SpatialIndex index(cloud);
    for (int q = 0; q < 20; ++q) {
      const Vec3 center = test::random_point(rng, -1.2, 1.2);
      const double r = 0.05 + 0.05 * q;
      EXPECT_EQ(index.radius_neighbors(center, r), brute_radius(cloud, center, r));
      const auto nn = index.nearest_neighbor(center);
      const auto expect = brute_nearest(cloud, center);
      EXPECT_EQ(nn.index, expect.index);
      EXPECT_EQ(nn.distance, expect.distance);
    }
  }
}

TEST(SpatialIndex, RadiusBallIsClosed) {
  const PointCloud c({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
  const SpatialIndex index(c);
  EXPECT_EQ(index.radius_neighbors(Vec3(0, 0, 0), 1.0), (std::vector<std::uint32_t>{0, 1}));
}

TEST(SpatialIndex, NearestTieGoesToSmallestIndex) {
  std::vector<Vec3> pts(40, Vec3(1, 1, 1));
  pts.push_back(Vec3(5, 5, 5));
  const PointCloud c(pts);
  const SpatialIndex index(c);
  EXPECT_EQ(index.nearest_neighbor(Vec3(1, 1, 1.5)).index, 0u);
  const PointCloud sym({Vec3(1, 0, 0), Vec3(-1, 0, 0)});
  EXPECT_EQ(SpatialIndex(sym).nearest_neighbor(Vec3::Zero()).index, 0u);
}

TEST(SpatialIndex, Errors) {
  const PointCloud empty;
  const SpatialIndex index(empty);
  EXPECT_THROW(index.nearest_neighbor(Vec3::Zero()), EmptyCloud);
  EXPECT_TRUE(index.radius_neighbors(Vec3::Zero(), 1.0).empty());
  EXPECT_THROW(index.radius_neighbors(Vec3::Zero(), 0.0), InvalidArgument);
}

}  // namespace
}  // namespace regor
