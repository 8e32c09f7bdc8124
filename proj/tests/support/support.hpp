#pragma once

#include "regor/types.hpp"
#include "regor/geometry.hpp"

#include <Eigen/Geometry>

#include <random>
#include <vector>

namespace regor::test {

inline Vec3 random_point(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent = 1.0) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = random_point(rng, -extent, extent);
  return PointCloud(std::move(pts));
}

/// Haar-ish random rotation from a normalized Gaussian quaternion.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_translation = 2.0) {
  return RigidTransform(random_rotation(rng), random_point(rng, -max_translation, max_translation));
}

/// A grid-sampled plane patch plus a sphere, which gives the descriptor and
/// consistency code real structure to work with.
inline PointCloud structured_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      pts.emplace_back(u(rng), u(rng), 0.0);
    } else {
      Vec3 d(g(rng), g(rng), g(rng));
      pts.push_back(Vec3(0.3, 0.2, 0.5) + 0.4 * d.normalized());
    }
  }
  return PointCloud(std::move(pts));
}

}  // namespace regor::test
