#pragma once

#include "regor/types.hpp"

#include <cstdint>
#include <span>

namespace regor {

struct GroundTruth {
  RigidTransform transform;
  double inlier_tolerance = 0.1;
};

struct SuccessThresholds {
  double rotation_deg = 15.0;
  double translation = 0.3;

  static SuccessThresholds indoor() { return {15.0, 0.30}; }
  static SuccessThresholds outdoor() { return {5.0, 0.60}; }
};

struct PairMetrics {
  double re = 0.0;  // degrees
  double te = 0.0;
  double ip = 0.0;
  std::size_t in_count = 0;
  std::size_t initial_in_count = 0;
  double initial_ip = 0.0;
  /// in_count / initial_in_count, or in_count itself when there were no initial inliers.
  double inr = 0.0;
  bool success = false;
};

struct DatasetMetrics {
  std::size_t pairs = 0;
  double rr = 0.0;
  double mean_re = 0.0;  // over successful pairs only
  double mean_te = 0.0;
  double mean_ip = 0.0;
  double mean_in = 0.0;
  double mean_inr = 0.0;
  double fmr = 0.0;  // fraction of pairs whose initial set has ip >= 0.05
};

/// Degrees, with the trace argument clamped into [-1, 1].
double rotation_error(const Mat3& estimate, const Mat3& truth);
double translation_error(const Vec3& estimate, const Vec3& truth);
bool is_inlier(const PositionedPair& pair, const GroundTruth& gt);
std::size_t count_inliers(std::span<const PositionedPair> pairs, const GroundTruth& gt);

PairMetrics pair_metrics(std::span<const PositionedPair> initial, std::span<const PositionedPair> final_pairs,
                         const RigidTransform& estimate, const GroundTruth& gt,
                         const SuccessThresholds& thresholds);

/// Throws EmptyDataset.
DatasetMetrics dataset_metrics(std::span<const PairMetrics> per_pair);

/// Synthetic scene parameters. Lengths are in meters; `scale` sets the size
/// of the sampled geometry.
struct SceneSpec {
  std::size_t point_count = 2000;
  double overlap_fraction = 0.7;
  double noise_sigma = 0.005;
  double outlier_ratio = 0.9;
  std::size_t initial_pair_count = 500;
  double max_rotation_deg = 60.0;
  double max_translation = 1.0;
  double scale = 1.0;
  /// Wrong initial pairs are drawn so that none lies within this residual.
  double inlier_tolerance = 0.1;
  std::uint64_t rng_seed = 0;

  void validate() const;
  /// ceil((1 - outlier_ratio) * initial_pair_count).
  std::size_t true_pair_count() const;
};

struct Scene {
  PointCloud source;
  PointCloud target;
  GroundTruth truth;
  CorrespondenceSet initial;
  /// Source index -> target index of the same sampled surface point, or -1.
  std::vector<std::int64_t> partner;
};

/// Planar patches and ellipsoid shells sampled by area; the source and target
/// are overlapping slabs of the same world along a random direction. Target
/// noise is Gaussian per axis (std noise_sigma / 2), truncated so the residual
/// norm never exceeds noise_sigma. Throws InvalidSpec.
Scene generate_scene(const SceneSpec& spec);

}  // namespace regor
