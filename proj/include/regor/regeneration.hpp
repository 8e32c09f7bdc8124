#pragma once

#include "regor/consistency.hpp"
#include "regor/features.hpp"
#include "regor/matching.hpp"
#include "regor/spatial_index.hpp"
#include "regor/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regor {

/// Per-stage hyperparameters, generated as geometric progressions from the
/// stage-0 values: k_t = round(k0 w_k^t), r_t = r0 w_r^t,
/// s_t = max(round(s0 w_s^t), s_min). Stages are numbered from 0.
struct IterationSchedule {
  std::size_t k0 = 20;
  double r0 = 1.0;
  std::size_t s0 = 500;
  double omega_k = 5.0;
  double omega_r = 0.5;
  double omega_s = 0.2;
  int iterations = 4;
  std::size_t k_gmm = 3;
  std::size_t s_min = 20;
  std::size_t min_region_points = 5;
  std::size_t global_cap = 2000;
  double top_fraction = 0.2;
  ConsistencyParams params;

  void validate() const;
  std::size_t points_at(int stage) const;
  double radius_at(int stage) const;
  std::size_t seeds_at(int stage) const;
};

/// Ablation switches. The defaults are the full method.
struct PipelineOptions {
  MatchingMode matching = MatchingMode::kGeneralizedMutual;
  LocalConsistency consistency = LocalConsistency::kCenterAware;
  bool local_correction = true;
  bool global_correction = true;
  bool progressive = true;
};

struct LocalRegion {
  Correspondence seed;
  std::vector<std::uint32_t> source_indices;  // ascending
  std::vector<std::uint32_t> target_indices;  // ascending
};

struct StageRecord {
  int stage = 0;
  std::size_t seed_count = 0;
  std::size_t region_count = 0;
  std::size_t accepted_regions = 0;
  std::size_t merged_count = 0;
  std::size_t corrected_count = 0;
  double mean_local_score = 0.0;
  bool global_fallback = false;
  double seconds = 0.0;
};

struct RegenerationTrace {
  PipelineOptions options;
  std::vector<StageRecord> stages;
  bool collapsed = false;
  int collapse_stage = -1;
};

/// Uniform sample without replacement of min(count, |G|) pairs, returned in
/// sorted key order. Throws EmptyInput.
CorrespondenceSet sample_seeds(const CorrespondenceSet& previous, std::size_t count,
                               std::uint64_t rng_seed);

/// Radius neighborhoods of both seed endpoints over the full clouds, each side
/// independently capped at `k_cap` by uniform sampling (seed endpoint kept).
/// Regions with either side below `min_points` are dropped.
std::vector<LocalRegion> group_local_regions(const CorrespondenceSet& seeds, const SpatialIndex& source,
                                             const SpatialIndex& target, double radius,
                                             std::size_t k_cap, std::uint64_t rng_seed,
                                             std::size_t min_points = 5);

/// Feature matching restricted to the region; returned pairs use global indices.
CorrespondenceSet local_rematch(const LocalRegion& region, const FeatureSet& source_features,
                                const FeatureSet& target_features, std::size_t k_gmm,
                                MatchingMode mode = MatchingMode::kGeneralizedMutual);

struct LocalCorrection {
  bool accepted = false;
  double score = 0.0;
  CorrespondenceSet pairs;
};

/// Scores the local set with the center-aware (or plain pairwise) matrix and
/// rejects it when the score is below 1. Otherwise fits a local pose on the
/// top-consistent pairs and re-snaps every source point of the set to its
/// nearest target in the region, dropping residuals above sigma_d.
LocalCorrection local_correct(const CorrespondenceSet& local, const LocalRegion& region,
                              const PointCloud& source, const PointCloud& target,
                              const ConsistencyParams& params,
                              LocalConsistency mode = LocalConsistency::kCenterAware,
                              double top_fraction = 0.2);

/// Hash-table union keyed on the exact (source, target) pair, sorted by key.
CorrespondenceSet merge_correspondences(std::span<const CorrespondenceSet> locals);

struct GlobalCorrection {
  CorrespondenceSet pairs;
  RigidTransform pose;
  /// Set when no consistent seed set was found; `pairs` is then the input.
  bool fallback = false;
};

/// Second-order consistency over a uniform subsample of at most `cap` pairs
/// picks seed pairs, a global pose is fit on them, and every source point of
/// the set is re-snapped to its nearest target under that pose (residual
/// <= sigma_d kept). Throws InvalidArgument when |G| < 3.
GlobalCorrection global_correct(const CorrespondenceSet& set, const PointCloud& source,
                                const SpatialIndex& target, const ConsistencyParams& params,
                                std::size_t cap = 2000, double top_fraction = 0.2,
                                std::uint64_t rng_seed = 0);

struct RegenerationResult {
  CorrespondenceSet correspondences;
  RigidTransform transform;
  /// False when fewer than 3 final pairs (or a degenerate set) left no pose.
  bool transform_valid = false;
  RegenerationTrace trace;
  /// The correspondence set after each completed stage.
  std::vector<CorrespondenceSet> history;
};

/// The progressive pipeline: per stage sample seeds, group regions, rematch,
/// correct locally, merge, correct globally. Deterministic given `rng_seed`
/// regardless of thread count. A stage where no region survives stops the
/// run and marks the trace collapsed; the previous stage's set is returned.
RegenerationResult regenerate(const PointCloud& source, const PointCloud& target,
                              const FeatureSet& source_features, const FeatureSet& target_features,
                              const CorrespondenceSet& initial, const IterationSchedule& schedule,
                              const PipelineOptions& options, std::uint64_t rng_seed);

/// Initial set when none is supplied: nearest-neighbour feature matching over
/// the full clouds followed by one global correction pass.
CorrespondenceSet bootstrap_correspondences(const PointCloud& source, const PointCloud& target,
                                            const FeatureSet& source_features,
                                            const FeatureSet& target_features,
                                            const IterationSchedule& schedule, std::uint64_t rng_seed);

/// Deterministic seed mixing (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace regor
