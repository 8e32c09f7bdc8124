#pragma once

#include "regor/config.hpp"
#include "regor/evaluation.hpp"
#include "regor/features.hpp"
#include "regor/regeneration.hpp"

#include <optional>

namespace regor {

struct RegistrationOutput {
  RegenerationResult regeneration;
  /// Final pose: the regeneration fit, refined when enabled and possible.
  RigidTransform transform;
  bool transform_valid = false;
  bool refined = false;
  CorrespondenceSet initial;
};

/// End-to-end registration. Missing features are computed with the weak
/// descriptor; a missing initial set is bootstrapped (or fails with
/// InvalidConfig when bootstrap is disabled).
RegistrationOutput register_clouds(const PointCloud& source, const PointCloud& target,
                                   std::optional<FeatureSet> source_features,
                                   std::optional<FeatureSet> target_features,
                                   std::optional<CorrespondenceSet> initial, const RunConfig& config);

/// Registers a generated scene with its own initial set and scores it.
struct SceneRun {
  RegistrationOutput output;
  PairMetrics metrics;
  std::vector<std::size_t> stage_inliers;  // ground-truth inliers of the set after each stage
};
SceneRun run_scene(const Scene& scene, const RunConfig& config);

}  // namespace regor
