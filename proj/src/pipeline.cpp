#include "regor/pipeline.hpp"

#include "regor/errors.hpp"
#include "regor/refinement.hpp"

namespace regor {

RegistrationOutput register_clouds(const PointCloud& source, const PointCloud& target,
                                   std::optional<FeatureSet> source_features,
                                   std::optional<FeatureSet> target_features,
                                   std::optional<CorrespondenceSet> initial, const RunConfig& config) {
  config.validate();
  if (source.empty() || target.empty()) throw EmptyCloud("registration needs non-empty clouds");
  if (!source_features) source_features = compute_weak_descriptor(source, config.descriptor_radius);
  if (!target_features) target_features = compute_weak_descriptor(target, config.descriptor_radius);

  RegistrationOutput out;
  if (initial) {
    out.initial = *initial;
  } else if (config.bootstrap) {
    out.initial = bootstrap_correspondences(source, target, *source_features, *target_features, config.schedule,
                                            derive_seed(config.rng_seed, 0xB0));
  } else {
    throw InvalidConfig("no initial correspondences given and bootstrap is disabled");
  }
  out.regeneration = regenerate(source, target, *source_features, *target_features, out.initial, config.schedule,
                                config.pipeline_options(), config.rng_seed);
  out.transform = out.regeneration.transform;
  out.transform_valid = out.regeneration.transform_valid;
  if (out.transform_valid && config.refine) {
    try {
      out.transform = refine_pose(out.transform, source, target, config.refinement);
      out.refined = true;
    } catch (const DegenerateInput&) {
      // Too little overlap under the regenerated pose; keep it unrefined.
    }
  }
  return out;
}

SceneRun run_scene(const Scene& scene, const RunConfig& config) {
  SceneRun run;
  run.output = register_clouds(scene.source, scene.target, std::nullopt, std::nullopt, scene.initial, config);
  const GroundTruth gt{scene.truth.transform, config.inlier_tolerance};
  const auto initial = positioned(scene.initial.pairs(), scene.source, scene.target);
  const auto final_pairs =
      positioned(run.output.regeneration.correspondences.pairs(), scene.source, scene.target);
  const RigidTransform estimate = run.output.transform_valid ? run.output.transform : RigidTransform::identity();
  run.metrics = pair_metrics(initial, final_pairs, estimate, gt, config.thresholds);
  if (!run.output.transform_valid) run.metrics.success = false;
  for (const auto& set : run.output.regeneration.history) {
    run.stage_inliers.push_back(count_inliers(positioned(set.pairs(), scene.source, scene.target), gt));
  }
  return run;
}

}  // namespace regor
