// Median ground-truth inlier count of each stage's set should not decrease
// from stage 1 to the last stage. Registered with WILL_FAIL: at 2000 points the
// late stages (20 seeds, 0.25 m and 0.125 m balls) cannot hold as many pairs as
// stage 2 produces, so the median peaks at stage 2 and falls afterwards.

#include "regor/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

namespace regor {
namespace {

TEST(StageMonotone, MedianInliersNonDecreasingOverStages) {
  constexpr std::size_t kScenes = 50;
  std::vector<std::vector<double>> per_stage;
  for (std::size_t k = 0; k < kScenes; ++k) {
    SceneSpec spec;
    spec.rng_seed = derive_seed(104, k);
    const auto scene = generate_scene(spec);
    RunConfig cfg;
    cfg.rng_seed = derive_seed(spec.rng_seed, 0x5EED);
    const auto run = run_scene(scene, cfg);
    if (per_stage.size() < run.stage_inliers.size()) per_stage.resize(run.stage_inliers.size());
    for (std::size_t t = 0; t < run.stage_inliers.size(); ++t) {
      per_stage[t].push_back(static_cast<double>(run.stage_inliers[t]));
    }
  }
  std::vector<double> medians;
  for (auto& v : per_stage) {
    std::ranges::nth_element(v, v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2));
    medians.push_back(v[v.size() / 2]);
  }
  for (std::size_t t = 1; t < medians.size(); ++t) {
    EXPECT_GE(medians[t], medians[t - 1]) << "stage " << t << " -> " << t + 1;
  }
}

}  // namespace
}  // namespace regor
