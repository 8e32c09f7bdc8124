#pragma once

#include "regor/evaluation.hpp"
#include "regor/refinement.hpp"
#include "regor/regeneration.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace regor {

enum class StageSelection { kLocalOnly, kGlobalOnly, kBoth };

struct RunConfig {
  IterationSchedule schedule;
  RefinementParams refinement;
  bool refine = true;
  SuccessThresholds thresholds;
  double inlier_tolerance = 0.1;
  double descriptor_radius = 0.15;
  std::uint64_t rng_seed = 0;
  bool bootstrap = false;

  MatchingMode matching = MatchingMode::kGeneralizedMutual;
  LocalConsistency consistency = LocalConsistency::kCenterAware;
  StageSelection stages = StageSelection::kBoth;
  bool progressive = true;

  PipelineOptions pipeline_options() const;
  /// Throws InvalidConfig on any out-of-range value.
  void validate() const;
  /// Applies one `key=value` ablation override (matching, consistency, stages, progressive).
  void apply_ablation(std::string_view assignment);
};

/// Parses a JSON config; every section is optional, unknown keys are rejected.
/// Throws ParseError for malformed JSON and InvalidConfig for bad content.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

StageSelection parse_stage_selection(std::string_view name);
std::string_view to_string(StageSelection s);

}  // namespace regor
