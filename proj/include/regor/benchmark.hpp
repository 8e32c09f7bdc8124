#pragma once

#include "regor/config.hpp"
#include "regor/evaluation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace regor {

/// A sweep over outlier ratios x initial inlier counts. Each grid point runs
/// `scenes_per_point` scenes generated from `scene`, with
/// initial_pair_count = ceil(inliers / (1 - outlier_ratio)).
struct BenchmarkSpec {
  std::vector<double> outlier_ratios;
  std::vector<std::size_t> inlier_counts;
  std::size_t scenes_per_point = 1;
  SceneSpec scene;
  RunConfig config;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec.
  void validate() const;
};

BenchmarkSpec parse_benchmark_spec(const std::string& json_text);
SceneSpec parse_scene_spec(const std::string& json_text);

struct BenchmarkRecord {
  std::size_t grid_index = 0;
  std::size_t scene_index = 0;
  double outlier_ratio = 0.0;
  std::size_t inlier_count = 0;
  std::size_t initial_pair_count = 0;
  std::uint64_t scene_seed = 0;
  PairMetrics metrics;
  bool collapsed = false;
  std::string error;  // set when the pipeline threw; the pair counts as a failure
  std::vector<std::size_t> stage_inliers;
  double seconds = 0.0;
};

/// Runs every scene (concurrently, bounded by REGOR_THREADS) and returns the
/// records in grid order.
std::vector<BenchmarkRecord> run_benchmark(const BenchmarkSpec& spec);

/// Writes pairs.jsonl, summary.csv, summary.json, stage_inliers.csv and
/// rr_vs_outlier.csv. Only pairs.jsonl carries timing; everything else is a
/// pure function of the spec.
void write_benchmark_outputs(const std::filesystem::path& dir, const BenchmarkSpec& spec,
                             const std::vector<BenchmarkRecord>& records);

}  // namespace regor
