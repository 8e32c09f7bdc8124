#include "regor/benchmark.hpp"

#include "regor/errors.hpp"
#include "regor/io.hpp"
#include "regor/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace regor {

using nlohmann::json;

namespace {

std::size_t pair_count_for(std::size_t inliers, double outlier_ratio) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(inliers) / (1.0 - outlier_ratio) - 1e-9));
}

SceneSpec scene_from_json(const json& j) {
  if (!j.is_object()) throw InvalidSpec("scene must be an object");
  SceneSpec s;
  for (const auto& [key, v] : j.items()) {
    if (!v.is_number()) throw InvalidSpec("scene." + key + " must be a number");
    if (key == "point_count") s.point_count = v.get<std::size_t>();
    else if (key == "overlap_fraction") s.overlap_fraction = v.get<double>();
    else if (key == "noise_sigma") s.noise_sigma = v.get<double>();
    else if (key == "outlier_ratio") s.outlier_ratio = v.get<double>();
    else if (key == "initial_pair_count") s.initial_pair_count = v.get<std::size_t>();
    else if (key == "max_rotation_deg") s.max_rotation_deg = v.get<double>();
    else if (key == "max_translation") s.max_translation = v.get<double>();
    else if (key == "scale") s.scale = v.get<double>();
    else if (key == "inlier_tolerance") s.inlier_tolerance = v.get<double>();
    else if (key == "rng_seed") s.rng_seed = v.get<std::uint64_t>();
    else throw InvalidSpec("unknown scene key '" + key + "'");
  }
  return s;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void BenchmarkSpec::validate() const {
  if (outlier_ratios.empty() || inlier_counts.empty()) throw InvalidSpec("benchmark grid must be non-empty");
  if (scenes_per_point == 0) throw InvalidSpec("scenes_per_point must be positive");
  for (double r : outlier_ratios) {
    if (!(r >= 0.0 && r < 1.0)) throw InvalidSpec("outlier_ratio must lie in [0, 1), got " + fixed(r));
  }
  for (auto n : inlier_counts) {
    if (n == 0) throw InvalidSpec("inlier counts must be positive");
  }
  SceneSpec probe = scene;
  probe.outlier_ratio = outlier_ratios.front();
  probe.initial_pair_count = pair_count_for(inlier_counts.front(), probe.outlier_ratio);
  probe.validate();
  try {
    config.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidSpec(std::string("config: ") + e.what());
  }
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  auto s = scene_from_json(parse_json(json_text, "scene spec"));
  s.validate();
  return s;
}

BenchmarkSpec parse_benchmark_spec(const std::string& json_text) {
  const json root = parse_json(json_text, "benchmark spec");
  if (!root.is_object()) throw InvalidSpec("benchmark spec must be an object");
  BenchmarkSpec spec;
  for (const auto& [key, v] : root.items()) {
    if (key == "outlier_ratios") {
      if (!v.is_array()) throw InvalidSpec("outlier_ratios must be an array");
      for (const auto& x : v) {
        if (!x.is_number()) throw InvalidSpec("outlier_ratios must hold numbers");
        spec.outlier_ratios.push_back(x.get<double>());
      }
    } else if (key == "inlier_counts") {
      if (!v.is_array()) throw InvalidSpec("inlier_counts must be an array");
      for (const auto& x : v) {
        if (!x.is_number_unsigned()) throw InvalidSpec("inlier_counts must hold non-negative integers");
        spec.inlier_counts.push_back(x.get<std::size_t>());
      }
    } else if (key == "scenes_per_point") {
      if (!v.is_number_unsigned()) throw InvalidSpec("scenes_per_point must be a positive integer");
      spec.scenes_per_point = v.get<std::size_t>();
    } else if (key == "scene") {
      spec.scene = scene_from_json(v);
    } else if (key == "config") {
      try {
        spec.config = parse_run_config(v.dump());
      } catch (const InvalidConfig& e) {
        throw InvalidSpec(std::string("config: ") + e.what());
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw InvalidSpec("seed must be a non-negative integer");
      spec.seed = v.get<std::uint64_t>();
    } else {
      throw InvalidSpec("unknown benchmark key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::vector<BenchmarkRecord> run_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  std::vector<BenchmarkRecord> records;
  for (std::size_t r = 0; r < spec.outlier_ratios.size(); ++r) {
    for (std::size_t c = 0; c < spec.inlier_counts.size(); ++c) {
      for (std::size_t k = 0; k < spec.scenes_per_point; ++k) {
        BenchmarkRecord rec;
        rec.grid_index = r * spec.inlier_counts.size() + c;
        rec.scene_index = k;
        rec.outlier_ratio = spec.outlier_ratios[r];
        rec.inlier_count = spec.inlier_counts[c];
        rec.initial_pair_count = pair_count_for(rec.inlier_count, rec.outlier_ratio);
        rec.scene_seed = derive_seed(spec.seed, rec.grid_index, k);
        records.push_back(rec);
      }
    }
  }

  std::vector<std::string> errors(records.size());
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& rec = records[i];
    const auto started = std::chrono::steady_clock::now();
    SceneSpec s = spec.scene;
    s.outlier_ratio = rec.outlier_ratio;
    s.initial_pair_count = rec.initial_pair_count;
    s.rng_seed = rec.scene_seed;
    std::optional<Scene> scene;
    try {
      scene = generate_scene(s);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      continue;
    }
    try {
      RunConfig cfg = spec.config;
      cfg.rng_seed = derive_seed(rec.scene_seed, 0x5EED);
      const SceneRun run = run_scene(*scene, cfg);
      rec.metrics = run.metrics;
      rec.collapsed = run.output.regeneration.trace.collapsed;
      rec.stage_inliers = run.stage_inliers;
    } catch (const Error& e) {
      // A failed registration is a data point, not a fault.
      rec.error = e.what();
      rec.metrics.success = false;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw InvalidSpec("benchmark scene failed: " + e);
  }
  return records;
}

void write_benchmark_outputs(const std::filesystem::path& dir, const BenchmarkSpec& spec,
                             const std::vector<BenchmarkRecord>& records) {
  std::filesystem::create_directories(dir);

  std::ostringstream jsonl;
  for (const auto& r : records) {
    const auto& m = r.metrics;
    json j{{"grid_index", r.grid_index},
           {"scene_index", r.scene_index},
           {"outlier_ratio", r.outlier_ratio},
           {"inlier_count", r.inlier_count},
           {"initial_pair_count", r.initial_pair_count},
           {"scene_seed", r.scene_seed},
           {"re", m.re},
           {"te", m.te},
           {"ip", m.ip},
           {"in_count", m.in_count},
           {"initial_in_count", m.initial_in_count},
           {"initial_ip", m.initial_ip},
           {"inr", m.inr},
           {"success", m.success},
           {"collapsed", r.collapsed},
           {"error", r.error},
           {"stage_inliers", r.stage_inliers},
           {"seconds", r.seconds}};
    jsonl << j.dump() << '\n';
  }
  write_text_file(dir / "pairs.jsonl", jsonl.str());

  std::ostringstream csv;
  csv << "outlier_ratio,inlier_count,pairs,rr,mean_re,mean_te,mean_ip,mean_in,mean_inr,median_inr,fmr\n";
  json summary = json::array();
  std::ostringstream stage_csv;
  stage_csv << "outlier_ratio,inlier_count,stage,median_inliers,mean_inliers\n";
  const std::size_t grid = spec.outlier_ratios.size() * spec.inlier_counts.size();
  for (std::size_t g = 0; g < grid; ++g) {
    std::vector<PairMetrics> ms;
    std::vector<double> inr;
    std::map<std::size_t, std::vector<double>> per_stage;
    double ratio = 0.0;
    std::size_t inliers = 0;
    for (const auto& r : records) {
      if (r.grid_index != g) continue;
      ms.push_back(r.metrics);
      inr.push_back(r.metrics.inr);
      ratio = r.outlier_ratio;
      inliers = r.inlier_count;
      per_stage[0].push_back(static_cast<double>(r.metrics.initial_in_count));
      for (std::size_t t = 0; t < r.stage_inliers.size(); ++t) {
        per_stage[t + 1].push_back(static_cast<double>(r.stage_inliers[t]));
      }
    }
    const auto d = dataset_metrics(ms);
    csv << fixed(ratio) << ',' << inliers << ',' << d.pairs << ',' << fixed(d.rr) << ',' << fixed(d.mean_re) << ','
        << fixed(d.mean_te) << ',' << fixed(d.mean_ip) << ',' << fixed(d.mean_in) << ',' << fixed(d.mean_inr) << ','
        << fixed(median(inr)) << ',' << fixed(d.fmr) << '\n';
    summary.push_back({{"outlier_ratio", ratio},
                       {"inlier_count", inliers},
                       {"pairs", d.pairs},
                       {"rr", d.rr},
                       {"mean_re", d.mean_re},
                       {"mean_te", d.mean_te},
                       {"mean_ip", d.mean_ip},
                       {"mean_in", d.mean_in},
                       {"mean_inr", d.mean_inr},
                       {"median_inr", median(inr)},
                       {"fmr", d.fmr}});
    for (const auto& [stage, values] : per_stage) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      stage_csv << fixed(ratio) << ',' << inliers << ',' << stage << ',' << fixed(median(values)) << ','
                << fixed(mean) << '\n';
    }
  }
  write_text_file(dir / "summary.csv", csv.str());
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  write_text_file(dir / "stage_inliers.csv", stage_csv.str());

  std::ostringstream rr;
  rr << "outlier_ratio,pairs,rr\n";
  for (double ratio : spec.outlier_ratios) {
    std::size_t total = 0, ok = 0;
    for (const auto& r : records) {
      if (r.outlier_ratio != ratio) continue;
      ++total;
      ok += r.metrics.success ? 1 : 0;
    }
    rr << fixed(ratio) << ',' << total << ',' << fixed(static_cast<double>(ok) / static_cast<double>(total)) << '\n';
  }
  write_text_file(dir / "rr_vs_outlier.csv", rr.str());
}

}  // namespace regor
