// Acceptance report: one PASS/FAIL line per criterion. Exits 0 once every
// check has run; pass --strict to turn any FAIL into a non-zero exit.

#include "phi_region.hpp"
#include "regor/benchmark.hpp"
#include "regor/cli.hpp"
#include "regor/config.hpp"
#include "regor/consistency.hpp"
#include "regor/errors.hpp"
#include "regor/features.hpp"
#include "regor/geometry.hpp"
#include "regor/io.hpp"
#include "regor/matching.hpp"
#include "regor/pipeline.hpp"
#include "regor/refinement.hpp"
#include "regor/regeneration.hpp"
#include "regor/spatial_index.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace regor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

FeatureSet random_features(std::mt19937_64& rng, std::size_t n, std::size_t d, bool integer) {
  std::vector<float> values(n * d);
  if (integer) {
    std::uniform_int_distribution<int> v(0, 3);
    for (auto& x : values) x = static_cast<float>(v(rng));
  } else {
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (auto& x : values) x = g(rng);
  }
  return FeatureSet(std::move(values), d);
}

using PairSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

PairSet as_set(const CorrespondenceSet& s) {
  PairSet out;
  for (const auto& c : s) out.insert({c.source, c.target});
  return out;
}

// ---- criterion 1 -----------------------------------------------------------

Outcome gmm_contains_mm() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(1, 50), dim(1, 8), kk(1, 5);
  int violations = 0;
  std::size_t mm_total = 0, gmm_total = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng), m = size(rng), d = dim(rng);
    const bool integer = trial % 2 == 0;
    const auto p = random_features(rng, n, d, integer);
    const auto q = random_features(rng, m, d, integer);
    const auto mm = as_set(mutual_match(p, q));
    const auto gmm = as_set(generalized_mutual_match(p, q, kk(rng)));
    mm_total += mm.size();
    gmm_total += gmm.size();
    if (!std::includes(gmm.begin(), gmm.end(), mm.begin(), mm.end()) || gmm.size() < mm.size()) ++violations;
  }
  const double s = seconds_since(t0);
  return {violations == 0 && s < 10.0,
          fmt("violations=%d over 1000 instances, |MM|=%zu |GMM|=%zu, %.2fs (limit 10s)", violations, mm_total,
              gmm_total, s)};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome local_score_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  const ConsistencyParams params{0.1, 0.1, 0.5};
  std::uniform_int_distribution<std::size_t> size(8, 60);
  int built = 0, accepted = 0, violations = 0;
  while (built < 500) {
    const std::size_t n = size(rng);
    const std::size_t inliers = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    const auto region = test::make_phi_region(rng, n, inliers, params);
    if (!region) continue;
    ++built;
    const double score = local_score(ctc_matrix(region->pairs, region->center, params), params.a);
    if (score >= 1.0) {
      ++accepted;
      if (region->inlier_fraction() < params.a) ++violations;
    }
  }
  const double s = seconds_since(t0);
  return {violations == 0 && s < 30.0,
          fmt("violations=%d over %d regions (%d with score >= 1), %.2fs (limit 30s)", violations, built, accepted,
              s)};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome pose_fit_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> size(3, 200);
  double worst_r = 0.0, worst_t = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const RigidTransform truth = test::random_transform(rng, 10.0);
    const auto cloud = test::random_cloud(rng, size(rng), 5.0);
    std::vector<PositionedPair> pairs;
    for (std::size_t i = 0; i < cloud.size(); ++i) pairs.push_back({cloud[i], truth.apply(cloud[i])});
    const auto fit = fit_rigid_transform(pairs);
    worst_r = std::max(worst_r, (fit.rotation() - truth.rotation()).cwiseAbs().maxCoeff());
    worst_t = std::max(worst_t, (fit.translation() - truth.translation()).norm());
  }
  const double s = seconds_since(t0);
  return {worst_r <= 1e-6 && worst_t <= 1e-6 && s < 5.0,
          fmt("max rotation error %.2e, max translation error %.2e, %.2fs (limit 5s)", worst_r, worst_t, s)};
}

// ---- scene runs shared by criteria 4 and 6 ---------------------------------

struct SceneResult {
  bool success = false;
  double inr = 0.0;
  std::size_t in_count = 0;
  std::size_t initial_in_count = 0;
};

RunConfig config_for(std::uint64_t scene_seed, const std::vector<std::string>& ablations) {
  RunConfig cfg;
  cfg.rng_seed = derive_seed(scene_seed, 0x5EED);
  for (const auto& a : ablations) cfg.apply_ablation(a);
  return cfg;
}

SceneResult run_one(const Scene& scene, std::uint64_t scene_seed, const std::vector<std::string>& ablations) {
  SceneResult r;
  try {
    const auto run = run_scene(scene, config_for(scene_seed, ablations));
    r = {run.metrics.success, run.metrics.inr, run.metrics.in_count, run.metrics.initial_in_count};
  } catch (const Error&) {
    // Counted as a failed registration with no inliers.
  }
  return r;
}

struct SceneSet {
  std::vector<Scene> scenes;
  std::vector<std::uint64_t> seeds;
};

SceneSet make_scenes(std::uint64_t base, std::size_t count, const SceneSpec& proto) {
  SceneSet set;
  for (std::size_t k = 0; k < count; ++k) {
    SceneSpec spec = proto;
    spec.rng_seed = derive_seed(base, k);
    set.seeds.push_back(spec.rng_seed);
    set.scenes.push_back(generate_scene(spec));
  }
  return set;
}

std::vector<SceneResult> run_all(const SceneSet& set, const std::vector<std::string>& ablations) {
  std::vector<SceneResult> out;
  for (std::size_t k = 0; k < set.scenes.size(); ++k) out.push_back(run_one(set.scenes[k], set.seeds[k], ablations));
  return out;
}

double success_rate(const std::vector<SceneResult>& rs) {
  double ok = 0;
  for (const auto& r : rs) ok += r.success;
  return ok / static_cast<double>(rs.size());
}

// ---- criterion 4 -----------------------------------------------------------

Outcome regeneration_at_ninety(const std::vector<SceneResult>& full, double secs) {
  std::vector<double> inr;
  for (const auto& r : full) inr.push_back(r.inr);
  const double rr = success_rate(full), med = median(inr);
  return {rr >= 0.90 && med > 3.0 && secs < 300.0,
          fmt("RR=%.3f (>= 0.90), median INR=%.1f%% (> 300%%), %zu scenes, %.1fs (limit 300s)", rr, 100.0 * med,
              full.size(), secs)};
}

// ---- criterion 5 -----------------------------------------------------------

bool baseline_success(const Scene& scene, const RunConfig& cfg) {
  const auto fp = compute_weak_descriptor(scene.source, cfg.descriptor_radius);
  const auto fq = compute_weak_descriptor(scene.target, cfg.descriptor_radius);
  const auto pairs = mutual_match(fp, fq);
  if (pairs.size() < 3) return false;
  try {
    const auto fit = fit_rigid_transform(positioned(pairs.pairs(), scene.source, scene.target));
    const auto& truth = scene.truth.transform;
    return rotation_error(fit.rotation(), truth.rotation()) < cfg.thresholds.rotation_deg &&
           translation_error(fit.translation(), truth.translation()) < cfg.thresholds.translation;
  } catch (const DegenerateInput&) {
    return false;
  }
}

Outcome extreme_outliers() {
  const auto t0 = std::chrono::steady_clock::now();
  SceneSpec proto;
  proto.outlier_ratio = 0.99;
  proto.initial_pair_count = 1000;  // ceil((1 - 0.99) * 1000) = 10 true pairs
  const auto set = make_scenes(105, 50, proto);
  std::size_t pipeline_ok = 0, baseline_ok = 0;
  std::vector<double> final_in, initial_in;
  for (std::size_t k = 0; k < set.scenes.size(); ++k) {
    const auto r = run_one(set.scenes[k], set.seeds[k], {});
    pipeline_ok += r.success;
    final_in.push_back(static_cast<double>(r.in_count));
    initial_in.push_back(static_cast<double>(r.initial_in_count));
    baseline_ok += baseline_success(set.scenes[k], config_for(set.seeds[k], {}));
  }
  const double rr = static_cast<double>(pipeline_ok) / 50.0, rb = static_cast<double>(baseline_ok) / 50.0;
  const double med_final = median(final_in), med_initial = median(initial_in);
  return {rr > rb && med_final > 10.0 * med_initial,
          fmt("RR=%.2f vs baseline RR=%.2f, median final inliers=%.0f vs 10 x initial=%.0f, %.1fs", rr, rb,
              med_final, 10.0 * med_initial, seconds_since(t0))};
}

// ---- criterion 6 -----------------------------------------------------------

struct Paired {
  double mean_full = 0, mean_ablated = 0, agree = 0;
};

Paired compare_inliers(const std::vector<SceneResult>& full, const std::vector<SceneResult>& ablated) {
  Paired p;
  std::vector<double> a, b;
  for (std::size_t k = 0; k < full.size(); ++k) {
    a.push_back(static_cast<double>(full[k].in_count));
    b.push_back(static_cast<double>(ablated[k].in_count));
    p.agree += full[k].in_count >= ablated[k].in_count;
  }
  p.mean_full = mean(a);
  p.mean_ablated = mean(b);
  p.agree /= static_cast<double>(full.size());
  return p;
}

std::vector<Outcome> ablations(const SceneSet& set, const std::vector<SceneResult>& full) {
  std::vector<Outcome> parts;
  const auto inlier_check = [&](const char* label, const std::vector<std::string>& ablation) {
    const auto abl = run_all(set, ablation);
    const auto p = compare_inliers(full, abl);
    parts.push_back({p.mean_full >= p.mean_ablated && p.agree >= 0.8,
                     fmt("%s mean inliers %.1f >= %.1f, agreement %.0f%%", label, p.mean_full, p.mean_ablated,
                         100.0 * p.agree)});
    return abl;
  };
  inlier_check("(a) progressive vs one-stage:", {"progressive=off"});
  inlier_check("(b) GMM vs MM:", {"matching=mm"});
  {
    // GMM against plain NN is reported only; NN is not expected to trail MM.
    const auto p = compare_inliers(full, run_all(set, {"matching=nn"}));
    std::printf("  info: GMM vs NN mean inliers %.1f vs %.1f, GMM >= NN in %.0f%% of scenes\n", p.mean_full,
                p.mean_ablated, 100.0 * p.agree);
  }
  const auto rr_check = [&](const char* label, const std::vector<std::string>& ablation) {
    const auto abl = run_all(set, ablation);
    double agree = 0;
    for (std::size_t k = 0; k < full.size(); ++k) agree += full[k].success >= abl[k].success;
    agree /= static_cast<double>(full.size());
    const double rf = success_rate(full), ra = success_rate(abl);
    parts.push_back({rf > ra && agree >= 0.8,
                     fmt("%s RR %.2f > %.2f, agreement %.0f%%", label, rf, ra, 100.0 * agree)});
  };
  rr_check("(c) without global correction:", {"stages=local_only"});
  rr_check("(c) without local correction:", {"stages=global_only"});
  return parts;
}

// ---- criterion 7 -----------------------------------------------------------

Outcome refinement_improves() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(107);
  const RefinementParams params;
  SceneSpec proto;
  proto.outlier_ratio = 0.0;
  proto.initial_pair_count = 10;
  const auto set = make_scenes(107, 100, proto);
  int improved = 0, lost_count = 0;
  for (const auto& scene : set.scenes) {
    const auto& truth = scene.truth.transform;
    const Vec3 axis = test::random_point(rng).normalized();
    const Vec3 shift = test::random_point(rng).normalized() * 0.05;
    const RigidTransform start(axis_angle(axis, 2.0 * std::numbers::pi / 180.0) * truth.rotation(),
                               truth.translation() + shift);
    const auto out = refine_pose(start, scene.source, scene.target, params);
    const bool re = rotation_error(out.rotation(), truth.rotation()) < rotation_error(start.rotation(), truth.rotation());
    const bool te = translation_error(out.translation(), truth.translation()) <
                    translation_error(start.translation(), truth.translation());
    improved += re && te;
    lost_count += po_tcd_count(out, scene.source, scene.target, params.sigma_d) <
                  po_tcd_count(start, scene.source, scene.target, params.sigma_d);
  }
  return {improved >= 95 && lost_count == 0,
          fmt("RE and TE both reduced in %d/100 (>= 95), PO-TCD count decreased in %d, %.1fs", improved, lost_count,
              seconds_since(t0))};
}

// ---- criterion 8 -----------------------------------------------------------

double feature_dist(const FeatureSet& a, std::size_t i, const FeatureSet& b, std::size_t j) {
  double s = 0;
  for (std::size_t k = 0; k < a.dimension(); ++k) {
    const double d = static_cast<double>(a.row(i)[k]) - static_cast<double>(b.row(j)[k]);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::uint32_t> ranking(const FeatureSet& a, std::size_t i, const FeatureSet& b) {
  std::vector<std::uint32_t> idx(b.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t x, std::uint32_t y) {
    return feature_dist(a, i, b, x) < feature_dist(a, i, b, y);
  });
  return idx;
}

bool spatial_index_instance(std::mt19937_64& rng, int trial) {
  // Quantized coordinates put duplicates and exact ties into most instances.
  std::uniform_int_distribution<int> coord(-8, 8);
  const std::size_t n = 1 + static_cast<std::size_t>(trial) * 3 % 400;
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(0.125 * coord(rng), 0.125 * coord(rng), 0.125 * coord(rng));
  const PointCloud cloud(pts);
  const SpatialIndex index(cloud);
  for (int q = 0; q < 10; ++q) {
    const Vec3 c = q % 2 ? Vec3(0.125 * coord(rng), 0.125 * coord(rng), 0.125 * coord(rng))
                         : test::random_point(rng, -1.2, 1.2);
    const double r = 0.125 * (q + 1);
    std::vector<std::uint32_t> expect;
    double best_sq = INFINITY;
    std::uint32_t best = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const double d = (cloud[i] - c).squaredNorm();
      if (d <= r * r) expect.push_back(i);
      if (d < best_sq) best_sq = d, best = i;
    }
    if (index.radius_neighbors(c, r) != expect) return false;
    const auto nn = index.nearest_neighbor(c);
    if (nn.index != best || nn.distance != std::sqrt(best_sq)) return false;
  }
  return true;
}

bool matching_instance(std::mt19937_64& rng, int trial) {
  std::uniform_int_distribution<std::size_t> size(1, 40), dim(1, 8), kk(1, 5);
  const std::size_t n = size(rng), m = size(rng), d = dim(rng), k = kk(rng);
  const auto p = random_features(rng, n, d, trial % 2 == 0);
  const auto q = random_features(rng, m, d, trial % 2 == 0);
  const auto nn = nn_match(p, q);
  const auto mnn = mnn_match(p, q, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = ranking(p, i, q);
    if (nn.row(i) != std::vector<std::uint32_t>{r[0]}) return false;
    std::vector<std::uint32_t> top(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(std::min(k, m)));
    std::sort(top.begin(), top.end());
    if (mnn.row(i) != top) return false;
  }
  return true;
}

bool sc2_instance(std::mt19937_64& rng, int trial) {
  const std::size_t n = 1 + static_cast<std::size_t>(trial) % 80;
  const double sigma = 0.05 + 0.01 * (trial % 10);
  std::vector<PositionedPair> pairs;
  const RigidTransform truth = test::random_transform(rng, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = test::random_point(rng);
    pairs.push_back({p, i % 3 ? truth.apply(p) : test::random_point(rng)});
  }
  const auto consistent = [&](std::size_t a, std::size_t b) {
    const double dp = (pairs[a].source - pairs[b].source).norm();
    const double dq = (pairs[a].target - pairs[b].target).norm();
    return std::abs(dp - dq) <= sigma;
  };
  const auto s = second_order_matrix(pairs, sigma);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      std::uint32_t expect = 1;
      if (a != b) {
        expect = 0;
        if (consistent(a, b)) {
          for (std::size_t c = 0; c < n; ++c) expect += consistent(a, c) && consistent(c, b);
        }
      }
      if (s(a, b) != expect) return false;
    }
  }
  return true;
}

bool merge_instance(std::mt19937_64& rng, int trial) {
  std::uniform_int_distribution<std::uint32_t> idx(0, 40);
  std::vector<CorrespondenceSet> sets;
  std::set<std::pair<std::uint32_t, std::uint32_t>> expect;
  for (int s = 0; s < 1 + trial % 7; ++s) {
    std::vector<Correspondence> v;
    for (int i = 0; i < trial % 25; ++i) {
      v.push_back({idx(rng), idx(rng)});
      expect.insert({v.back().source, v.back().target});
    }
    sets.emplace_back(v);
  }
  const auto merged = merge_correspondences(sets);
  if (merged.size() != expect.size()) return false;
  auto it = expect.begin();
  for (const auto& c : merged) {
    if (c.source != it->first || c.target != it->second) return false;
    ++it;
  }
  return true;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(108);
  const std::vector<std::pair<const char*, std::function<bool(std::mt19937_64&, int)>>> kernels{
      {"SpatialIndex", spatial_index_instance},
      {"nn/mnn", matching_instance},
      {"second_order_matrix", sc2_instance},
      {"merge", merge_instance}};
  bool all = true;
  std::string detail;
  for (const auto& [name, check] : kernels) {
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) mismatches += !check(rng, trial);
    all = all && mismatches == 0;
    detail += fmt("%s%s %d/200 mismatches", detail.empty() ? "" : ", ", name, mismatches);
  }
  return {all, detail};
}

// ---- criterion 9 -----------------------------------------------------------

Outcome benchmark_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "regor_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_file(dir / "spec.json",
                  R"({"outlier_ratios": [0.8, 0.9, 0.95, 0.99], "inlier_counts": [10, 50], "scenes_per_point": 2,
                      "seed": 9})");
  std::ostringstream out, err;
  const auto run = [&](const char* sub) {
    return run_cli({"benchmark", "--spec", (dir / "spec.json").string(), "--out", (dir / sub).string()}, out, err);
  };
  const int a = run("a"), b = run("b");
  bool same = false;
  std::size_t bytes = 0;
  if (a == 0 && b == 0) {
    const auto x = read_text_file(dir / "a" / "summary.csv");
    same = x == read_text_file(dir / "b" / "summary.csv");
    bytes = x.size();
  }
  fs::remove_all(dir);
  return {same, fmt("exit codes %d/%d, summary.csv %s (%zu bytes), %.1fs", a, b, same ? "identical" : "differs",
                    bytes, seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  int failures = 0;
  const auto report = [&](int id, const Outcome& o) {
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };

  report(1, gmm_contains_mm());
  report(2, local_score_soundness());
  report(3, pose_fit_exactness());

  const auto t4 = std::chrono::steady_clock::now();
  const auto set = make_scenes(104, 50, SceneSpec{});
  const auto full = run_all(set, {});
  report(4, regeneration_at_ninety(full, seconds_since(t4)));
  report(5, extreme_outliers());

  const auto parts = ablations(set, full);
  Outcome six{true, ""};
  for (const auto& p : parts) {
    six.pass = six.pass && p.pass;
    six.detail += (six.detail.empty() ? "" : "; ") + p.detail + (p.pass ? "" : " [fail]");
  }
  report(6, six);
  report(7, refinement_improves());
  report(8, oracle_equivalence());
  report(9, benchmark_determinism());

  std::printf("%d of 9 criteria failed\n", failures);
  return strict && failures ? 1 : 0;
}
