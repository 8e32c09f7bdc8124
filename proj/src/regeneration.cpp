#include "regor/regeneration.hpp"

#include "regor/errors.hpp"
#include "regor/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

namespace regor {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (a + 1) + 0xC2B2AE3D27D4EB4Full * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void IterationSchedule::validate() const {
  if (k0 == 0 || s0 == 0 || k_gmm == 0 || s_min == 0) throw InvalidConfig("schedule counts must be positive");
  if (!(r0 > 0.0)) throw InvalidConfig("r0 must be positive");
  if (!(omega_k > 0.0) || !(omega_s > 0.0)) throw InvalidConfig("omega_k and omega_s must be positive");
  if (!(omega_r > 0.0 && omega_r <= 1.0)) throw InvalidConfig("omega_r must lie in (0, 1]");
  if (iterations < 1) throw InvalidConfig("iterations must be at least 1");
  if (min_region_points == 0) throw InvalidConfig("min_region_points must be positive");
  if (global_cap < 3) throw InvalidConfig("global_cap must be at least 3");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw InvalidConfig("top_fraction must lie in (0, 1]");
  params.validate();
}

std::size_t IterationSchedule::points_at(int stage) const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(k0) * std::pow(omega_k, stage)));
}

double IterationSchedule::radius_at(int stage) const { return r0 * std::pow(omega_r, stage); }

std::size_t IterationSchedule::seeds_at(int stage) const {
  const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(s0) * std::pow(omega_s, stage)));
  return std::max(s, s_min);
}

namespace {

// Partial Fisher-Yates: the first `count` entries become a uniform sample.
template <typename T>
void shuffle_prefix(std::vector<T>& items, std::size_t count, std::mt19937_64& rng) {
  count = std::min(count, items.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
}

std::vector<std::uint32_t> cap_side(std::vector<std::uint32_t> indices, std::uint32_t keep,
                                    std::size_t cap, std::mt19937_64& rng) {
  if (indices.size() <= cap) return indices;
  std::erase(indices, keep);
  shuffle_prefix(indices, cap - 1, rng);
  indices.resize(cap - 1);
  indices.push_back(keep);
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::uint32_t nearest_among(const Vec3& query, const PointCloud& cloud,
                            std::span<const std::uint32_t> candidates, double& distance) {
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_index = candidates.front();
  for (auto c : candidates) {  // ascending, so strict < keeps the smallest index on ties
    const double d = (cloud[c] - query).squaredNorm();
    if (d < best) {
      best = d;
      best_index = c;
    }
  }
  distance = std::sqrt(best);
  return best_index;
}

std::vector<std::uint32_t> distinct_sources(const CorrespondenceSet& set) {
  std::vector<std::uint32_t> out;
  out.reserve(set.size());
  for (const auto& c : set) out.push_back(c.source);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

CorrespondenceSet sample_seeds(const CorrespondenceSet& previous, std::size_t count,
                               std::uint64_t rng_seed) {
  if (previous.empty()) throw EmptyInput("cannot sample seeds from an empty correspondence set");
  std::vector<Correspondence> pool(previous.begin(), previous.end());
  std::mt19937_64 rng(rng_seed);
  shuffle_prefix(pool, count, rng);
  pool.resize(std::min(count, pool.size()));
  std::sort(pool.begin(), pool.end());
  return CorrespondenceSet(std::move(pool), previous.stage());
}

std::vector<LocalRegion> group_local_regions(const CorrespondenceSet& seeds, const SpatialIndex& source,
                                             const SpatialIndex& target, double radius,
                                             std::size_t k_cap, std::uint64_t rng_seed,
                                             std::size_t min_points) {
  if (!(radius > 0.0)) throw InvalidArgument("region radius must be positive");
  if (k_cap == 0) throw InvalidArgument("region cap must be positive");
  std::vector<std::optional<LocalRegion>> slots(seeds.size());
  const auto n = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    const Correspondence seed = seeds[i];
    std::mt19937_64 rng(derive_seed(rng_seed, static_cast<std::uint64_t>(i)));
    auto src = source.radius_neighbors(source.cloud()[seed.source], radius);
    auto dst = target.radius_neighbors(target.cloud()[seed.target], radius);
    src = cap_side(std::move(src), seed.source, k_cap, rng);
    dst = cap_side(std::move(dst), seed.target, k_cap, rng);
    if (src.size() < min_points || dst.size() < min_points) continue;
    slots[i] = LocalRegion{seed, std::move(src), std::move(dst)};
  }
  std::vector<LocalRegion> regions;
  for (auto& s : slots) {
    if (s) regions.push_back(std::move(*s));
  }
  return regions;
}

CorrespondenceSet local_rematch(const LocalRegion& region, const FeatureSet& source_features,
                                const FeatureSet& target_features, std::size_t k_gmm, MatchingMode mode) {
  const auto fp = source_features.subset(region.source_indices);
  const auto fq = target_features.subset(region.target_indices);
  const auto local = match_features(fp, fq, mode, k_gmm);
  std::vector<Correspondence> out;
  out.reserve(local.size());
  for (const auto& c : local) out.push_back({region.source_indices[c.source], region.target_indices[c.target]});
  return CorrespondenceSet(std::move(out));
}

LocalCorrection local_correct(const CorrespondenceSet& local, const LocalRegion& region,
                              const PointCloud& source, const PointCloud& target,
                              const ConsistencyParams& params, LocalConsistency mode,
                              double top_fraction) {
  LocalCorrection result;
  if (local.empty()) return result;
  const auto pos = positioned(local.pairs(), source, target);
  const PositionedPair center{source[region.seed.source], target[region.seed.target]};
  const ConsistencyMatrix s = mode == LocalConsistency::kCenterAware ? ctc_matrix(pos, center, params)
                                                                      : first_order_matrix(pos, params.sigma);
  result.score = local_score(s, params.a);
  if (result.score < 1.0 || local.size() < 3) return result;

  RigidTransform pose;
  try {
    const auto chosen = select_top_consistent(s, top_consistent_count(local.size(), top_fraction));
    std::vector<PositionedPair> seeds;
    seeds.reserve(chosen.size());
    for (auto j : chosen) seeds.push_back(pos[j]);
    pose = fit_rigid_transform(seeds);
  } catch (const TooFewConsistent&) {
    return result;
  } catch (const DegenerateInput&) {
    return result;
  }

  std::vector<Correspondence> out;
  for (auto p : distinct_sources(local)) {
    double dist = 0.0;
    const auto q = nearest_among(pose.apply(source[p]), target, region.target_indices, dist);
    if (dist <= params.sigma_d) out.push_back({p, q});
  }
  result.accepted = true;
  result.pairs = CorrespondenceSet(std::move(out));
  return result;
}

CorrespondenceSet merge_correspondences(std::span<const CorrespondenceSet> locals) {
  std::unordered_set<std::uint64_t> table;
  std::size_t total = 0;
  for (const auto& l : locals) total += l.size();
  table.reserve(total * 2);
  for (const auto& l : locals) {
    for (const auto& c : l) table.insert(pair_key(c));
  }
  std::vector<std::uint64_t> keys(table.begin(), table.end());
  std::sort(keys.begin(), keys.end());
  std::vector<Correspondence> out;
  out.reserve(keys.size());
  for (auto k : keys) out.push_back({static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k)});
  return CorrespondenceSet(std::move(out));
}

GlobalCorrection global_correct(const CorrespondenceSet& set, const PointCloud& source,
                                const SpatialIndex& target, const ConsistencyParams& params,
                                std::size_t cap, double top_fraction, std::uint64_t rng_seed) {
  if (set.size() < 3) throw InvalidArgument("global correction needs at least 3 correspondences");
  const PointCloud& target_cloud = target.cloud();

  std::vector<Correspondence> sample(set.begin(), set.end());
  if (sample.size() > cap) {
    std::mt19937_64 rng(rng_seed);
    shuffle_prefix(sample, cap, rng);
    sample.resize(cap);
    std::sort(sample.begin(), sample.end());
  }
  const auto pos = positioned(sample, source, target_cloud);
  const ConsistencyMatrix sc2 = second_order_matrix(pos, params.sigma);

  GlobalCorrection result{set, RigidTransform::identity(), true};
  try {
    const auto chosen = select_top_consistent(sc2, top_consistent_count(pos.size(), top_fraction));
    std::vector<PositionedPair> seeds;
    seeds.reserve(chosen.size());
    for (auto j : chosen) seeds.push_back(pos[j]);
    result.pose = fit_rigid_transform(seeds);
  } catch (const TooFewConsistent&) {
    return result;
  } catch (const DegenerateInput&) {
    return result;
  }

  const auto sources = distinct_sources(set);
  std::vector<std::optional<Correspondence>> snapped(sources.size());
  const auto n = static_cast<std::int64_t>(sources.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto nn = target.nearest_neighbor(result.pose.apply(source[sources[i]]));
    if (nn.distance <= params.sigma_d) snapped[i] = Correspondence{sources[i], nn.index};
  }
  std::vector<Correspondence> out;
  for (const auto& s : snapped) {
    if (s) out.push_back(*s);
  }
  result.pairs = CorrespondenceSet(std::move(out), set.stage());
  result.fallback = false;
  return result;
}

RegenerationResult regenerate(const PointCloud& source, const PointCloud& target,
                              const FeatureSet& source_features, const FeatureSet& target_features,
                              const CorrespondenceSet& initial, const IterationSchedule& schedule,
                              const PipelineOptions& options, std::uint64_t rng_seed) {
  schedule.validate();
  require_matching(source_features, source);
  require_matching(target_features, target);
  if (initial.empty()) throw EmptyInput("initial correspondence set is empty");
  initial.validate(source.size(), target.size());

  const SpatialIndex source_index(source);
  const SpatialIndex target_index(target);
  const int stages = options.progressive ? schedule.iterations : 1;

  RegenerationResult result;
  result.trace.options = options;
  CorrespondenceSet current = initial.sorted();

  for (int t = 0; t < stages; ++t) {
    const auto started = std::chrono::steady_clock::now();
    StageRecord record;
    record.stage = t;

    const auto seeds = sample_seeds(current, schedule.seeds_at(t), derive_seed(rng_seed, 2 * t));
    record.seed_count = seeds.size();
    const auto regions = group_local_regions(seeds, source_index, target_index, schedule.radius_at(t),
                                             schedule.points_at(t), derive_seed(rng_seed, 2 * t + 1),
                                             schedule.min_region_points);
    record.region_count = regions.size();

    std::vector<LocalCorrection> locals(regions.size());
    const auto nr = static_cast<std::int64_t>(regions.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < nr; ++i) {
      auto matched = local_rematch(regions[i], source_features, target_features, schedule.k_gmm,
                                   options.matching);
      if (options.local_correction) {
        locals[i] = local_correct(matched, regions[i], source, target, schedule.params,
                                  options.consistency, schedule.top_fraction);
      } else {
        locals[i].accepted = !matched.empty();
        locals[i].pairs = std::move(matched);
      }
    }

    std::vector<CorrespondenceSet> accepted;
    double score_sum = 0.0;
    for (auto& l : locals) {
      score_sum += l.score;
      if (l.accepted && !l.pairs.empty()) accepted.push_back(std::move(l.pairs));
    }
    record.accepted_regions = accepted.size();
    record.mean_local_score = locals.empty() ? 0.0 : score_sum / static_cast<double>(locals.size());

    if (accepted.empty()) {
      record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      result.trace.stages.push_back(record);
      result.trace.collapsed = true;
      result.trace.collapse_stage = t;
      break;
    }

    CorrespondenceSet merged = merge_correspondences(accepted);
    record.merged_count = merged.size();
    CorrespondenceSet next = merged;
    if (options.global_correction && merged.size() >= 3) {
      auto corrected = global_correct(merged, source, target_index, schedule.params, schedule.global_cap,
                                      schedule.top_fraction, derive_seed(rng_seed, 2 * t, 1));
      record.global_fallback = corrected.fallback;
      if (!corrected.pairs.empty()) next = std::move(corrected.pairs);
    }
    record.corrected_count = next.size();
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.trace.stages.push_back(record);
    current = CorrespondenceSet(std::vector<Correspondence>(next.begin(), next.end()), t + 1);
    result.history.push_back(current);
  }

  result.correspondences = current;
  if (current.size() >= 3) {
    try {
      result.transform = fit_rigid_transform(positioned(current.pairs(), source, target));
      result.transform_valid = true;
    } catch (const DegenerateInput&) {
      result.transform_valid = false;
    }
  }
  return result;
}

CorrespondenceSet bootstrap_correspondences(const PointCloud& source, const PointCloud& target,
                                            const FeatureSet& source_features,
                                            const FeatureSet& target_features,
                                            const IterationSchedule& schedule, std::uint64_t rng_seed) {
  require_matching(source_features, source);
  require_matching(target_features, target);
  const auto matched = match_features(source_features, target_features, MatchingMode::kNearest, 1);
  if (matched.size() < 3) return matched;
  const SpatialIndex target_index(target);
  auto corrected = global_correct(matched, source, target_index, schedule.params, schedule.global_cap,
                                  schedule.top_fraction, derive_seed(rng_seed, 0xB007));
  return corrected.pairs.empty() ? matched : corrected.pairs;
}

}  // namespace regor
