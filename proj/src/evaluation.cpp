#include "regor/evaluation.hpp"

#include "regor/errors.hpp"
#include "regor/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_set>

namespace regor {

double rotation_error(const Mat3& estimate, const Mat3& truth) {
  const double c = std::clamp(((estimate.transpose() * truth).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double translation_error(const Vec3& estimate, const Vec3& truth) { return (estimate - truth).norm(); }

bool is_inlier(const PositionedPair& pair, const GroundTruth& gt) {
  return (gt.transform.apply(pair.source) - pair.target).norm() <= gt.inlier_tolerance;
}

std::size_t count_inliers(std::span<const PositionedPair> pairs, const GroundTruth& gt) {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [&](const PositionedPair& p) { return is_inlier(p, gt); }));
}

PairMetrics pair_metrics(std::span<const PositionedPair> initial, std::span<const PositionedPair> final_pairs,
                         const RigidTransform& estimate, const GroundTruth& gt,
                         const SuccessThresholds& thresholds) {
  PairMetrics m;
  m.re = rotation_error(estimate.rotation(), gt.transform.rotation());
  m.te = translation_error(estimate.translation(), gt.transform.translation());
  m.success = m.te < thresholds.translation && m.re < thresholds.rotation_deg;
  m.in_count = count_inliers(final_pairs, gt);
  m.ip = final_pairs.empty() ? 0.0 : static_cast<double>(m.in_count) / static_cast<double>(final_pairs.size());
  m.initial_in_count = count_inliers(initial, gt);
  m.initial_ip =
      initial.empty() ? 0.0 : static_cast<double>(m.initial_in_count) / static_cast<double>(initial.size());
  m.inr = m.initial_in_count == 0 ? static_cast<double>(m.in_count)
                                  : static_cast<double>(m.in_count) / static_cast<double>(m.initial_in_count);
  return m;
}

DatasetMetrics dataset_metrics(std::span<const PairMetrics> per_pair) {
  if (per_pair.empty()) throw EmptyDataset("no pair metrics to summarize");
  DatasetMetrics d;
  d.pairs = per_pair.size();
  std::size_t successes = 0;
  std::size_t matched = 0;
  for (const auto& m : per_pair) {
    if (m.success) {
      ++successes;
      d.mean_re += m.re;
      d.mean_te += m.te;
    }
    d.mean_ip += m.ip;
    d.mean_in += static_cast<double>(m.in_count);
    d.mean_inr += m.inr;
    if (m.initial_ip >= 0.05) ++matched;
  }
  const auto h = static_cast<double>(per_pair.size());
  d.rr = static_cast<double>(successes) / h;
  if (successes > 0) {
    d.mean_re /= static_cast<double>(successes);
    d.mean_te /= static_cast<double>(successes);
  }
  d.mean_ip /= h;
  d.mean_in /= h;
  d.mean_inr /= h;
  d.fmr = static_cast<double>(matched) / h;
  return d;
}

void SceneSpec::validate() const {
  if (point_count < 10) throw InvalidSpec("point_count must be at least 10");
  if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0)) throw InvalidSpec("overlap_fraction must lie in (0, 1]");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidSpec("noise_sigma must be non-negative");
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) throw InvalidSpec("outlier_ratio must lie in [0, 1)");
  if (initial_pair_count == 0) throw InvalidSpec("initial_pair_count must be positive");
  if (!(max_rotation_deg >= 0.0 && max_rotation_deg <= 180.0)) throw InvalidSpec("max_rotation_deg must lie in [0, 180]");
  if (!(max_translation >= 0.0) || !std::isfinite(max_translation)) throw InvalidSpec("max_translation must be non-negative");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidSpec("scale must be positive");
  if (!(inlier_tolerance > 0.0)) throw InvalidSpec("inlier_tolerance must be positive");
}

std::size_t SceneSpec::true_pair_count() const {
  // The epsilon keeps e.g. (1 - 0.99) * 1000 from rounding up to 11.
  return static_cast<std::size_t>(std::ceil((1.0 - outlier_ratio) * static_cast<double>(initial_pair_count) - 1e-9));
}

namespace {

using Rng = std::mt19937_64;

Vec3 unit_vector(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

Mat3 random_rotation(Rng& rng, double max_deg) {
  std::uniform_real_distribution<double> angle(0.0, max_deg * std::numbers::pi / 180.0);
  const Vec3 axis = unit_vector(rng);
  return axis_angle(axis, angle(rng));
}

struct Surface {
  enum Kind { kPlane, kEllipsoid } kind;
  Vec3 center;
  Mat3 frame;
  Vec3 extent;  // half-sides for planes (z unused), semi-axes for ellipsoids
  double area;
};

std::vector<Surface> make_world(double s, Rng& rng) {
  std::uniform_real_distribution<double> pos(-s, s);
  std::uniform_real_distribution<double> side(0.3 * s, 0.8 * s);
  std::uniform_real_distribution<double> axis(0.15 * s, 0.4 * s);
  std::vector<Surface> out;
  for (int i = 0; i < 5; ++i) {
    Surface p{Surface::kPlane, Vec3(pos(rng), pos(rng), pos(rng)), random_rotation(rng, 180.0),
              Vec3(side(rng), side(rng), 0.0), 0.0};
    p.area = 4.0 * p.extent.x() * p.extent.y();
    out.push_back(p);
  }
  for (int i = 0; i < 4; ++i) {
    Surface e{Surface::kEllipsoid, Vec3(pos(rng), pos(rng), pos(rng)), random_rotation(rng, 180.0),
              Vec3(axis(rng), axis(rng), axis(rng)), 0.0};
    // Knud Thomsen's approximation.
    const double p = 1.6075;
    const double a = std::pow(e.extent.x(), p), b = std::pow(e.extent.y(), p), c = std::pow(e.extent.z(), p);
    e.area = 4.0 * std::numbers::pi * std::pow((a * b + a * c + b * c) / 3.0, 1.0 / p);
    out.push_back(e);
  }
  return out;
}

Vec3 sample_surface(const Surface& s, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (s.kind == Surface::kPlane) {
    return s.center + s.frame * Vec3(u(rng) * s.extent.x(), u(rng) * s.extent.y(), 0.0);
  }
  // Area-uniform on an ellipsoid by rejection from the sphere mapping.
  const double max_scale = s.extent.maxCoeff() * s.extent.maxCoeff();
  std::uniform_real_distribution<double> accept(0.0, 1.0);
  for (;;) {
    const Vec3 d = unit_vector(rng);
    const Vec3 scaled(d.x() / s.extent.x(), d.y() / s.extent.y(), d.z() / s.extent.z());
    const double g = s.extent.prod() * scaled.norm();
    if (accept(rng) * max_scale <= g) return s.center + s.frame * d.cwiseProduct(s.extent);
  }
}

Vec3 truncated_noise(double sigma, Rng& rng) {
  if (sigma == 0.0) return Vec3::Zero();
  std::normal_distribution<double> g(0.0, sigma / 2.0);
  for (;;) {
    const Vec3 n(g(rng), g(rng), g(rng));
    if (n.norm() <= sigma) return n;
  }
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);

  const auto surfaces = make_world(spec.scale, rng);
  std::vector<double> areas;
  for (const auto& s : surfaces) areas.push_back(s.area);
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());

  const std::size_t n = spec.point_count;
  const auto overlap = static_cast<std::size_t>(std::llround(spec.overlap_fraction * static_cast<double>(n)));
  if (overlap < 3) throw InvalidSpec("overlap holds fewer than 3 points");
  const std::size_t world_size = 2 * n - overlap;
  std::vector<Vec3> world(world_size);
  for (auto& w : world) w = sample_surface(surfaces[pick(rng)], rng);

  // Source is the low slab along a random direction, target the high slab.
  const Vec3 dir = unit_vector(rng);
  std::vector<std::size_t> order(world_size);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return world[a].dot(dir) < world[b].dot(dir); });

  const RigidTransform truth(random_rotation(rng, spec.max_rotation_deg),
                            unit_vector(rng) * std::uniform_real_distribution<double>(0.0, spec.max_translation)(rng));

  std::vector<std::size_t> source_perm(n), target_perm(n);
  std::iota(source_perm.begin(), source_perm.end(), 0);
  std::iota(target_perm.begin(), target_perm.end(), 0);
  std::shuffle(source_perm.begin(), source_perm.end(), rng);
  std::shuffle(target_perm.begin(), target_perm.end(), rng);

  // Slab position k in the source is world order[k]; in the target it is order[n - overlap + k].
  std::vector<Vec3> src(n), dst(n);
  for (std::size_t k = 0; k < n; ++k) src[source_perm[k]] = world[order[k]];
  for (std::size_t k = 0; k < n; ++k) {
    dst[target_perm[k]] = truth.apply(world[order[n - overlap + k]]) + truncated_noise(spec.noise_sigma, rng);
  }

  Scene scene;
  scene.partner.assign(n, -1);
  std::vector<std::uint32_t> shared;
  for (std::size_t k = n - overlap; k < n; ++k) {
    const auto s = static_cast<std::uint32_t>(source_perm[k]);
    scene.partner[s] = static_cast<std::int64_t>(target_perm[k - (n - overlap)]);
    shared.push_back(s);
  }
  scene.source = PointCloud(std::move(src));
  scene.target = PointCloud(std::move(dst));
  scene.truth = GroundTruth{truth, spec.inlier_tolerance};

  const std::size_t n_true = spec.true_pair_count();
  if (n_true > shared.size()) throw InvalidSpec("more true pairs requested than overlapping points");
  std::shuffle(shared.begin(), shared.end(), rng);
  std::vector<Correspondence> pairs;
  std::unordered_set<std::uint64_t> used;
  for (std::size_t i = 0; i < n_true; ++i) {
    const Correspondence c{shared[i], static_cast<std::uint32_t>(scene.partner[shared[i]])};
    pairs.push_back(c);
    used.insert(pair_key(c));
  }
  std::uniform_int_distribution<std::uint32_t> any(0, static_cast<std::uint32_t>(n - 1));
  const std::size_t wanted = spec.initial_pair_count - n_true;
  std::size_t attempts = 0;
  while (pairs.size() < spec.initial_pair_count) {
    if (++attempts > 1000 * (wanted + 1)) throw InvalidSpec("cannot draw enough wrong pairs");
    const Correspondence c{any(rng), any(rng)};
    if (used.count(pair_key(c))) continue;
    if (is_inlier({scene.source[c.source], scene.target[c.target]}, scene.truth)) continue;
    pairs.push_back(c);
    used.insert(pair_key(c));
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  scene.initial = CorrespondenceSet(std::move(pairs));
  return scene;
}

}  // namespace regor
