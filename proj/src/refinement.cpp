#include "regor/refinement.hpp"

#include "regor/errors.hpp"
#include "regor/geometry.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace regor {

void RefinementParams::validate() const {
  if (!(sigma_d > 0.0)) throw InvalidConfig("refinement sigma_d must be positive");
  if (max_rounds < 1) throw InvalidConfig("refinement max_rounds must be at least 1");
  if (!(convergence_eps > 0.0)) throw InvalidConfig("refinement convergence_eps must be positive");
}

std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const SpatialIndex& target,
                         double sigma_d) {
  if (source.empty() || target.cloud().empty()) throw EmptyCloud("po_tcd_count needs non-empty clouds");
  const auto n = static_cast<std::int64_t>(source.size());
  std::int64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (target.nearest_neighbor(pose.apply(source[i])).distance < sigma_d) ++count;
  }
  return static_cast<std::size_t>(count);
}

std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const PointCloud& target,
                         double sigma_d) {
  return po_tcd_count(pose, source, SpatialIndex(target), sigma_d);
}

namespace {

std::vector<PositionedPair> truncated_pairs(const RigidTransform& pose, const PointCloud& source,
                                            const SpatialIndex& target, double sigma_d) {
  const auto n = static_cast<std::int64_t>(source.size());
  std::vector<std::optional<PositionedPair>> slots(source.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto nn = target.nearest_neighbor(pose.apply(source[i]));
    if (nn.distance < sigma_d) slots[i] = PositionedPair{source[i], target.cloud()[nn.index]};
  }
  std::vector<PositionedPair> pairs;
  for (auto& s : slots) {
    if (s) pairs.push_back(*s);
  }
  return pairs;
}

}  // namespace

RigidTransform refine_pose(const RigidTransform& initial, const PointCloud& source, const PointCloud& target,
                           const RefinementParams& params) {
  params.validate();
  if (source.empty() || target.empty()) throw EmptyCloud("refine_pose needs non-empty clouds");
  const SpatialIndex index(target);

  RigidTransform current = initial;
  auto pairs = truncated_pairs(current, source, index, params.sigma_d);
  if (pairs.size() < 3) throw DegenerateInput("fewer than 3 source points within sigma_d of the target");

  RigidTransform best = current;
  std::size_t best_count = pairs.size();
  for (int round = 0; round < params.max_rounds; ++round) {
    RigidTransform next;
    try {
      next = fit_rigid_transform(pairs);
    } catch (const DegenerateInput&) {
      break;
    }
    const double change = rotation_angle(next.rotation().transpose() * current.rotation()) +
                          (next.translation() - current.translation()).norm();
    current = next;
    pairs = truncated_pairs(current, source, index, params.sigma_d);
    if (pairs.size() >= best_count) {
      best = current;
      best_count = pairs.size();
    }
    if (change < params.convergence_eps || pairs.size() < 3) break;
  }
  return best;
}

namespace serial {

std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const PointCloud& target,
                         double sigma_d) {
  if (source.empty() || target.empty()) throw EmptyCloud("po_tcd_count needs non-empty clouds");
  std::size_t count = 0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 x = pose.apply(source[i]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < target.size(); ++j) best = std::min(best, (target[j] - x).norm());
    if (best < sigma_d) ++count;
  }
  return count;
}

}  // namespace serial
}  // namespace regor
