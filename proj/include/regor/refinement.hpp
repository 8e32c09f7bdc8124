#pragma once

#include "regor/spatial_index.hpp"
#include "regor/types.hpp"

#include <cstddef>

namespace regor {

struct RefinementParams {
  // Tighter than the correction radius: at 0.1 m, boundary points of a partial
  // overlap inflate the count enough to move its maximum off the true pose.
  double sigma_d = 0.05;
  int max_rounds = 10;
  /// Stop once rotation change (radians) plus translation change drops below this.
  double convergence_eps = 1e-4;

  void validate() const;
};

/// Number of source points whose nearest target lies strictly within sigma_d
/// under `pose`.
std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const SpatialIndex& target,
                         double sigma_d);
std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const PointCloud& target,
                         double sigma_d);

/// Truncated ICP that returns the visited pose with the highest count (the
/// latest on ties), so the count never decreases. Throws DegenerateInput when
/// fewer than 3 source points land within sigma_d under `initial`.
RigidTransform refine_pose(const RigidTransform& initial, const PointCloud& source, const PointCloud& target,
                           const RefinementParams& params);

namespace serial {
std::size_t po_tcd_count(const RigidTransform& pose, const PointCloud& source, const PointCloud& target,
                         double sigma_d);
}

}  // namespace regor
