#pragma once

#include "regor/types.hpp"

#include <span>

namespace regor {

/// Least-squares rigid fit (Kabsch) of src onto dst: argmin over SO(3) x R^3 of
/// sum w_i |R src_i + t - dst_i|^2. Reflections are corrected with the usual
/// determinant sign flip on the smallest singular direction.
///
/// Throws DegenerateInput for fewer than 3 pairs, mismatched lengths, or a
/// centered cross-covariance of rank < 2 (collinear or coincident points).
RigidTransform fit_rigid_transform(std::span<const Vec3> src, std::span<const Vec3> dst,
                                   std::span<const double> weights = {});

/// Convenience overload over resolved correspondences.
RigidTransform fit_rigid_transform(std::span<const PositionedPair> pairs,
                                   std::span<const double> weights = {});

PointCloud apply_transform(const RigidTransform& transform, const PointCloud& cloud);

/// Rotation about a unit axis by `radians`.
Mat3 axis_angle(const Vec3& axis, double radians);

/// Geodesic angle of a rotation matrix in radians, with the trace clamped.
double rotation_angle(const Mat3& rotation);

}  // namespace regor
