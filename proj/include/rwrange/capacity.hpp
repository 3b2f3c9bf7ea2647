#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rwrange/lattice.hpp"
#include "rwrange/point_index.hpp"

namespace rwrange {

struct CapacityOptions {
  /// Escape ball radius in units of the set's diameter; must be >= 4.
  double escape_radius_factor = 16.0;
  std::uint32_t trials_per_point = 200;
  std::uint64_t seed = 0;
  /// Number of source points drawn without replacement; 0 uses every point.
  std::size_t source_points = 0;
  /// Away from the set, replace lattice stepping by Brownian walk-on-spheres
  /// jumps. With false, every trial steps on the lattice until it hits the
  /// set or leaves the escape ball.
  bool far_field = true;
  /// Smallest sphere radius used for walk-on-spheres jumps.
  double min_jump_radius = 16.0;
  unsigned threads = 1;

  void validate() const;
};

struct CapacityEstimate {
  std::size_t set_size = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint32_t escapes_per_point = 0;  // trials per source point
  double escape_radius = 0.0;
  double radius_factor = 0.0;
  /// 2 * max distance from the centroid; bounds the diameter within a factor 2.
  double diameter = 0.0;
  std::size_t sources = 0;
};

/// Cap(A) = sum over x in A of P^x(walk leaves B(centroid, R) before
/// returning to A), R = factor * max(diameter, 1). Deterministic per
/// (seed, point id, trial).
CapacityEstimate capacity_estimate(const PointIndex& set, const CapacityOptions& options);

CapacityEstimate capacity_estimate(std::span<const LatticePoint> points, int d,
                                   const CapacityOptions& options);

/// Distinct points visited in a segment.
PointIndex range_point_set(const SegmentView& view);

}  // namespace rwrange
