#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rwrange/lattice.hpp"
#include "rwrange/point_index.hpp"

namespace rwrange {

/// Trace graph of a path segment: distinct visited points as vertices and the
/// set of traversed unit edges {S_m, S_{m+1}}, a <= m < b. Adjacency is CSR
/// with sorted neighbour lists.
class RangeGraph {
 public:
  static RangeGraph build(const SegmentView& view);

  int dim() const noexcept { return vertices_.dim(); }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
  std::uint32_t source() const noexcept { return source_; }
  std::uint32_t target() const noexcept { return target_; }

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const noexcept {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(std::uint32_t v) const noexcept {
    return offsets_[v + 1] - offsets_[v];
  }

  const PointIndex& vertices() const noexcept { return vertices_; }
  /// PointIndex::kAbsent if the point is not in the graph.
  std::uint32_t vertex_of(std::span<const std::int64_t> p) const noexcept {
    return vertices_.find(p);
  }

  /// One "u v" line per undirected edge with u < v.
  void write_edge_list(std::ostream& out) const;

 private:
  explicit RangeGraph(int d, std::size_t expected) : vertices_(d, expected) {}

  PointIndex vertices_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
  std::uint32_t source_ = 0;
  std::uint32_t target_ = 0;
};

}  // namespace rwrange
