#pragma once

#include <cstdint>
#include <string_view>

#include "rwrange/lattice.hpp"
#include "rwrange/range_graph.hpp"
#include "rwrange/resistance.hpp"

namespace rwrange {

/// X^1, X^2, X^3.
enum class ObservableKind { GraphDistance, CutPoints, EffectiveResistance };

inline constexpr ObservableKind kAllObservables[] = {
    ObservableKind::GraphDistance, ObservableKind::CutPoints,
    ObservableKind::EffectiveResistance};

/// Short names: "distance", "cut", "resistance".
std::string_view to_string(ObservableKind kind) noexcept;
/// Accepts the short names and "graph-distance", "cut-points", "effective-resistance".
ObservableKind parse_observable_kind(std::string_view text);

/// Unweighted BFS distance between two vertices.
std::uint64_t graph_distance(const RangeGraph& g, std::uint32_t from, std::uint32_t to);
inline std::uint64_t graph_distance(const RangeGraph& g) {
  return graph_distance(g, g.source(), g.target());
}

/// Number of times i in (a, b] with S[a, i-1] and S[i, b] disjoint. Linear
/// sweep over first/last visit times.
std::uint64_t cut_point_count(const SegmentView& view);

/// Reference evaluation of the same indicator sum by pairwise comparison of
/// positions, O((b-a)^2).
std::uint64_t cut_point_count_naive(const SegmentView& view);

/// Reference shortest path: Dijkstra with unit weights on an ordered-map
/// adjacency built directly from the path.
std::uint64_t graph_distance_dijkstra(const SegmentView& view);

/// X^kind[a, b]; 0 when the segment is empty.
double observable(const SegmentView& view, ObservableKind kind,
                  const ResistanceSolveConfig& cfg = {});

}  // namespace rwrange
