#include "rwrange/observables.hpp"

#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwrange {

std::string_view to_string(ObservableKind kind) noexcept {
  switch (kind) {
    case ObservableKind::GraphDistance: return "distance";
    case ObservableKind::CutPoints: return "cut";
    case ObservableKind::EffectiveResistance: return "resistance";
  }
  return "unknown";
}

ObservableKind parse_observable_kind(std::string_view text) {
  if (text == "distance" || text == "graph-distance") return ObservableKind::GraphDistance;
  if (text == "cut" || text == "cut-points") return ObservableKind::CutPoints;
  if (text == "resistance" || text == "effective-resistance") {
    return ObservableKind::EffectiveResistance;
  }
  throw std::invalid_argument("unknown observable kind '" + std::string(text) +
                              "' (expected distance, cut or resistance)");
}

std::uint64_t graph_distance(const RangeGraph& g, std::uint32_t from, std::uint32_t to) {
  if (from == to) return 0;
  std::vector<std::uint32_t> dist(g.vertex_count(), PointIndex::kAbsent);
  std::vector<std::uint32_t> frontier{from}, next;
  dist[from] = 0;
  for (std::uint32_t level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (auto u : frontier) {
      for (auto w : g.neighbors(u)) {
        if (dist[w] != PointIndex::kAbsent) continue;
        if (w == to) return level;
        dist[w] = level;
        next.push_back(w);
      }
    }
    frontier.swap(next);
  }
  throw std::logic_error("range graph is disconnected");
}

std::uint64_t cut_point_count(const SegmentView& view) {
  const std::size_t len = view.length();
  if (len == 0) return 0;
  PointIndex index(view.dim(), len + 1);
  std::vector<std::uint32_t> first, last;
  first.reserve(len + 1);
  last.reserve(len + 1);
  for (std::size_t t = 0; t <= len; ++t) {
    const auto [id, inserted] = index.insert(view.position(view.begin() + t));
    if (inserted) {
      first.push_back(static_cast<std::uint32_t>(t));
      last.push_back(static_cast<std::uint32_t>(t));
    } else {
      last[id] = static_cast<std::uint32_t>(t);
    }
  }
  // Time i fails iff first(x) < i <= last(x) for some x.
  std::vector<std::int32_t> cover(len + 2, 0);
  for (std::size_t id = 0; id < first.size(); ++id) {
    if (first[id] < last[id]) {
      ++cover[first[id] + 1];
      --cover[last[id] + 1];
    }
  }
  std::uint64_t cuts = 0;
  std::int32_t depth = 0;
  for (std::size_t i = 1; i <= len; ++i) {
    depth += cover[i];
    if (depth == 0) ++cuts;
  }
  return cuts;
}

std::uint64_t cut_point_count_naive(const SegmentView& view) {
  const std::size_t a = view.begin(), b = view.end();
  if (a == b) return 0;
  const int d = view.dim();
  auto same = [&](std::size_t p, std::size_t q) {
    const auto x = view.position(p), y = view.position(q);
    for (int k = 0; k < d; ++k) {
      if (x[k] != y[k]) return false;
    }
    return true;
  };
  // latest[p]: largest q in [p, b] with S_q == S_p.
  std::vector<std::size_t> latest(b - a + 1);
  for (std::size_t p = a; p <= b; ++p) {
    std::size_t q_max = p;
    for (std::size_t q = p + 1; q <= b; ++q) {
      if (same(p, q)) q_max = q;
    }
    latest[p - a] = q_max;
  }
  std::uint64_t cuts = 0;
  for (std::size_t i = a + 1; i <= b; ++i) {
    bool disjoint = true;
    for (std::size_t p = a; p < i && disjoint; ++p) {
      if (latest[p - a] >= i) disjoint = false;
    }
    if (disjoint) ++cuts;
  }
  return cuts;
}

std::uint64_t graph_distance_dijkstra(const SegmentView& view) {
  if (view.length() == 0) return 0;
  std::map<LatticePoint, std::set<LatticePoint>> adjacency;
  for (std::size_t m = view.begin(); m < view.end(); ++m) {
    const LatticePoint u = view.path().point(m), w = view.path().point(m + 1);
    adjacency[u].insert(w);
    adjacency[w].insert(u);
  }
  const LatticePoint source = view.path().point(view.begin());
  const LatticePoint target = view.path().point(view.end());
  std::map<LatticePoint, std::uint64_t> dist{{source, 0}};
  using Entry = std::pair<std::uint64_t, LatticePoint>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.emplace(0, source);
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (u == target) return du;
    if (du > dist[u]) continue;
    for (const auto& w : adjacency[u]) {
      auto it = dist.find(w);
      if (it == dist.end() || du + 1 < it->second) {
        dist[w] = du + 1;
        heap.emplace(du + 1, w);
      }
    }
  }
  throw std::logic_error("target unreachable");
}

double observable(const SegmentView& view, ObservableKind kind,
                  const ResistanceSolveConfig& cfg) {
  if (view.length() == 0) return 0.0;
  switch (kind) {
    case ObservableKind::CutPoints:
      return static_cast<double>(cut_point_count(view));
    case ObservableKind::GraphDistance:
      return static_cast<double>(graph_distance(RangeGraph::build(view)));
    case ObservableKind::EffectiveResistance:
      return effective_resistance(RangeGraph::build(view), cfg);
  }
  throw std::invalid_argument("bad observable kind");
}

}  // namespace rwrange
