#include "rwrange/range_graph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace rwrange {

RangeGraph RangeGraph::build(const SegmentView& view) {
  if (view.length() == 0) {
    throw std::invalid_argument("empty segment has no edges");
  }
  RangeGraph g(view.dim(), view.length() + 1);

  std::vector<std::uint64_t> edges;
  edges.reserve(2 * view.length());
  std::uint32_t prev = g.vertices_.insert(view.position(view.begin())).first;
  g.source_ = prev;
  for (std::size_t m = view.begin() + 1; m <= view.end(); ++m) {
    const std::uint32_t cur = g.vertices_.insert(view.position(m)).first;
    const std::uint64_t lo = std::min(prev, cur), hi = std::max(prev, cur);
    edges.push_back((lo << 32) | hi);
    prev = cur;
  }
  g.target_ = prev;

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const std::size_t v = g.vertices_.size();
  g.offsets_.assign(v + 1, 0);
  for (auto e : edges) {
    ++g.offsets_[(e >> 32) + 1];
    ++g.offsets_[(e & 0xffffffffu) + 1];
  }
  for (std::size_t i = 0; i < v; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.neighbors_.resize(2 * edges.size());
  std::vector<std::uint32_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto e : edges) {
    const auto a = static_cast<std::uint32_t>(e >> 32);
    const auto b = static_cast<std::uint32_t>(e & 0xffffffffu);
    g.neighbors_[fill[a]++] = b;
    g.neighbors_[fill[b]++] = a;
  }
  for (std::size_t i = 0; i < v; ++i) {
    std::sort(g.neighbors_.begin() + g.offsets_[i], g.neighbors_.begin() + g.offsets_[i + 1]);
  }
  return g;
}

void RangeGraph::write_edge_list(std::ostream& out) const {
  for (std::uint32_t u = 0; u < vertex_count(); ++u) {
    for (auto v : neighbors(u)) {
      if (u < v) out << u << ' ' << v << '\n';
    }
  }
}

}  // namespace rwrange
