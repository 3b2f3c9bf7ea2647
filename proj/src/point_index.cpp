#include "rwrange/point_index.hpp"

#include <algorithm>
#include <bit>

namespace rwrange {

PointIndex::PointIndex(int d, std::size_t expected) : dim_(d) {
  check_dimension(d);
  const std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, 2 * expected));
  slots_.assign(cap, kAbsent);
  mask_ = cap - 1;
  points_.reserve(expected * d);
  hashes_.reserve(expected);
}

bool PointIndex::equal(std::uint32_t id, std::span<const std::int64_t> p) const noexcept {
  const std::int64_t* q = points_.data() + std::size_t{id} * dim_;
  for (int i = 0; i < dim_; ++i) {
    if (q[i] != p[i]) return false;
  }
  return true;
}

std::uint32_t PointIndex::find(std::span<const std::int64_t> p) const noexcept {
  const std::uint64_t h = hash_coords(p);
  for (std::size_t s = h & mask_;; s = (s + 1) & mask_) {
    const std::uint32_t id = slots_[s];
    if (id == kAbsent) return kAbsent;
    if (hashes_[id] == h && equal(id, p)) return id;
  }
}

std::pair<std::uint32_t, bool> PointIndex::insert(std::span<const std::int64_t> p) {
  const std::uint64_t h = hash_coords(p);
  std::size_t s = h & mask_;
  for (;; s = (s + 1) & mask_) {
    const std::uint32_t id = slots_[s];
    if (id == kAbsent) break;
    if (hashes_[id] == h && equal(id, p)) return {id, false};
  }
  const auto id = static_cast<std::uint32_t>(hashes_.size());
  points_.insert(points_.end(), p.begin(), p.end());
  hashes_.push_back(h);
  slots_[s] = id;
  if (2 * hashes_.size() > slots_.size()) grow();
  return {id, true};
}

void PointIndex::grow() {
  slots_.assign(slots_.size() * 2, kAbsent);
  mask_ = slots_.size() - 1;
  for (std::uint32_t id = 0; id < hashes_.size(); ++id) {
    std::size_t s = hashes_[id] & mask_;
    while (slots_[s] != kAbsent) s = (s + 1) & mask_;
    slots_[s] = id;
  }
}

}  // namespace rwrange
