#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rwrange/lattice.hpp"

namespace rwrange {

/// Open-addressing (linear probing) map from lattice points to dense ids
/// 0..size()-1, assigned in insertion order. Points are stored contiguously.
class PointIndex {
 public:
  static constexpr std::uint32_t kAbsent = 0xffffffffu;

  explicit PointIndex(int d, std::size_t expected = 16);

  /// Returns {id, true} if the point was new.
  std::pair<std::uint32_t, bool> insert(std::span<const std::int64_t> p);
  std::uint32_t find(std::span<const std::int64_t> p) const noexcept;
  bool contains(std::span<const std::int64_t> p) const noexcept {
    return find(p) != kAbsent;
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return hashes_.size(); }
  std::span<const std::int64_t> point(std::uint32_t id) const noexcept {
    return {points_.data() + std::size_t{id} * dim_, static_cast<std::size_t>(dim_)};
  }

 private:
  bool equal(std::uint32_t id, std::span<const std::int64_t> p) const noexcept;
  void grow();

  int dim_;
  std::vector<std::int64_t> points_;
  std::vector<std::uint64_t> hashes_;
  std::vector<std::uint32_t> slots_;
  std::size_t mask_;
};

}  // namespace rwrange
