#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace rwrange {

inline constexpr int kMinDim = 4;
inline constexpr int kMaxDim = 8;

/// Throws std::invalid_argument unless kMinDim <= d <= kMaxDim.
void check_dimension(int d);

/// A point of Z^d, 4 <= d <= 8. Unused trailing coordinates are kept at zero
/// so that value comparison and hashing only see the first d entries.
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int d);
  LatticePoint(int d, std::span<const std::int64_t> coords);
  LatticePoint(int d, std::initializer_list<std::int64_t> coords);

  int dim() const noexcept { return dim_; }
  std::span<const std::int64_t> coords() const noexcept {
    return {coords_.data(), static_cast<std::size_t>(dim_)};
  }
  std::int64_t operator[](int i) const noexcept { return coords_[i]; }
  std::int64_t& operator[](int i) noexcept { return coords_[i]; }

  /// Unit vector +-e_{axis}.
  static LatticePoint unit(int d, int axis, int sign = 1);

  std::int64_t l1_norm() const noexcept;
  std::int64_t squared_norm() const noexcept;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) noexcept;
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) noexcept;

 private:
  std::int32_t dim_ = 0;
  std::array<std::int64_t, kMaxDim> coords_{};
};

std::uint64_t hash_coords(std::span<const std::int64_t> coords) noexcept;

/// Realized simple random walk S_0..S_n on Z^d. Immutable after construction.
class WalkPath {
 public:
  /// Validates the origin start and the unit-step property.
  WalkPath(int d, std::vector<std::int64_t> coords, std::uint64_t seed = 0,
           std::uint64_t stream = 0);

  static WalkPath from_points(std::span<const LatticePoint> points,
                              std::uint64_t seed = 0, std::uint64_t stream = 0);

  int dim() const noexcept { return dim_; }
  /// Number of steps n; there are n+1 positions.
  std::size_t steps() const noexcept { return coords_.size() / dim_ - 1; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::span<const std::int64_t> position(std::size_t m) const noexcept {
    return {coords_.data() + m * dim_, static_cast<std::size_t>(dim_)};
  }
  LatticePoint point(std::size_t m) const { return LatticePoint(dim_, position(m)); }
  std::span<const std::int64_t> raw() const noexcept { return coords_; }

  friend bool operator==(const WalkPath&, const WalkPath&) = default;

 private:
  struct Unchecked {};
  WalkPath(Unchecked, int d, std::vector<std::int64_t> coords, std::uint64_t seed,
           std::uint64_t stream) noexcept
      : dim_(d), seed_(seed), stream_(stream), coords_(std::move(coords)) {}
  friend WalkPath simulate_walk(int, std::size_t, std::uint64_t, std::uint64_t);

  int dim_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::vector<std::int64_t> coords_;
};

/// Time window [a, b] of a path. Does not own the path.
class SegmentView {
 public:
  SegmentView(const WalkPath& path, std::size_t a, std::size_t b);
  explicit SegmentView(const WalkPath& path) : SegmentView(path, 0, path.steps()) {}

  const WalkPath& path() const noexcept { return *path_; }
  std::size_t begin() const noexcept { return a_; }
  std::size_t end() const noexcept { return b_; }
  std::size_t length() const noexcept { return b_ - a_; }
  int dim() const noexcept { return path_->dim(); }
  std::span<const std::int64_t> position(std::size_t m) const noexcept {
    return path_->position(m);
  }

 private:
  const WalkPath* path_;
  std::size_t a_;
  std::size_t b_;
};

/// Simple random walk with uniform steps among the 2d neighbours. The path is
/// a pure function of (d, n, seed, stream).
WalkPath simulate_walk(int d, std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// S~_i = S_{b-i} - S_b for i = 0..b-a.
WalkPath reverse_translate(const SegmentView& view);

/// Binary dump: little-endian u32 d, u64 n, u64 seed, u64 stream, then
/// (n+1)*d little-endian i64 coordinates.
void write_path_dump(std::ostream& out, const WalkPath& path);
WalkPath read_path_dump(std::istream& in);

}  // namespace rwrange

template <>
struct std::hash<rwrange::LatticePoint> {
  std::size_t operator()(const rwrange::LatticePoint& p) const noexcept {
    return static_cast<std::size_t>(rwrange::hash_coords(p.coords()));
  }
};
