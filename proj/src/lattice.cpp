#include "rwrange/lattice.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "rwrange/rng.hpp"

namespace rwrange {

void check_dimension(int d) {
  if (d < kMinDim || d > kMaxDim) {
    throw std::invalid_argument("dimension " + std::to_string(d) +
                                " outside supported range [4, 8]");
  }
}

LatticePoint::LatticePoint(int d) : dim_(d) { check_dimension(d); }

LatticePoint::LatticePoint(int d, std::span<const std::int64_t> coords) : dim_(d) {
  check_dimension(d);
  if (coords.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("coordinate count does not match dimension");
  }
  for (int i = 0; i < d; ++i) coords_[i] = coords[i];
}

LatticePoint::LatticePoint(int d, std::initializer_list<std::int64_t> coords)
    : LatticePoint(d) {
  if (coords.size() > static_cast<std::size_t>(d)) {
    throw std::invalid_argument("too many coordinates for dimension");
  }
  int i = 0;
  for (auto c : coords) coords_[i++] = c;
}

LatticePoint LatticePoint::unit(int d, int axis, int sign) {
  LatticePoint p(d);
  if (axis < 0 || axis >= d) throw std::invalid_argument("axis out of range");
  p.coords_[axis] = sign >= 0 ? 1 : -1;
  return p;
}

std::int64_t LatticePoint::l1_norm() const noexcept {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += coords_[i] < 0 ? -coords_[i] : coords_[i];
  return s;
}

std::int64_t LatticePoint::squared_norm() const noexcept {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += coords_[i] * coords_[i];
  return s;
}

LatticePoint operator+(LatticePoint a, const LatticePoint& b) noexcept {
  for (int i = 0; i < kMaxDim; ++i) a.coords_[i] += b.coords_[i];
  return a;
}

LatticePoint operator-(LatticePoint a, const LatticePoint& b) noexcept {
  for (int i = 0; i < kMaxDim; ++i) a.coords_[i] -= b.coords_[i];
  return a;
}

std::uint64_t hash_coords(std::span<const std::int64_t> coords) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto c : coords) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
  }
  return mix64(h);
}

namespace {

void validate_path(int d, std::span<const std::int64_t> coords) {
  check_dimension(d);
  if (coords.size() % d != 0 || coords.size() < 2 * static_cast<std::size_t>(d)) {
    throw std::invalid_argument("path needs at least two positions");
  }
  for (int i = 0; i < d; ++i) {
    if (coords[i] != 0) throw std::invalid_argument("path must start at the origin");
  }
  const std::size_t count = coords.size() / d;
  for (std::size_t m = 1; m < count; ++m) {
    std::int64_t l1 = 0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t diff = coords[m * d + i] - coords[(m - 1) * d + i];
      l1 += diff < 0 ? -diff : diff;
    }
    if (l1 != 1) {
      throw std::invalid_argument("non-unit step at time " + std::to_string(m));
    }
  }
}

}  // namespace

WalkPath::WalkPath(int d, std::vector<std::int64_t> coords, std::uint64_t seed,
                   std::uint64_t stream)
    : dim_(d), seed_(seed), stream_(stream), coords_(std::move(coords)) {
  validate_path(dim_, coords_);
}

WalkPath WalkPath::from_points(std::span<const LatticePoint> points, std::uint64_t seed,
                               std::uint64_t stream) {
  if (points.empty()) throw std::invalid_argument("empty point list");
  const int d = points.front().dim();
  std::vector<std::int64_t> coords;
  coords.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.dim() != d) throw std::invalid_argument("mixed dimensions in point list");
    coords.insert(coords.end(), p.coords().begin(), p.coords().end());
  }
  return WalkPath(d, std::move(coords), seed, stream);
}

SegmentView::SegmentView(const WalkPath& path, std::size_t a, std::size_t b)
    : path_(&path), a_(a), b_(b) {
  if (a > b || b > path.steps()) {
    throw std::invalid_argument("segment [" + std::to_string(a) + ", " +
                                std::to_string(b) + "] outside path of " +
                                std::to_string(path.steps()) + " steps");
  }
}

WalkPath simulate_walk(int d, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  check_dimension(d);
  if (n == 0) throw std::invalid_argument("walk needs at least one step");
  std::vector<std::int64_t> coords((n + 1) * d, 0);
  StreamRng rng(seed, stream);
  const auto choices = static_cast<std::uint32_t>(2 * d);
  for (std::size_t m = 1; m <= n; ++m) {
    std::int64_t* cur = coords.data() + m * d;
    const std::int64_t* prev = cur - d;
    for (int i = 0; i < d; ++i) cur[i] = prev[i];
    const std::uint32_t move = rng.uniform_below(choices);
    cur[move >> 1] += (move & 1u) ? -1 : 1;
  }
  return WalkPath(WalkPath::Unchecked{}, d, std::move(coords), seed, stream);
}

WalkPath reverse_translate(const SegmentView& view) {
  const int d = view.dim();
  const std::size_t len = view.length();
  if (len == 0) throw std::invalid_argument("cannot reverse an empty segment");
  std::vector<std::int64_t> coords((len + 1) * d);
  const auto last = view.position(view.end());
  for (std::size_t i = 0; i <= len; ++i) {
    const auto p = view.position(view.end() - i);
    for (int k = 0; k < d; ++k) coords[i * d + k] = p[k] - last[k];
  }
  return WalkPath(d, std::move(coords), view.path().seed(), view.path().stream());
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(u & 0xffu);
    u = static_cast<U>(u >> 8);
  }
  out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::make_unsigned_t<T>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error("truncated path dump");
  }
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | bytes[i]);
  return static_cast<T>(u);
}

}  // namespace

void write_path_dump(std::ostream& out, const WalkPath& path) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.dim()));
  put_le<std::uint64_t>(out, path.steps());
  put_le<std::uint64_t>(out, path.seed());
  put_le<std::uint64_t>(out, path.stream());
  for (auto c : path.raw()) put_le<std::int64_t>(out, c);
  if (!out) throw std::runtime_error("failed writing path dump");
}

WalkPath read_path_dump(std::istream& in) {
  const auto d = get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint64_t>(in);
  const auto seed = get_le<std::uint64_t>(in);
  const auto stream = get_le<std::uint64_t>(in);
  check_dimension(static_cast<int>(d));
  std::vector<std::int64_t> coords((n + 1) * d);
  for (auto& c : coords) c = get_le<std::int64_t>(in);
  return WalkPath(static_cast<int>(d), std::move(coords), seed, stream);
}

}  // namespace rwrange
