#pragma once

#include <array>
#include <cstdint>

namespace rwrange {

/// Philox4x64-10 block function (Salmon et al., Random123). Counter-based:
/// output is a pure function of (counter, key).
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter apply(Counter ctr, Key key) noexcept;
};

/// Random stream keyed by (seed, stream). The optional substream occupies the
/// second counter word, so (seed, stream, substream) triples never overlap.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream,
            std::uint64_t substream = 0) noexcept
      : key_{seed, stream}, substream_(substream) {}

  std::uint64_t next_u64() noexcept {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  std::uint32_t next_u32() noexcept {
    if (has_half_) {
      has_half_ = false;
      return half_;
    }
    const std::uint64_t w = next_u64();
    half_ = static_cast<std::uint32_t>(w >> 32);
    has_half_ = true;
    return static_cast<std::uint32_t>(w);
  }

  /// Uniform integer in [0, bound), exact (Lemire's multiply-shift with rejection).
  std::uint32_t uniform_below(std::uint32_t bound) noexcept {
    std::uint64_t m = std::uint64_t{next_u32()} * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
      const std::uint32_t threshold = (0u - bound) % bound;
      while (low < threshold) {
        m = std::uint64_t{next_u32()} * bound;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pairs are cached).
  double normal() noexcept;

 private:
  void refill() noexcept;

  Philox4x64::Key key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  Philox4x64::Counter buffer_{};
  int pos_ = 4;
  std::uint32_t half_ = 0;
  bool has_half_ = false;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// SplitMix64 finalizer; used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

}  // namespace rwrange
