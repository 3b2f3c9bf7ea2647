#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "rwrange/lattice.hpp"
#include "rwrange/point_index.hpp"
#include "rwrange/rng.hpp"

using namespace rwrange;

TEST_CASE("philox4x64-10 known answers") {
  using C = Philox4x64::Counter;
  CHECK(Philox4x64::apply({0, 0, 0, 0}, {0, 0}) ==
        C{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL,
          0x7e68b68aec7ba23bULL});
  const std::uint64_t ones = ~std::uint64_t{0};
  CHECK(Philox4x64::apply({ones, ones, ones, ones}, {ones, ones}) ==
        C{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL,
          0xa09caebf594f0ba0ULL});
  CHECK(Philox4x64::apply({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                           0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                          {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        C{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL,
          0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("uniform_below covers its range evenly") {
  StreamRng rng(11, 3);
  std::array<int, 12> counts{};
  for (int i = 0; i < 120000; ++i) ++counts[rng.uniform_below(12)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("streams are distinct") {
  StreamRng a(1, 0), b(1, 1), c(2, 0);
  const auto x = a.next_u64();
  CHECK(x != b.next_u64());
  CHECK(x != c.next_u64());
}

TEST_CASE("simulate_walk: argument errors") {
  CHECK_THROWS_AS(simulate_walk(3, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_walk(9, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_walk(4, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("single step lands on a unit neighbour") {
  std::set<LatticePoint> seen;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const WalkPath p = simulate_walk(4, 1, seed, 0);
    REQUIRE(p.steps() == 1);
    CHECK(p.point(0) == LatticePoint(4));
    CHECK(p.point(1).l1_norm() == 1);
    seen.insert(p.point(1));
  }
  CHECK(seen.size() == 8);
}

TEST_CASE("unit steps, origin start and parity hold for every time") {
  for (int d = kMinDim; d <= kMaxDim; ++d) {
    const WalkPath p = simulate_walk(d, 5000, 42, static_cast<std::uint64_t>(d));
    CHECK(p.point(0) == LatticePoint(d));
    for (std::size_t m = 1; m <= p.steps(); ++m) {
      REQUIRE((p.point(m) - p.point(m - 1)).l1_norm() == 1);
      std::int64_t sum = 0;
      for (auto c : p.position(m)) sum += c;
      REQUIRE(((sum % 2) + 2) % 2 == static_cast<std::int64_t>(m % 2));
    }
  }
}

TEST_CASE("determinism: identical keys give identical bytes") {
  const WalkPath a = simulate_walk(4, 10000, 1, 0);
  const WalkPath b = simulate_walk(4, 10000, 1, 0);
  std::ostringstream sa, sb;
  write_path_dump(sa, a);
  write_path_dump(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a != simulate_walk(4, 10000, 1, 1));
}

TEST_CASE("E|S_n|^2 / n is one") {
  // Steps are uncorrelated with unit length, so E|S_n|^2 = n exactly.
  const std::size_t n = 1024, samples = 10000;
  double acc = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    acc += static_cast<double>(simulate_walk(5, n, 7, s).point(n).squared_norm());
  }
  CHECK(acc / samples / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("reverse_translate") {
  const WalkPath one = WalkPath::from_points(
      std::vector{LatticePoint(4), LatticePoint::unit(4, 0)});
  const WalkPath rev = reverse_translate(SegmentView(one));
  CHECK(rev.point(1) == LatticePoint::unit(4, 0, -1));

  const WalkPath p = simulate_walk(6, 300, 5, 9);
  const SegmentView seg(p, 40, 250);
  const WalkPath once = reverse_translate(seg);
  CHECK(once.steps() == 210);
  const WalkPath twice = reverse_translate(SegmentView(once));
  for (std::size_t i = 0; i <= 210; ++i) {
    REQUIRE(twice.point(i) == p.point(40 + i) - p.point(40));
  }
  CHECK_THROWS(reverse_translate(SegmentView(p, 7, 7)));
}

TEST_CASE("reversed segments keep the walk law") {
  const std::size_t len = 512;
  double fwd = 0.0, bwd = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const WalkPath p = simulate_walk(5, 2 * len, 3, s);
    const WalkPath r = reverse_translate(SegmentView(p, len / 2, len / 2 + len));
    fwd += static_cast<double>(p.point(len).squared_norm()) / len;
    bwd += static_cast<double>(r.point(len).squared_norm()) / len;
  }
  CHECK(bwd / fwd == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("path validation rejects bad input") {
  CHECK_THROWS(WalkPath(4, {0, 0, 0, 0, 1, 1, 0, 0}));
  CHECK_THROWS(WalkPath(4, {1, 0, 0, 0, 2, 0, 0, 0}));
  const WalkPath p = simulate_walk(4, 10, 1, 0);
  CHECK_THROWS(SegmentView(p, 5, 11));
  CHECK_THROWS(SegmentView(p, 6, 5));
}

TEST_CASE("binary dump layout and round trip") {
  const WalkPath p = simulate_walk(7, 33, 0xabcdefULL, 12);
  std::stringstream buf;
  write_path_dump(buf, p);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 4 + 3 * 8 + 34 * 7 * 8);
  CHECK(static_cast<unsigned char>(bytes[0]) == 7);
  CHECK(static_cast<unsigned char>(bytes[4]) == 33);
  CHECK(read_path_dump(buf) == p);

  std::istringstream truncated(bytes.substr(0, 40));
  CHECK_THROWS(read_path_dump(truncated));
}

TEST_CASE("point index") {
  PointIndex idx(4, 2);
  const WalkPath p = simulate_walk(4, 2000, 8, 0);
  std::set<LatticePoint> reference;
  for (std::size_t m = 0; m <= p.steps(); ++m) {
    const auto [id, inserted] = idx.insert(p.position(m));
    CHECK(inserted == reference.insert(p.point(m)).second);
    CHECK(idx.find(p.position(m)) == id);
  }
  CHECK(idx.size() == reference.size());
  const LatticePoint far(4, {1000, 0, 0, 0});
  CHECK_FALSE(idx.contains(far.coords()));
}
