#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwrange/capacity.hpp"

using namespace rwrange;

namespace {

// Exact lattice stepping, one point at the origin, d=4, factor 64,
// 1e7 trials (independent run, seed 0x5eed0dac1e).
constexpr double kSinglePointOracle = 0.806901;
constexpr double kSinglePointOracleSe = 0.000125;

CapacityOptions options(double factor, std::uint32_t trials, std::uint64_t seed) {
  CapacityOptions o;
  o.escape_radius_factor = factor;
  o.trials_per_point = trials;
  o.seed = seed;
  return o;
}

bool within(double a, double sa, double b, double sb, double k = 3.0) {
  return std::abs(a - b) <= k * std::sqrt(sa * sa + sb * sb);
}

}  // namespace

TEST_CASE("capacity options are validated") {
  const std::vector<LatticePoint> pts{LatticePoint(4)};
  CHECK_THROWS_AS(capacity_estimate(pts, 4, options(3.9, 10, 1)), std::invalid_argument);
  CHECK_THROWS_AS(capacity_estimate(pts, 4, options(16, 0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(capacity_estimate(std::vector<LatticePoint>{}, 4, options(16, 10, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(capacity_estimate(pts, 5, options(16, 10, 1)), std::invalid_argument);
}

TEST_CASE("single point matches the exact lattice oracle") {
  const std::vector<LatticePoint> pts{LatticePoint(4)};
  const auto e = capacity_estimate(pts, 4, options(64, 100000, 11));
  CHECK(e.set_size == 1);
  CHECK(e.escape_radius == doctest::Approx(64.0));
  CHECK(within(e.estimate, e.std_error, kSinglePointOracle, kSinglePointOracleSe));
}

TEST_CASE("two distant points are nearly additive") {
  LatticePoint far(4);
  far[0] = 1000;
  const std::vector<LatticePoint> one{LatticePoint(4)};
  const std::vector<LatticePoint> two{LatticePoint(4), far};
  const auto a = capacity_estimate(one, 4, options(16, 20000, 3));
  const auto b = capacity_estimate(two, 4, options(16, 20000, 4));
  CHECK(within(b.estimate, b.std_error, 2 * a.estimate, 2 * a.std_error));
}

TEST_CASE("volume bound, monotonicity and subadditivity on ranges") {
  const WalkPath path = simulate_walk(4, 600, 21, 0);
  const PointIndex first = range_point_set(SegmentView(path, 0, 300));
  const PointIndex second = range_point_set(SegmentView(path, 300, 600));
  const PointIndex whole = range_point_set(SegmentView(path));
  const auto cf = capacity_estimate(first, options(16, 40, 5));
  const auto cs = capacity_estimate(second, options(16, 40, 6));
  const auto cw = capacity_estimate(whole, options(16, 40, 7));
  for (const auto& c : {cf, cs, cw}) {
    CHECK(c.estimate > 0.0);
    CHECK(c.estimate <= static_cast<double>(c.set_size));
  }
  CHECK(cw.estimate >= cf.estimate - 3 * std::hypot(cw.std_error, cf.std_error));
  CHECK(cw.estimate <= cf.estimate + cs.estimate +
                           3 * std::sqrt(cw.std_error * cw.std_error +
                                         cf.std_error * cf.std_error +
                                         cs.std_error * cs.std_error));
}

TEST_CASE("far-field jumps agree with exact lattice stepping") {
  const WalkPath path = simulate_walk(4, 300, 8, 2);
  const PointIndex set = range_point_set(SegmentView(path));
  auto fast = options(4, 40, 9);
  auto exact = fast;
  exact.far_field = false;
  const auto a = capacity_estimate(set, fast);
  const auto b = capacity_estimate(set, exact);
  CHECK(within(a.estimate, a.std_error, b.estimate, b.std_error));
}

TEST_CASE("estimates do not depend on the thread count") {
  const WalkPath path = simulate_walk(5, 400, 2, 1);
  const PointIndex set = range_point_set(SegmentView(path));
  auto o = options(16, 5, 13);
  o.threads = 1;
  const auto a = capacity_estimate(set, o);
  o.threads = 3;
  const auto b = capacity_estimate(set, o);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("source subsampling is unbiased and deterministic") {
  const WalkPath path = simulate_walk(4, 2000, 5, 3);
  const PointIndex set = range_point_set(SegmentView(path));
  const auto full = capacity_estimate(set, options(16, 20, 17));
  auto o = options(16, 20, 18);
  o.source_points = 300;
  const auto sub = capacity_estimate(set, o);
  const auto again = capacity_estimate(set, o);
  CHECK(sub.sources == 300);
  CHECK(full.sources == set.size());
  CHECK(sub.estimate == again.estimate);
  CHECK(within(sub.estimate, sub.std_error, full.estimate, full.std_error, 4.0));
  o.source_points = set.size() + 10;
  CHECK(capacity_estimate(set, o).sources == set.size());
}
