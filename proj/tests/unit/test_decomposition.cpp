#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwrange/decomposition.hpp"

using namespace rwrange;

namespace {

WalkPath straight(int d, std::size_t n) {
  std::vector<LatticePoint> pts;
  for (std::size_t i = 0; i <= n; ++i) pts.push_back(LatticePoint(d, {static_cast<std::int64_t>(i)}));
  return WalkPath::from_points(pts);
}

}  // namespace

TEST_CASE("cross term vanishes on a straight path") {
  const WalkPath line = straight(5, 64);
  for (auto kind : kAllObservables) {
    for (std::size_t m : {1u, 17u, 32u, 63u}) {
      CHECK(cross_term(line, kind, m, 64).value == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("cross term equals the direct definition") {
  // 0, e1, e1+e2, e2, 0, -e2
  const WalkPath p = WalkPath::from_points(std::vector{
      LatticePoint(4), LatticePoint(4, {1, 0}), LatticePoint(4, {1, 1}),
      LatticePoint(4, {0, 1}), LatticePoint(4), LatticePoint(4, {0, -1})});
  for (auto kind : kAllObservables) {
    const double direct = observable(SegmentView(p, 0, 3), kind) +
                          observable(SegmentView(p, 3, 5), kind) -
                          observable(SegmentView(p, 0, 5), kind);
    const CrossTerm e = cross_term(p, kind, 3, 5);
    CHECK(e.value == doctest::Approx(direct));
    CHECK(e.n_left == 3);
    CHECK(e.n_right == 2);
  }
  // X1[0,3] = 3, X1[3,5] = 2, X1[0,5]: 0 -> -e2 is one edge.
  CHECK(cross_term(p, ObservableKind::GraphDistance, 3, 5).value == 4.0);
}

TEST_CASE("cross term argument checks") {
  const WalkPath p = simulate_walk(4, 20, 1, 0);
  CHECK_THROWS_AS(cross_term(p, ObservableKind::CutPoints, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(cross_term(p, ObservableKind::CutPoints, 10, 10), std::invalid_argument);
  CHECK_THROWS_AS(cross_term(p, ObservableKind::CutPoints, 10, 21), std::invalid_argument);
}

TEST_CASE("cross term distribution: nonnegative, nondegenerate") {
  double sum = 0.0;
  int positive = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const WalkPath p = simulate_walk(7, 512, 3, s);
    const double e = cross_term(p, ObservableKind::CutPoints, 256, 512).value;
    REQUIRE(e >= 0.0);
    sum += e;
    if (e >= 1.0) ++positive;
  }
  CHECK(std::isfinite(sum / 2000));
  CHECK(positive > 0);
  CHECK(positive < 2000);
}

TEST_CASE("dyadic decomposition: straight path") {
  const WalkPath line = straight(4, 64);
  for (int K = 1; K <= 5; ++K) {
    const auto dd = dyadic_decompose(line, ObservableKind::CutPoints, K);
    CHECK(dd.leaves.size() == (1u << K));
    CHECK(dd.leaf_sum() == 64.0);
    CHECK(dd.error_sum() == 0.0);
  }
}

TEST_CASE("dyadic decomposition: exact identity") {
  for (int d = 4; d <= 7; ++d) {
    for (std::uint64_t s = 0; s < 60; ++s) {
      const WalkPath p = simulate_walk(d, 256, 8, s);
      for (int K = 1; K <= 5; ++K) {
        for (auto kind : {ObservableKind::GraphDistance, ObservableKind::CutPoints}) {
          const auto dd = dyadic_decompose(p, kind, K);
          REQUIRE(dd.identity_residual() == 0.0);
          REQUIRE(dd.total == observable(SegmentView(p), kind));
          REQUIRE(dd.errors.size() == static_cast<std::size_t>(K));
          for (int k = 0; k < K; ++k) {
            REQUIRE(dd.errors[k].size() == (1u << k));
            for (double e : dd.errors[k]) REQUIRE(e >= 0.0);
          }
        }
        const auto dr = dyadic_decompose(p, ObservableKind::EffectiveResistance, K);
        REQUIRE(std::abs(dr.identity_residual()) <= K * (1 << K) * 1e-8 * 256);
      }
    }
  }
}

TEST_CASE("dyadic decomposition: interval layout and errors") {
  const WalkPath p = simulate_walk(5, 96, 2, 0);
  const auto dd = dyadic_decompose(p, ObservableKind::CutPoints, 2);
  CHECK(dd.interval(0, 0) == std::pair<std::size_t, std::size_t>{0, 96});
  CHECK(dd.interval(2, 3) == std::pair<std::size_t, std::size_t>{72, 96});
  CHECK(dd.errors[1][1] == observable(SegmentView(p, 48, 72), ObservableKind::CutPoints) +
                               observable(SegmentView(p, 72, 96), ObservableKind::CutPoints) -
                               observable(SegmentView(p, 48, 96), ObservableKind::CutPoints));
  CHECK_THROWS_AS(dyadic_decompose(p, ObservableKind::CutPoints, 6), std::invalid_argument);
  CHECK_THROWS_AS(dyadic_decompose(p, ObservableKind::CutPoints, 0), std::invalid_argument);
}

TEST_CASE("d = 6 per-level second moments scale like n") {
  // Each level sum sum_l E^(k,l) has E[(.)^2] of order n. The tail of E is
  // l^-1 here, so the estimate needs thousands of samples to settle.
  const std::size_t n = 4096;
  const int K = 4;
  const int samples = 4000;
  std::vector<double> m2(K, 0.0);
  for (int s = 0; s < samples; ++s) {
    const auto dd = dyadic_decompose(simulate_walk(6, n, 606, s), ObservableKind::CutPoints, K);
    for (int k = 0; k < K; ++k) m2[k] += dd.level_sum(k) * dd.level_sum(k) / samples;
  }
  const auto [lo, hi] = std::minmax_element(m2.begin(), m2.end());
  MESSAGE("second moments / n: " << m2[0] / n << " " << m2[1] / n << " " << m2[2] / n << " "
                                 << m2[3] / n);
  CHECK(*hi / *lo < 4.0);
  CHECK(*lo / n > 0.05);
  CHECK(*hi / n < 1.0);
}

TEST_CASE("same-level cross terms on disjoint increments are uncorrelated") {
  const int samples = 4000;
  std::vector<double> a(samples), b(samples);
  for (int s = 0; s < samples; ++s) {
    const auto dd = dyadic_decompose(simulate_walk(7, 1024, 70, s), ObservableKind::CutPoints, 3);
    a[s] = dd.errors[2][0];
    b[s] = dd.errors[2][2];
  }
  double ma = 0, mb = 0;
  for (int s = 0; s < samples; ++s) {
    ma += a[s] / samples;
    mb += b[s] / samples;
  }
  double cov = 0, cov2 = 0;
  for (int s = 0; s < samples; ++s) {
    const double prod = (a[s] - ma) * (b[s] - mb);
    cov += prod / samples;
    cov2 += prod * prod / samples;
  }
  const double se = std::sqrt((cov2 - cov * cov) / samples);
  CHECK(std::abs(cov) <= 3.0 * se);
}

TEST_CASE("tail samples") {
  SUBCASE("nonnegative in d = 7") {
    for (double e : cross_term_tail_samples(7, 256, ObservableKind::CutPoints, 500, 1)) {
      REQUIRE(e >= 0.0);
    }
  }
  SUBCASE("large values occur in d = 5") {
    const auto xs = cross_term_tail_samples(5, 1024, ObservableKind::CutPoints, 10000, 5);
    const auto big = std::count_if(xs.begin(), xs.end(), [](double e) { return e >= 256.0; });
    MESSAGE("P(E >= n/4) ~ " << double(big) / xs.size());
    CHECK(big > 0);
  }
  SUBCASE("thread count does not change the output") {
    const auto one = cross_term_tail_samples(6, 128, ObservableKind::GraphDistance, 300, 9, {}, 1);
    const auto four = cross_term_tail_samples(6, 128, ObservableKind::GraphDistance, 300, 9, {}, 4);
    CHECK(one == four);
    const auto tail =
        cross_term_tail_samples(6, 128, ObservableKind::GraphDistance, 100, 9, {}, 2, 200);
    CHECK(std::equal(tail.begin(), tail.end(), one.begin() + 200));
  }
  CHECK_THROWS(cross_term_tail_samples(5, 16, ObservableKind::CutPoints, 0, 1));
}

TEST_CASE("sample CSV rows") {
  std::ostringstream out;
  write_sample_csv_header(out);
  write_sample_csv_row(out, ObservableKind::CutPoints, 7, 2048, 0, 0, 3.0, 1, 5);
  write_sample_csv_row(out, ObservableKind::EffectiveResistance, 7, 2048, 1, 1, 0.25, 1, 6);
  CHECK(out.str() ==
        "kind,d,n,k,l,value,seed,stream\ncut,7,2048,0,0,3,1,5\nresistance,7,2048,1,1,0.25,1,6\n");
}
