#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rwrange/rng.hpp"
#include "rwrange/stats.hpp"

using namespace rwrange;

namespace {

// Inverse transform: P(E >= l) = l^-alpha for l >= 1.
std::vector<double> pareto(std::size_t count, double alpha, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  std::vector<double> xs(count);
  for (auto& x : xs) x = std::pow(1.0 - rng.uniform01(), -1.0 / alpha);
  return xs;
}

std::vector<double> normals(std::size_t count, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  std::vector<double> xs(count);
  for (auto& x : xs) x = rng.normal();
  return xs;
}

}  // namespace

TEST_CASE("fit_line recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("tail fit on a synthetic power law") {
  const auto xs = pareto(20000, 1.5, 4);
  const TailFit fit = fit_tail_exponent(xs, 2.0, 200.0);
  CHECK(fit.slope == doctest::Approx(-1.5).epsilon(0.05 / 1.5));
  CHECK(fit.n_points >= 8);
  CHECK(fit.sample_count == 20000);
  CHECK(fit.r_squared > 0.99);
}

TEST_CASE("tail fit slope is invariant under rescaling samples and window") {
  auto xs = pareto(5000, 0.5, 8);
  for (auto& x : xs) x = std::floor(x);  // integer data with ties
  const TailFit base = fit_tail_exponent(xs, 3.0, 300.0);
  std::vector<double> scaled(xs);
  for (auto& x : scaled) x *= 8.0;  // power of two keeps the products exact
  const TailFit moved = fit_tail_exponent(scaled, 24.0, 2400.0);
  CHECK(moved.slope == doctest::Approx(base.slope).epsilon(1e-12));
  CHECK(moved.intercept != doctest::Approx(base.intercept));
}

TEST_CASE("tail fit guards") {
  const auto xs = pareto(2000, 1.5, 1);
  CHECK_THROWS_AS(fit_tail_exponent(pareto(999, 1.5, 1), 1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_tail_exponent(xs, 0.5, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_tail_exponent(xs, 10.0, 10.0), std::invalid_argument);
  // Beyond the largest sample every grid point has zero survival.
  CHECK_THROWS_AS(fit_tail_exponent(xs, 1e7, 1e9), std::invalid_argument);
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  CHECK(empirical_survival(sorted, 0.5) == 1.0);
  CHECK(empirical_survival(sorted, sorted.back() + 1) == 0.0);
}

TEST_CASE("variance summary") {
  const auto xs = normals(4000, 3);
  const VariancePoint p = summarize_variance(64, xs);
  CHECK(p.variance == doctest::Approx(1.0).epsilon(0.1));
  // For normal data SE(var) ~ sigma^2 sqrt(2 / (N - 1)).
  CHECK(p.std_error == doctest::Approx(std::sqrt(2.0 / 3999.0)).epsilon(0.15));

  std::vector<double> shuffled(xs);
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 1234, shuffled.end());
  const VariancePoint q = summarize_variance(64, shuffled);
  CHECK(q.variance == p.variance);
  CHECK(q.std_error == p.std_error);
  CHECK(q.mean == p.mean);
}

TEST_CASE("variance scan model scores") {
  std::vector<VariancePoint> grid;
  for (std::size_t n = 256; n <= 8192; n *= 2) {
    grid.push_back({n, 0.0, 3.0 * std::pow(double(n), 1.5), 1000, 1.0});
  }
  const VarianceScan scan = variance_scan_from_points(ObservableKind::CutPoints, 5, grid);
  CHECK(scan.slope == doctest::Approx(1.5));
  CHECK(scan.best_law() == VarianceLaw::ThreeHalves);
  CHECK(scan.score(VarianceLaw::ThreeHalves) == doctest::Approx(1.0));
  // Unit-slope residual for n against slope 1.5 data: 1 - (0.5 / 1.5)^2.
  CHECK(scan.score(VarianceLaw::Linear) == doctest::Approx(8.0 / 9.0));

  CHECK_THROWS_AS(variance_scan_from_points(ObservableKind::CutPoints, 5, {grid[0]}),
                  std::invalid_argument);
  auto unordered = grid;
  std::swap(unordered[0], unordered[1]);
  CHECK_THROWS_AS(variance_scan_from_points(ObservableKind::CutPoints, 5, unordered),
                  std::invalid_argument);
  auto thin = grid;
  thin[2].sample_count = 499;
  CHECK_THROWS_AS(variance_scan_from_points(ObservableKind::CutPoints, 5, thin),
                  std::invalid_argument);
}

TEST_CASE("variance scan argument checks") {
  const std::size_t one[] = {256};
  CHECK_THROWS_AS(variance_scan(ObservableKind::CutPoints, 7, one, 500, 1), std::invalid_argument);
  const std::size_t two[] = {256, 512};
  CHECK_THROWS_AS(variance_scan(ObservableKind::CutPoints, 7, two, 499, 1), std::invalid_argument);
  const std::size_t odd[] = {256, 300};
  CHECK_THROWS_AS(variance_scan(ObservableKind::CutPoints, 7, odd, 500, 1), std::invalid_argument);
}

TEST_CASE("variance scan on walks is deterministic across thread counts") {
  const std::size_t grid[] = {64, 128, 256};
  const auto a = variance_scan(ObservableKind::CutPoints, 7, grid, 500, 12, {}, 1);
  const auto b = variance_scan(ObservableKind::CutPoints, 7, grid, 500, 12, {}, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.grid[i].variance == b.grid[i].variance);
    CHECK(a.grid[i].std_error == b.grid[i].std_error);
  }
  CHECK(a.slope == b.slope);
}

TEST_CASE("CLT diagnostics on normal input") {
  const auto xs = normals(5000, 21);
  const CltReport r = clt_report(xs);
  CHECK(std::abs(r.skewness) < 0.1);
  CHECK(std::abs(r.excess_kurtosis) < 0.2);
  CHECK(r.ks_distance < 0.02);
  CHECK(r.median_abs_standardized == doctest::Approx(0.6745).epsilon(0.05));
}

TEST_CASE("standardized samples have mean 0 and variance 1") {
  for (const auto& xs : {normals(1500, 2), pareto(1500, 2.5, 3)}) {
    const auto z = standardize(xs);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(ss / (z.size() - 1) == doctest::Approx(1.0).epsilon(1e-12));
    const CltReport r = clt_report(xs);
    CHECK(r.ks_distance >= 0.0);
    CHECK(r.ks_distance <= 1.0);
    CHECK(std::isfinite(r.skewness));
  }
}

TEST_CASE("CLT guards") {
  CHECK_THROWS_AS(clt_report(normals(999, 1)), std::invalid_argument);
  CHECK_THROWS_AS(clt_report(std::vector<double>(2000, 4.0)), std::invalid_argument);
  CHECK_THROWS_AS(clt_diagnostics(ObservableKind::CutPoints, 7, 64, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("normal cdf") {
  CHECK(standard_normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(standard_normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}
