#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rwrange/observables.hpp"

namespace rwrange {

/// Least-squares line through (log l, log P(E >= l)) on a geometric l-grid.
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double l_min = 0.0;
  double l_max = 0.0;
  std::size_t n_points = 0;
  std::size_t sample_count = 0;
};

inline constexpr std::size_t kMinTailSamples = 1000;
inline constexpr std::size_t kMinTailGridPoints = 8;
inline constexpr std::size_t kTailGridPoints = 24;

/// Empirical P(E >= l) from ascending-sorted samples.
double empirical_survival(std::span<const double> sorted, double l) noexcept;

/// Survival is estimated by rank; grid points with zero survival are dropped.
/// Throws if fewer than kMinTailGridPoints usable points remain.
TailFit fit_tail_exponent(std::span<const double> samples, double l_min, double l_max,
                          std::size_t grid_points = kTailGridPoints);

enum class VarianceLaw { Linear, NLogN, ThreeHalves, SquareOverLogSquare };

inline constexpr VarianceLaw kAllVarianceLaws[] = {
    VarianceLaw::Linear, VarianceLaw::NLogN, VarianceLaw::ThreeHalves,
    VarianceLaw::SquareOverLogSquare};

std::string_view to_string(VarianceLaw law) noexcept;
double variance_law_value(VarianceLaw law, double n) noexcept;

struct VariancePoint {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t sample_count = 0;
  /// Delete-1 jackknife standard error of the variance.
  double std_error = 0.0;
};

/// Fit of log Var = log alpha + log f(n) with unit slope; r_squared is taken
/// against the total variation of log Var and can be negative.
struct ModelScore {
  VarianceLaw law;
  double log_alpha = 0.0;
  double r_squared = 0.0;
};

struct VarianceScan {
  ObservableKind kind = ObservableKind::CutPoints;
  int d = 0;
  std::vector<VariancePoint> grid;
  /// Free log-log regression of Var on n.
  double slope = 0.0;
  double slope_std_error = 0.0;
  double intercept = 0.0;
  std::vector<ModelScore> model_scores;

  double score(VarianceLaw law) const;
  VarianceLaw best_law() const;
};

inline constexpr std::size_t kMinVarianceSamples = 500;

/// Sorts a copy first so the result does not depend on sample order.
VariancePoint summarize_variance(std::size_t n, std::span<const double> samples);

/// Grid must be strictly increasing with at least two points.
VarianceScan variance_scan_from_points(ObservableKind kind, int d,
                                       std::vector<VariancePoint> grid);

/// X[0,n] for fresh walks; stream s uses simulate_walk(d, n, derive_seed(seed, n), s).
std::vector<double> observable_samples(ObservableKind kind, int d, std::size_t n,
                                       std::size_t samples, std::uint64_t seed,
                                       const ResistanceSolveConfig& cfg = {},
                                       unsigned threads = 1, std::uint64_t first_stream = 0);

VarianceScan variance_scan(ObservableKind kind, int d, std::span<const std::size_t> n_grid,
                           std::size_t samples_per_n, std::uint64_t seed,
                           const ResistanceSolveConfig& cfg = {}, unsigned threads = 1);

struct CltReport {
  std::size_t n = 0;
  int d = 0;
  ObservableKind kind = ObservableKind::CutPoints;
  std::size_t sample_count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// sup |F_emp(z) - Phi(z)| over standardized samples.
  double ks_distance = 0.0;
  double median_abs_standardized = 0.0;
};

inline constexpr std::size_t kMinCltSamples = 1000;

double standard_normal_cdf(double z) noexcept;

/// (x - mean) / sd with the (n-1) standard deviation.
std::vector<double> standardize(std::span<const double> samples);

/// Standardizes by sample mean and (n-1) standard deviation.
CltReport clt_report(std::span<const double> samples);

CltReport clt_diagnostics(ObservableKind kind, int d, std::size_t n, std::size_t samples,
                          std::uint64_t seed, const ResistanceSolveConfig& cfg = {},
                          unsigned threads = 1);

/// Ordinary least squares y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_std_error = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace rwrange
