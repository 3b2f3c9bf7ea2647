#include "rwrange/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rwrange/parallel.hpp"
#include "rwrange/rng.hpp"

namespace rwrange {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("line fit needs >= 2 paired points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  fit.slope_std_error = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return fit;
}

double empirical_survival(std::span<const double> sorted, double l) noexcept {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), l);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

TailFit fit_tail_exponent(std::span<const double> samples, double l_min, double l_max,
                          std::size_t grid_points) {
  if (samples.size() < kMinTailSamples) {
    throw std::invalid_argument("tail fit needs at least " + std::to_string(kMinTailSamples) +
                                " samples");
  }
  if (!(l_min >= 1.0 && l_min < l_max)) {
    throw std::invalid_argument("tail window must satisfy 1 <= l_min < l_max");
  }
  if (grid_points < kMinTailGridPoints) throw std::invalid_argument("grid too coarse");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> xs, ys;
  const double ratio = std::log(l_max / l_min) / static_cast<double>(grid_points - 1);
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double l = l_min * std::exp(ratio * static_cast<double>(j));
    const double s = empirical_survival(sorted, l);
    if (s <= 0.0) continue;
    xs.push_back(std::log(l));
    ys.push_back(std::log(s));
  }
  if (xs.size() < kMinTailGridPoints) {
    throw std::invalid_argument("only " + std::to_string(xs.size()) +
                                " grid points with nonzero survival; window too aggressive");
  }
  const LineFit line = fit_line(xs, ys);
  return {line.slope, line.intercept, line.r_squared, l_min, l_max, xs.size(), samples.size()};
}

std::string_view to_string(VarianceLaw law) noexcept {
  switch (law) {
    case VarianceLaw::Linear: return "n";
    case VarianceLaw::NLogN: return "n_log_n";
    case VarianceLaw::ThreeHalves: return "n^1.5";
    case VarianceLaw::SquareOverLogSquare: return "n^2/log^2_n";
  }
  return "unknown";
}

double variance_law_value(VarianceLaw law, double n) noexcept {
  switch (law) {
    case VarianceLaw::Linear: return n;
    case VarianceLaw::NLogN: return n * std::log(n);
    case VarianceLaw::ThreeHalves: return n * std::sqrt(n);
    case VarianceLaw::SquareOverLogSquare: return n * n / (std::log(n) * std::log(n));
  }
  return n;
}

double VarianceScan::score(VarianceLaw law) const {
  for (const auto& s : model_scores) {
    if (s.law == law) return s.r_squared;
  }
  throw std::invalid_argument("law not scored");
}

VarianceLaw VarianceScan::best_law() const {
  return std::max_element(model_scores.begin(), model_scores.end(),
                          [](const ModelScore& a, const ModelScore& b) {
                            return a.r_squared < b.r_squared;
                          })
      ->law;
}

VariancePoint summarize_variance(std::size_t n, std::span<const double> samples) {
  const std::size_t count = samples.size();
  if (count < 3) throw std::invalid_argument("variance needs at least 3 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / (count - 1);

  // Delete-1 jackknife in closed form.
  const double nn = static_cast<double>(count);
  std::vector<double> loo(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double dev = x[i] - mean;
    loo[i] = (ss - dev * dev * nn / (nn - 1.0)) / (nn - 2.0);
  }
  const double loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / nn;
  double jk = 0.0;
  for (double v : loo) jk += (v - loo_mean) * (v - loo_mean);
  return {n, mean, var, count, std::sqrt((nn - 1.0) / nn * jk)};
}

VarianceScan variance_scan_from_points(ObservableKind kind, int d,
                                       std::vector<VariancePoint> grid) {
  if (grid.size() < 2) throw std::invalid_argument("variance scan needs >= 2 grid points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && grid[i].n <= grid[i - 1].n) {
      throw std::invalid_argument("variance grid must be strictly increasing in n");
    }
    if (grid[i].sample_count < kMinVarianceSamples) {
      throw std::invalid_argument("insufficient samples: need >= " +
                                  std::to_string(kMinVarianceSamples) + " per grid point");
    }
    if (!(grid[i].variance > 0.0)) throw std::invalid_argument("zero sample variance");
  }
  VarianceScan scan;
  scan.kind = kind;
  scan.d = d;
  scan.grid = std::move(grid);

  std::vector<double> log_n, log_var;
  for (const auto& p : scan.grid) {
    log_n.push_back(std::log(static_cast<double>(p.n)));
    log_var.push_back(std::log(p.variance));
  }
  const LineFit line = fit_line(log_n, log_var);
  scan.slope = line.slope;
  scan.slope_std_error = line.slope_std_error;
  scan.intercept = line.intercept;

  const double mean_log_var =
      std::accumulate(log_var.begin(), log_var.end(), 0.0) / log_var.size();
  double total = 0.0;
  for (double v : log_var) total += (v - mean_log_var) * (v - mean_log_var);
  for (VarianceLaw law : kAllVarianceLaws) {
    std::vector<double> resid;
    for (std::size_t i = 0; i < scan.grid.size(); ++i) {
      resid.push_back(log_var[i] -
                      std::log(variance_law_value(law, static_cast<double>(scan.grid[i].n))));
    }
    const double a = std::accumulate(resid.begin(), resid.end(), 0.0) / resid.size();
    double sse = 0.0;
    for (double r : resid) sse += (r - a) * (r - a);
    scan.model_scores.push_back({law, a, total > 0 ? 1.0 - sse / total : 1.0});
  }
  return scan;
}

std::vector<double> observable_samples(ObservableKind kind, int d, std::size_t n,
                                       std::size_t samples, std::uint64_t seed,
                                       const ResistanceSolveConfig& cfg, unsigned threads,
                                       std::uint64_t first_stream) {
  check_dimension(d);
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  const std::uint64_t cell_seed = derive_seed(seed, n);
  return parallel_map(first_stream, first_stream + samples, threads, [&](std::size_t stream) {
    const WalkPath path = simulate_walk(d, n, cell_seed, stream);
    return observable(SegmentView(path), kind, cfg);
  });
}

VarianceScan variance_scan(ObservableKind kind, int d, std::span<const std::size_t> n_grid,
                           std::size_t samples_per_n, std::uint64_t seed,
                           const ResistanceSolveConfig& cfg, unsigned threads) {
  if (n_grid.size() < 2) throw std::invalid_argument("variance scan needs >= 2 grid points");
  if (samples_per_n < kMinVarianceSamples) {
    throw std::invalid_argument("insufficient samples: need >= " +
                                std::to_string(kMinVarianceSamples) + " per grid point");
  }
  std::vector<VariancePoint> grid;
  for (std::size_t n : n_grid) {
    if (n == 0 || (n & (n - 1)) != 0) {
      throw std::invalid_argument("variance grid entries must be powers of two");
    }
    const auto xs = observable_samples(kind, d, n, samples_per_n, seed, cfg, threads);
    grid.push_back(summarize_variance(n, xs));
  }
  return variance_scan_from_points(kind, d, std::move(grid));
}

double standard_normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> standardize(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two samples");
  const double nn = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / nn;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (nn - 1.0));
  if (!(sd > 0.0)) throw std::invalid_argument("zero sample variance");
  std::vector<double> z(samples.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (samples[i] - mean) / sd;
  return z;
}

CltReport clt_report(std::span<const double> samples) {
  const std::size_t count = samples.size();
  if (count < kMinCltSamples) {
    throw std::invalid_argument("CLT diagnostics need at least " +
                                std::to_string(kMinCltSamples) + " samples");
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double nn = static_cast<double>(count);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nn;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (nn - 1.0));
  if (!(sd > 0.0)) throw std::invalid_argument("zero sample variance");

  CltReport r;
  r.sample_count = count;
  r.mean = mean;
  r.std_dev = sd;
  double m3 = 0.0, m4 = 0.0, ks = 0.0;
  std::vector<double> abs_z(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = (x[i] - mean) / sd;
    m3 += z * z * z;
    m4 += z * z * z * z;
    abs_z[i] = std::abs(z);
    const double phi = standard_normal_cdf(z);
    ks = std::max({ks, static_cast<double>(i + 1) / nn - phi, phi - static_cast<double>(i) / nn});
  }
  r.skewness = m3 / nn;
  r.excess_kurtosis = m4 / nn - 3.0;
  r.ks_distance = ks;
  std::sort(abs_z.begin(), abs_z.end());
  r.median_abs_standardized = count % 2 == 1
                                  ? abs_z[count / 2]
                                  : 0.5 * (abs_z[count / 2 - 1] + abs_z[count / 2]);
  return r;
}

CltReport clt_diagnostics(ObservableKind kind, int d, std::size_t n, std::size_t samples,
                          std::uint64_t seed, const ResistanceSolveConfig& cfg,
                          unsigned threads) {
  if (samples < kMinCltSamples) {
    throw std::invalid_argument("CLT diagnostics need at least " +
                                std::to_string(kMinCltSamples) + " samples");
  }
  const auto xs = observable_samples(kind, d, n, samples, seed, cfg, threads);
  CltReport r = clt_report(xs);
  r.n = n;
  r.d = d;
  r.kind = kind;
  return r;
}

}  // namespace rwrange
