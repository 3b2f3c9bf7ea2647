#include "rwrange/decomposition.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rwrange/csv.hpp"
#include "rwrange/parallel.hpp"

namespace rwrange {

CrossTerm cross_term(const WalkPath& path, ObservableKind kind, std::size_t split,
                     std::size_t end, const ResistanceSolveConfig& cfg) {
  if (!(0 < split && split < end && end <= path.steps())) {
    throw std::invalid_argument("degenerate split: need 0 < split < end <= n");
  }
  const double left = observable(SegmentView(path, 0, split), kind, cfg);
  const double right = observable(SegmentView(path, split, end), kind, cfg);
  const double whole = observable(SegmentView(path, 0, end), kind, cfg);
  return {kind, split, end - split, left + right - whole};
}

double DyadicDecomposition::leaf_sum() const noexcept {
  return std::accumulate(leaves.begin(), leaves.end(), 0.0);
}

double DyadicDecomposition::error_sum() const noexcept {
  double s = 0.0;
  for (int k = 0; k < levels; ++k) s += level_sum(k);
  return s;
}

double DyadicDecomposition::level_sum(int k) const noexcept {
  return std::accumulate(errors[k].begin(), errors[k].end(), 0.0);
}

DyadicDecomposition dyadic_decompose(const WalkPath& path, ObservableKind kind, int levels,
                                     const ResistanceSolveConfig& cfg) {
  const std::size_t n = path.steps();
  if (levels < 1 || levels > 40) throw std::invalid_argument("levels must be in [1, 40]");
  const std::size_t parts = std::size_t{1} << levels;
  if (n % parts != 0) {
    throw std::invalid_argument("walk length " + std::to_string(n) +
                                " not divisible by 2^" + std::to_string(levels));
  }
  DyadicDecomposition out{kind, n, levels, 0.0, {}, {}};

  // values[k][l] = X over interval l at level k, k = 0..K.
  std::vector<std::vector<double>> values(levels + 1);
  for (int k = 0; k <= levels; ++k) {
    const std::size_t count = std::size_t{1} << k;
    values[k].resize(count);
    for (std::size_t l = 0; l < count; ++l) {
      const auto [a, b] = out.interval(k, l);
      values[k][l] = observable(SegmentView(path, a, b), kind, cfg);
    }
  }
  out.total = values[0][0];
  out.leaves = values[levels];
  out.errors.resize(levels);
  for (int k = 0; k < levels; ++k) {
    const std::size_t count = std::size_t{1} << k;
    out.errors[k].resize(count);
    for (std::size_t l = 0; l < count; ++l) {
      out.errors[k][l] = values[k + 1][2 * l] + values[k + 1][2 * l + 1] - values[k][l];
    }
  }
  return out;
}

std::vector<double> cross_term_tail_samples(int d, std::size_t n, ObservableKind kind,
                                            std::size_t samples, std::uint64_t seed,
                                            const ResistanceSolveConfig& cfg, unsigned threads,
                                            std::uint64_t first_stream) {
  check_dimension(d);
  if (samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  return parallel_map(first_stream, first_stream + samples, threads, [&](std::size_t stream) {
    const WalkPath path = simulate_walk(d, 2 * n, seed, stream);
    return cross_term(path, kind, n, 2 * n, cfg).value;
  });
}

void write_sample_csv_header(std::ostream& out) {
  out << "kind,d,n,k,l,value,seed,stream\n";
}

void write_sample_csv_row(std::ostream& out, ObservableKind kind, int d, std::size_t n, int k,
                          std::size_t l, double value, std::uint64_t seed,
                          std::uint64_t stream) {
  out << to_string(kind) << ',' << d << ',' << n << ',' << k << ',' << l << ','
      << format_value(value) << ',' << seed << ',' << stream << '\n';
}

}  // namespace rwrange
