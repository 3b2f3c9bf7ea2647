#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "rwrange/lattice.hpp"
#include "rwrange/observables.hpp"

namespace rwrange {

/// Subadditivity defect X[0,m] + X[m,t] - X[0,t].
struct CrossTerm {
  ObservableKind kind;
  std::size_t n_left;
  std::size_t n_right;
  double value;
};

/// Requires 0 < split < end <= path.steps().
CrossTerm cross_term(const WalkPath& path, ObservableKind kind, std::size_t split,
                     std::size_t end, const ResistanceSolveConfig& cfg = {});

/// X[0,n] split over 2^K equal sub-intervals. errors[k][l] is the cross term
/// of parent interval l at level k (0 <= k < K, 0 <= l < 2^k):
///   X[child 2l] + X[child 2l+1] - X[parent l].
/// Telescoping gives total == sum(leaves) - sum(errors).
struct DyadicDecomposition {
  ObservableKind kind;
  std::size_t n = 0;
  int levels = 0;
  double total = 0.0;
  std::vector<double> leaves;
  std::vector<std::vector<double>> errors;

  /// [begin, end] time window of interval l at level k.
  std::pair<std::size_t, std::size_t> interval(int k, std::size_t l) const noexcept {
    const std::size_t width = n >> k;
    return {l * width, (l + 1) * width};
  }
  double leaf_sum() const noexcept;
  double error_sum() const noexcept;
  double level_sum(int k) const noexcept;
  /// total - (leaf_sum - error_sum); zero for the integer observables.
  double identity_residual() const noexcept { return total - (leaf_sum() - error_sum()); }
};

/// Requires K >= 1 and 2^K dividing path.steps(); never rounds.
DyadicDecomposition dyadic_decompose(const WalkPath& path, ObservableKind kind, int levels,
                                     const ResistanceSolveConfig& cfg = {});

/// E_n for streams first_stream .. first_stream+samples-1: each stream walks
/// 2n steps and contributes X[0,n] + X[n,2n] - X[0,2n]. Output is in stream
/// order for any thread count.
std::vector<double> cross_term_tail_samples(int d, std::size_t n, ObservableKind kind,
                                            std::size_t samples, std::uint64_t seed,
                                            const ResistanceSolveConfig& cfg = {},
                                            unsigned threads = 1,
                                            std::uint64_t first_stream = 0);

/// Sample dump with columns kind,d,n,k,l,value,seed,stream.
void write_sample_csv_header(std::ostream& out);
void write_sample_csv_row(std::ostream& out, ObservableKind kind, int d, std::size_t n, int k,
                          std::size_t l, double value, std::uint64_t seed,
                          std::uint64_t stream);

}  // namespace rwrange
