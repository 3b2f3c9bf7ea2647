#pragma once

#include <cstdint>
#include <stdexcept>

#include "rwrange/range_graph.hpp"

namespace rwrange {

enum class Preconditioner { None, Diagonal };

struct ResistanceSolveConfig {
  /// Target ||r|| / ||b|| for the conjugate gradient iteration.
  double rel_tolerance = 1e-10;
  /// 0 selects 20*sqrt(|V|) + 200, with |V| the size of the system actually solved.
  std::size_t max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::Diagonal;
  /// Eliminate dangling trees and series chains before iterating. Exact.
  bool series_reduction = true;

  void validate() const;
};

/// Thrown when CG does not reach the tolerance within the iteration budget.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

struct ResistanceSolution {
  double resistance = 0.0;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  /// Unknowns left in the grounded system after reduction.
  std::size_t system_size = 0;
};

/// Effective resistance between vertices x and y (unit conductances). Grounds
/// y, solves L' v = e_x by preconditioned CG and returns v_x.
ResistanceSolution solve_resistance(const RangeGraph& g, std::uint32_t x, std::uint32_t y,
                                    const ResistanceSolveConfig& cfg = {});

inline double effective_resistance(const RangeGraph& g, std::uint32_t x, std::uint32_t y,
                                   const ResistanceSolveConfig& cfg = {}) {
  return solve_resistance(g, x, y, cfg).resistance;
}

/// Resistance between the segment endpoints S_a and S_b.
inline double effective_resistance(const RangeGraph& g,
                                   const ResistanceSolveConfig& cfg = {}) {
  return effective_resistance(g, g.source(), g.target(), cfg);
}

inline constexpr std::size_t kDenseVertexLimit = 2000;

/// Reference solve: dense grounded Laplacian, Gaussian elimination with
/// partial pivoting. Throws std::length_error above kDenseVertexLimit.
double effective_resistance_dense(const RangeGraph& g, std::uint32_t x, std::uint32_t y);

inline double effective_resistance_dense(const RangeGraph& g) {
  return effective_resistance_dense(g, g.source(), g.target());
}

}  // namespace rwrange
