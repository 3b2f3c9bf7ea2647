#include "rwrange/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "rwrange/parallel.hpp"
#include "rwrange/rng.hpp"

namespace rwrange {

void CapacityOptions::validate() const {
  if (!(escape_radius_factor >= 4.0)) {
    throw std::invalid_argument("escape_radius_factor must be >= 4");
  }
  if (trials_per_point == 0) throw std::invalid_argument("trials_per_point must be >= 1");
  if (!(min_jump_radius >= 2.0)) throw std::invalid_argument("min_jump_radius must be >= 2");
}

PointIndex range_point_set(const SegmentView& view) {
  PointIndex set(view.dim(), view.length() + 1);
  for (std::size_t m = view.begin(); m <= view.end(); ++m) set.insert(view.position(m));
  return set;
}

namespace {

// Cells of side h that are within one cell (Chebyshev) of a cell holding a
// point of the set. A position whose cell is not listed is at Euclidean
// distance >= h from the set. Hash collisions only add false "near" answers.
class NearCells {
 public:
  NearCells(const PointIndex& set, double h) : h_(h), d_(set.dim()) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::int64_t> occupied;
    std::array<std::int64_t, kMaxDim> cell{};
    for (std::uint32_t id = 0; id < set.size(); ++id) {
      const auto p = set.point(id);
      for (int k = 0; k < d_; ++k) cell[k] = floor_div(static_cast<double>(p[k]));
      if (seen.insert(hash_coords({cell.data(), static_cast<std::size_t>(d_)})).second) {
        occupied.insert(occupied.end(), cell.begin(), cell.begin() + d_);
      }
    }
    std::size_t offsets = 1;
    for (int k = 0; k < d_; ++k) offsets *= 3;
    near_.reserve(seen.size() * offsets);
    for (std::size_t c = 0; c < occupied.size(); c += d_) {
      for (std::size_t o = 0; o < offsets; ++o) {
        std::size_t code = o;
        for (int k = 0; k < d_; ++k) {
          cell[k] = occupied[c + k] + static_cast<std::int64_t>(code % 3) - 1;
          code /= 3;
        }
        near_.insert(hash_coords({cell.data(), static_cast<std::size_t>(d_)}));
      }
    }
  }

  double radius() const noexcept { return h_; }

  bool is_near(const double* y) const {
    std::array<std::int64_t, kMaxDim> cell{};
    for (int k = 0; k < d_; ++k) cell[k] = floor_div(y[k]);
    return near_.count(hash_coords({cell.data(), static_cast<std::size_t>(d_)})) > 0;
  }

 private:
  std::int64_t floor_div(double v) const noexcept {
    return static_cast<std::int64_t>(std::floor(v / h_));
  }

  double h_;
  int d_;
  std::unordered_set<std::uint64_t> near_;
};

struct Geometry {
  std::array<double, kMaxDim> centroid{};
  double max_radius = 0.0;  // max distance of a set point from the centroid
};

Geometry set_geometry(const PointIndex& set) {
  Geometry g;
  const int d = set.dim();
  for (std::uint32_t id = 0; id < set.size(); ++id) {
    const auto p = set.point(id);
    for (int k = 0; k < d; ++k) g.centroid[k] += static_cast<double>(p[k]);
  }
  for (int k = 0; k < d; ++k) g.centroid[k] /= static_cast<double>(set.size());
  for (std::uint32_t id = 0; id < set.size(); ++id) {
    const auto p = set.point(id);
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = static_cast<double>(p[k]) - g.centroid[k];
      r2 += diff * diff;
    }
    g.max_radius = std::max(g.max_radius, std::sqrt(r2));
  }
  return g;
}

class EscapeSampler {
 public:
  EscapeSampler(const PointIndex& set, const Geometry& geometry, double escape_radius,
                const CapacityOptions& options)
      : set_(set), geo_(geometry), radius_(escape_radius), d_(set.dim()),
        far_field_(options.far_field), min_jump_(options.min_jump_radius) {
    if (far_field_) {
      for (double h = options.min_jump_radius; h < radius_; h *= 4.0) levels_.emplace_back(set, h);
      std::reverse(levels_.begin(), levels_.end());
    }
  }

  bool escapes(std::uint32_t source, StreamRng& rng) const {
    std::array<std::int64_t, kMaxDim> pos{};
    const auto start = set_.point(source);
    std::copy(start.begin(), start.end(), pos.begin());
    const std::span<const std::int64_t> pos_view(pos.data(), d_);
    const double r2_max = radius_ * radius_;
    const auto choices = static_cast<std::uint32_t>(2 * d_);
    std::array<double, kMaxDim> y{};

    for (;;) {
      // Lattice stepping near the set.
      for (std::uint32_t step = 1;; ++step) {
        const std::uint32_t move = rng.uniform_below(choices);
        pos[move >> 1] += (move & 1u) ? -1 : 1;
        if (set_.contains(pos_view)) return false;
        double r2 = 0.0;
        for (int k = 0; k < d_; ++k) {
          y[k] = static_cast<double>(pos[k]);
          const double diff = y[k] - geo_.centroid[k];
          r2 += diff * diff;
        }
        if (r2 > r2_max) return true;
        if (far_field_ && step % 8 == 0 && free_radius(y.data(), std::sqrt(r2)) > 0.0) break;
      }
      // Walk on spheres while the free ball is large enough.
      for (;;) {
        double r2 = 0.0;
        for (int k = 0; k < d_; ++k) {
          const double diff = y[k] - geo_.centroid[k];
          r2 += diff * diff;
        }
        const double r = std::sqrt(r2);
        if (radius_ - r < 1.0) return true;
        const double free = free_radius(y.data(), r);
        if (free <= 0.0) break;
        const double jump = std::min(free, radius_ - r);
        std::array<double, kMaxDim> dir{};
        double norm2 = 0.0;
        for (int k = 0; k < d_; ++k) {
          dir[k] = rng.normal();
          norm2 += dir[k] * dir[k];
        }
        const double scale = jump / std::sqrt(norm2);
        for (int k = 0; k < d_; ++k) y[k] += scale * dir[k];
      }
      for (int k = 0; k < d_; ++k) pos[k] = static_cast<std::int64_t>(std::llround(y[k]));
      if (set_.contains(pos_view)) return false;
    }
  }

 private:
  // Lower bound on the distance to the set if at least min_jump_radius, else 0.
  double free_radius(const double* y, double r_from_centroid) const {
    double best = r_from_centroid - geo_.max_radius - 1.0;
    for (const auto& level : levels_) {
      if (level.radius() <= best) break;
      if (!level.is_near(y)) {
        best = level.radius();
        break;
      }
    }
    return best >= min_jump_ ? best : 0.0;
  }

  const PointIndex& set_;
  const Geometry& geo_;
  double radius_;
  int d_;
  bool far_field_;
  double min_jump_;
  std::vector<NearCells> levels_;  // coarsest first
};

}  // namespace

CapacityEstimate capacity_estimate(const PointIndex& set, const CapacityOptions& options) {
  options.validate();
  if (set.size() == 0) throw std::invalid_argument("capacity of an empty set");
  const Geometry geo = set_geometry(set);
  CapacityEstimate est;
  est.set_size = set.size();
  est.diameter = 2.0 * geo.max_radius;
  est.radius_factor = options.escape_radius_factor;
  est.escape_radius = options.escape_radius_factor * std::max(est.diameter, 1.0);
  est.escapes_per_point = options.trials_per_point;

  std::vector<std::uint32_t> sources(set.size());
  std::iota(sources.begin(), sources.end(), 0u);
  if (options.source_points > 0 && options.source_points < set.size()) {
    StreamRng pick(options.seed, ~std::uint64_t{0});
    for (std::size_t i = 0; i < options.source_points; ++i) {
      const auto j = i + pick.uniform_below(static_cast<std::uint32_t>(set.size() - i));
      std::swap(sources[i], sources[j]);
    }
    sources.resize(options.source_points);
  }
  est.sources = sources.size();

  const EscapeSampler sampler(set, geo, est.escape_radius, options);
  const std::uint32_t trials = options.trials_per_point;
  const auto escapes =
      parallel_map(0, sources.size(), options.threads, [&](std::size_t i) {
        std::uint32_t count = 0;
        for (std::uint32_t t = 0; t < trials; ++t) {
          StreamRng rng(options.seed, sources[i], t);
          if (sampler.escapes(sources[i], rng)) ++count;
        }
        return count;
      });

  const double m = static_cast<double>(sources.size());
  std::vector<double> frac(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) frac[i] = escapes[i] / double(trials);
  const double mean = std::accumulate(frac.begin(), frac.end(), 0.0) / m;
  est.estimate = mean * static_cast<double>(set.size());
  if (sources.size() == set.size()) {
    double var = 0.0;
    for (double f : frac) var += f * (1.0 - f) / trials;
    est.std_error = std::sqrt(var);
  } else {
    double ss = 0.0;
    for (double f : frac) ss += (f - mean) * (f - mean);
    const double sample_var = sources.size() > 1 ? ss / (m - 1.0) : 0.0;
    est.std_error = static_cast<double>(set.size()) * std::sqrt(sample_var / m);
  }
  return est;
}

CapacityEstimate capacity_estimate(std::span<const LatticePoint> points, int d,
                                   const CapacityOptions& options) {
  check_dimension(d);
  PointIndex set(d, points.size());
  for (const auto& p : points) {
    if (p.dim() != d) throw std::invalid_argument("point dimension mismatch");
    set.insert(p.coords());
  }
  return capacity_estimate(set, options);
}

}  // namespace rwrange
