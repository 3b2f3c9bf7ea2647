#include "rwrange/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace rwrange {

void ResistanceSolveConfig::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance <= 1e-4)) {
    throw std::invalid_argument("rel_tolerance must lie in (0, 1e-4]");
  }
}

namespace {

struct WeightedEdge {
  std::uint32_t to;
  double conductance;
};

using WeightedAdjacency = std::vector<std::vector<WeightedEdge>>;

void erase_neighbor(std::vector<WeightedEdge>& list, std::uint32_t v) {
  auto it = std::find_if(list.begin(), list.end(), [v](const WeightedEdge& e) { return e.to == v; });
  *it = list.back();
  list.pop_back();
}

void add_conductance(WeightedAdjacency& adj, std::uint32_t u, std::uint32_t w, double g) {
  auto it = std::find_if(adj[u].begin(), adj[u].end(),
                         [w](const WeightedEdge& e) { return e.to == w; });
  if (it != adj[u].end()) {
    it->conductance += g;
    for (auto& e : adj[w]) {
      if (e.to == u) e.conductance += g;
    }
  } else {
    adj[u].push_back({w, g});
    adj[w].push_back({u, g});
  }
}

// Removes non-terminal vertices of degree <= 2: leaves carry no current and a
// degree-2 vertex is two resistors in series. Degrees never increase.
std::vector<char> reduce_series(WeightedAdjacency& adj, std::uint32_t x, std::uint32_t y) {
  std::vector<char> alive(adj.size(), 1);
  std::vector<std::uint32_t> queue;
  auto eligible = [&](std::uint32_t v) {
    return v != x && v != y && alive[v] && adj[v].size() <= 2;
  };
  for (std::uint32_t v = 0; v < adj.size(); ++v) {
    if (eligible(v)) queue.push_back(v);
  }
  while (!queue.empty()) {
    const std::uint32_t v = queue.back();
    queue.pop_back();
    if (!eligible(v)) continue;
    alive[v] = 0;
    auto& nbrs = adj[v];
    if (nbrs.size() == 1) {
      const std::uint32_t u = nbrs[0].to;
      erase_neighbor(adj[u], v);
      if (eligible(u)) queue.push_back(u);
    } else if (nbrs.size() == 2) {
      const auto [u, gu] = nbrs[0];
      const auto [w, gw] = nbrs[1];
      erase_neighbor(adj[u], v);
      erase_neighbor(adj[w], v);
      add_conductance(adj, u, w, gu * gw / (gu + gw));
      if (eligible(u)) queue.push_back(u);
      if (eligible(w)) queue.push_back(w);
    }
    nbrs.clear();
  }
  return alive;
}

}  // namespace

ResistanceSolution solve_resistance(const RangeGraph& g, std::uint32_t x, std::uint32_t y,
                                    const ResistanceSolveConfig& cfg) {
  cfg.validate();
  const std::size_t nv = g.vertex_count();
  if (x >= nv || y >= nv) throw std::invalid_argument("terminal vertex out of range");
  if (x == y) return {};

  WeightedAdjacency adj(nv);
  for (std::uint32_t u = 0; u < nv; ++u) {
    for (auto w : g.neighbors(u)) adj[u].push_back({w, 1.0});
  }
  std::vector<char> alive(nv, 1);
  if (cfg.series_reduction) alive = reduce_series(adj, x, y);

  // Compact the surviving non-grounded vertices.
  std::vector<std::uint32_t> index(nv, PointIndex::kAbsent);
  std::size_t m = 0;
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (alive[v] && v != y) index[v] = static_cast<std::uint32_t>(m++);
  }
  std::vector<double> diag(m, 0.0);
  std::vector<std::size_t> offsets(m + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (index[v] == PointIndex::kAbsent) continue;
    const std::uint32_t row = index[v];
    for (const auto& e : adj[v]) {
      diag[row] += e.conductance;
      if (index[e.to] != PointIndex::kAbsent) {
        cols.push_back(index[e.to]);
        vals.push_back(-e.conductance);
      }
    }
    offsets[row + 1] = cols.size();
  }

  const std::uint32_t src = index[x];
  const std::size_t budget =
      cfg.max_iterations > 0
          ? cfg.max_iterations
          : static_cast<std::size_t>(20.0 * std::sqrt(static_cast<double>(m))) + 200;

  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t r = 0; r < m; ++r) {
      double s = diag[r] * in[r];
      for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) s += vals[k] * in[cols[k]];
      out[r] = s;
    }
  };
  const bool jacobi = cfg.preconditioner == Preconditioner::Diagonal;

  std::vector<double> sol(m, 0.0), r(m, 0.0), z(m), p(m), ap(m);
  r[src] = 1.0;  // ||b|| = 1
  for (std::size_t i = 0; i < m; ++i) z[i] = jacobi ? r[i] / diag[i] : r[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < m; ++i) rz += r[i] * z[i];

  double residual = 1.0;
  for (std::size_t it = 1; it <= budget; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < m; ++i) pap += p[i] * ap[i];
    const double alpha = rz / pap;
    double rr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sol[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr += r[i] * r[i];
    }
    residual = std::sqrt(rr);
    if (residual <= cfg.rel_tolerance) {
      return {sol[src], it, residual, m};
    }
    double rz_next = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      z[i] = jacobi ? r[i] / diag[i] : r[i];
      rz_next += r[i] * z[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradient did not converge in " + std::to_string(budget) +
                        " iterations (residual " + std::to_string(residual) + ")",
                    residual, budget);
}

double effective_resistance_dense(const RangeGraph& g, std::uint32_t x, std::uint32_t y) {
  const std::size_t nv = g.vertex_count();
  if (nv > kDenseVertexLimit) {
    throw std::length_error("dense resistance solve limited to " +
                            std::to_string(kDenseVertexLimit) + " vertices");
  }
  if (x >= nv || y >= nv) throw std::invalid_argument("terminal vertex out of range");
  if (x == y) return 0.0;

  // Grounded Laplacian: drop row/column y.
  const std::size_t m = nv - 1;
  auto reduced = [y](std::uint32_t v) { return v < y ? v : v - 1; };
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (std::uint32_t u = 0; u < nv; ++u) {
    if (u == y) continue;
    const std::size_t ru = reduced(u);
    a[ru * m + ru] = static_cast<double>(g.degree(u));
    for (auto w : g.neighbors(u)) {
      if (w != y) a[ru * m + reduced(w)] = -1.0;
    }
  }
  b[reduced(x)] = 1.0;

  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < m; ++row) {
      if (std::abs(a[row * m + col]) > std::abs(a[pivot * m + col])) pivot = row;
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < m; ++k) std::swap(a[col * m + k], a[pivot * m + k]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * m + col];
    for (std::size_t row = col + 1; row < m; ++row) {
      const double f = a[row * m + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < m; ++k) a[row * m + k] -= f * a[col * m + k];
      b[row] -= f * b[col];
    }
  }
  std::vector<double> v(m, 0.0);
  for (std::size_t row = m; row-- > 0;) {
    double s = b[row];
    for (std::size_t k = row + 1; k < m; ++k) s -= a[row * m + k] * v[k];
    v[row] = s / a[row * m + row];
  }
  return v[reduced(x)];
}

}  // namespace rwrange
