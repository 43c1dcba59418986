#include "fbmsteer/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbmsteer {

namespace {

std::vector<std::size_t> locate_nodes(const TimeGrid& grid, const std::vector<double>& edges) {
  std::vector<std::size_t> idx(grid.n_nodes());
  for (std::size_t j = 0; j <= grid.n_steps(); ++j) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), grid.node(j));
    idx[j] = static_cast<std::size_t>(it - edges.begin());
  }
  return idx;
}

}  // namespace

Lattice Lattice::uniform(const TimeGrid& grid, std::size_t split) {
  if (split < 1) throw std::invalid_argument("Lattice: split must be >= 1");
  const std::size_t n = grid.n_steps() * split;
  std::vector<double> edges(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    edges[k] = static_cast<double>(k) * grid.horizon() / static_cast<double>(n);
  auto node_edge = locate_nodes(grid, edges);
  return Lattice(grid, std::move(edges), std::move(node_edge));
}

Lattice Lattice::graded(const TimeGrid& grid, std::size_t base_split, std::size_t levels) {
  if (base_split < 1) throw std::invalid_argument("Lattice: base_split must be >= 1");
  if (levels == 0) return uniform(grid, base_split);
  // offsets below ~32 ulp of the node would collapse to duplicate edges
  const double ulp_floor = 32.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> edges;
  edges.push_back(0.0);
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    const double a = grid.node(i);
    const double b = grid.node(i + 1);
    const double w = (b - a) / static_cast<double>(base_split);
    if (i == 0) {
      // grade the first sub-cell towards 0 (s^{H-1/2} singularity of every row)
      for (std::size_t l = levels; l >= 1; --l) {
        const double e = w * std::pow(0.5, static_cast<double>(l));
        if (e > edges.back()) edges.push_back(e);
      }
    }
    for (std::size_t k = 1; k < base_split; ++k) edges.push_back(a + static_cast<double>(k) * w);
    // grade the last sub-cell towards b ((t_i - s)^{H-1/2} singularity of row i+1)
    for (std::size_t l = 1; l <= levels; ++l) {
      const double off = w * std::pow(0.5, static_cast<double>(l));
      if (off <= ulp_floor * b) break;
      const double e = b - off;
      if (e > edges.back()) edges.push_back(e);
    }
    edges.push_back(b);
  }
  auto node_edge = locate_nodes(grid, edges);
  return Lattice(grid, std::move(edges), std::move(node_edge));
}

}  // namespace fbmsteer
