#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fbmsteer {

/// Uniform partition of [0, T]: nodes t_j = j*T/n, j = 0..n.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_steps)
      : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  }

  double horizon() const { return horizon_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_nodes() const { return n_steps_ + 1; }
  double step() const { return horizon_ / static_cast<double>(n_steps_); }
  double node(std::size_t j) const {
    return static_cast<double>(j) * horizon_ / static_cast<double>(n_steps_);
  }
  std::vector<double> nodes() const {
    std::vector<double> t(n_steps_ + 1);
    for (std::size_t j = 0; j <= n_steps_; ++j) t[j] = node(j);
    return t;
  }

  bool operator==(const TimeGrid& o) const {
    return horizon_ == o.horizon_ && n_steps_ == o.n_steps_;
  }

 private:
  double horizon_;
  std::size_t n_steps_;
};

/// Real-valued function sampled at grid nodes, interpreted piecewise-linearly.
struct SampledFunction {
  TimeGrid grid;
  std::vector<double> values;  // n_steps + 1 entries

  SampledFunction(TimeGrid g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_nodes())
      throw std::invalid_argument("SampledFunction: values must have n_steps+1 entries");
  }

  static SampledFunction constant(TimeGrid g, double c) {
    return SampledFunction(g, std::vector<double>(g.n_nodes(), c));
  }

  /// Linear interpolation; t clamped to [0, T].
  double operator()(double t) const {
    const double dt = grid.step();
    if (t <= 0.0) return values.front();
    if (t >= grid.horizon()) return values.back();
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(t / dt), grid.n_steps() - 1);
    const double lam = t / dt - static_cast<double>(j);
    return values[j] * (1.0 - lam) + values[j + 1] * lam;
  }
};

/// Refinement of a TimeGrid into (possibly non-uniform) integration cells.
/// Every grid node is a lattice edge. The graded variant packs geometrically
/// shrinking cells against the left side of each grid node and against 0,
/// where the Volterra kernel K_H(t_i, .) has its integrable singularities;
/// without it the projected covariance is biased by O(step^{2H}) near the
/// diagonal, which is fatal for small H.
class Lattice {
 public:
  static Lattice uniform(const TimeGrid& grid, std::size_t split = 1);
  static Lattice graded(const TimeGrid& grid, std::size_t base_split, std::size_t levels);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_cells() const { return edges_.size() - 1; }
  double edge(std::size_t k) const { return edges_[k]; }
  double width(std::size_t k) const { return edges_[k + 1] - edges_[k]; }
  const std::vector<double>& edges() const { return edges_; }
  /// Lattice edge index of grid node j (grid nodes are always edges).
  std::size_t node_edge(std::size_t j) const { return node_edge_[j]; }

  bool operator==(const Lattice& o) const {
    return grid_ == o.grid_ && edges_ == o.edges_;
  }

 private:
  Lattice(TimeGrid grid, std::vector<double> edges, std::vector<std::size_t> node_edge)
      : grid_(grid), edges_(std::move(edges)), node_edge_(std::move(node_edge)) {}

  TimeGrid grid_;
  std::vector<double> edges_;
  std::vector<std::size_t> node_edge_;
};

/// Left-closed step function sum_i c_i * 1_[0, t_i). Exact transforms exist for
/// this family, so the isometry checks avoid interpolation smearing.
struct StepFunction {
  struct Component {
    double upto;    // t_i > 0
    double weight;  // c_i
  };
  std::vector<Component> components;

  double operator()(double s) const {
    double v = 0.0;
    for (const auto& c : components)
      if (s < c.upto) v += c.weight;
    return v;
  }
};

}  // namespace fbmsteer
