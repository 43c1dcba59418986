#include "fbmsteer/fbm_sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmsteer {

CholeskyFactor::CholeskyFactor(HurstParameter h, TimeGrid grid) : grid_(grid), n_(grid.n_steps()) {
  std::vector<double> a(n_ * n_);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = covariance(h, grid.node(i + 1), grid.node(j + 1));
      a[i * n_ + j] = v;
      a[j * n_ + i] = v;
    }
    max_diag = std::max(max_diag, a[i * n_ + i]);
  }

  const auto try_factor = [&](double jitter, std::size_t& bad_pivot) {
    lower_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = a[i * n_ + j];
        if (i == j) s += jitter;
        for (std::size_t k = 0; k < j; ++k) s -= lower_[i * n_ + k] * lower_[j * n_ + k];
        if (i == j) {
          if (!(s > 0.0)) {
            bad_pivot = i;
            return false;
          }
          lower_[i * n_ + i] = std::sqrt(s);
        } else {
          lower_[i * n_ + j] = s / lower_[j * n_ + j];
        }
      }
    }
    return true;
  };

  std::size_t bad = 0;
  // escalate jitter 1e-12 -> 1e-11 -> 1e-10 (times the max diagonal)
  for (double scale : {0.0, 1e-12, 1e-11, 1e-10}) {
    jitter_ = scale * max_diag;
    if (try_factor(jitter_, bad)) return;
  }
  throw std::runtime_error("CholeskyFactor: covariance not positive definite at leading minor " +
                           std::to_string(bad + 1) + " even with 1e-10 jitter");
}

void CholeskyFactor::map(std::span<const double> xi, std::span<double> values) const {
  if (xi.size() < n_ || values.size() < n_ + 1)
    throw std::invalid_argument("CholeskyFactor::map: spans too short");
  values[0] = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += lower_[i * n_ + k] * xi[k];
    values[i + 1] = s;
  }
}

VolterraWeights::VolterraWeights(HurstParameter h, Lattice lattice, Exec exec)
    : h_(h.value()), lattice_(std::move(lattice)) {
  const std::size_t n = lattice_.grid().n_steps();
  offsets_.assign(n + 2, 0);
  for (std::size_t i = 1; i <= n; ++i) offsets_[i + 1] = offsets_[i] + lattice_.node_edge(i);
  rows_.assign(offsets_[n + 1], 0.0);
  for_each_index(exec, n, [&](std::size_t r) {
    const std::size_t i = r + 1;
    const double ti = lattice_.grid().node(i);
    double* out = rows_.data() + offsets_[i];
    for (std::size_t j = 0; j < lattice_.node_edge(i); ++j)
      out[j] = kernel_cell_average(h, ti, lattice_.edge(j), lattice_.edge(j + 1));
  });
}

std::span<const double> VolterraWeights::row(std::size_t i) const {
  return {rows_.data() + offsets_[i], lattice_.node_edge(i)};
}

FbmPath sample_fbm_cholesky(HurstParameter h, TimeGrid grid, RngStream rng) {
  return sample_fbm_cholesky(CholeskyFactor(h, grid), rng);
}

FbmPath sample_fbm_cholesky(const CholeskyFactor& factor, RngStream rng) {
  const auto& grid = factor.grid();
  std::vector<double> xi(grid.n_steps());
  NormalStream ns(rng);
  ns.fill(0, xi);
  FbmPath path{grid, Lattice::uniform(grid), std::vector<double>(grid.n_nodes(), 0.0), {}, rng};
  factor.map(xi, path.values);
  return path;
}

namespace {

void volterra_values_from_increments(const VolterraWeights& w, std::span<const double> incr,
                                     std::span<double> values) {
  const auto& lat = w.lattice();
  const std::size_t n = lat.grid().n_steps();
  values[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto row = w.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * incr[j];
    values[i] = s;
  }
}

void draw_increments(const Lattice& lat, RngStream rng, std::span<double> incr) {
  NormalStream ns(rng);
  ns.fill(0, incr);
  for (std::size_t j = 0; j < lat.n_cells(); ++j) incr[j] *= std::sqrt(lat.width(j));
}

}  // namespace

FbmPath sample_fbm_volterra(HurstParameter h, TimeGrid grid, RngStream rng, VolterraOptions opts) {
  return sample_fbm_volterra(
      VolterraWeights(h, Lattice::graded(grid, opts.base_split, opts.graded_levels), Exec::serial),
      rng);
}

FbmPath sample_fbm_volterra(const VolterraWeights& weights, RngStream rng) {
  const auto& lat = weights.lattice();
  FbmPath path{lat.grid(), lat, std::vector<double>(lat.grid().n_nodes(), 0.0),
               std::vector<double>(lat.n_cells(), 0.0), rng};
  draw_increments(lat, rng, path.increments);
  volterra_values_from_increments(weights, path.increments, path.values);
  return path;
}

FbmPath sample_fbm_volterra_from_increments(const VolterraWeights& weights,
                                            std::vector<double> increments, RngStream tag) {
  const auto& lat = weights.lattice();
  if (increments.size() != lat.n_cells())
    throw std::invalid_argument("sample_fbm_volterra_from_increments: increment count mismatch");
  FbmPath path{lat.grid(), lat, std::vector<double>(lat.grid().n_nodes(), 0.0),
               std::move(increments), tag};
  volterra_values_from_increments(weights, path.increments, path.values);
  return path;
}

void sample_volterra_values(const VolterraWeights& weights, RngStream rng, std::size_t count,
                            std::span<double> values, Exec exec) {
  const auto& lat = weights.lattice();
  const std::size_t stride = lat.grid().n_nodes();
  if (values.size() < count * stride)
    throw std::invalid_argument("sample_volterra_values: output span too short");
  for_each_index(exec, count, [&](std::size_t p) {
    std::vector<double> incr(lat.n_cells());
    draw_increments(lat, rng.derived(p), incr);
    volterra_values_from_increments(weights, incr, values.subspan(p * stride, stride));
  });
}

void sample_cholesky_values(const CholeskyFactor& factor, RngStream rng, std::size_t count,
                            std::span<double> values, Exec exec) {
  const std::size_t stride = factor.grid().n_nodes();
  if (values.size() < count * stride)
    throw std::invalid_argument("sample_cholesky_values: output span too short");
  for_each_index(exec, count, [&](std::size_t p) {
    std::vector<double> xi(factor.grid().n_steps());
    NormalStream ns(rng.derived(p));
    ns.fill(0, xi);
    factor.map(xi, values.subspan(p * stride, stride));
  });
}

namespace {

double dot_weights(std::span<const double> w, std::span<const double> incr) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * incr[j];
  return s;
}

void require_increments(const FbmPath& path) {
  if (!path.has_increments())
    throw std::invalid_argument(
        "wiener_integral_scalar: path has no driving increments; use the Volterra sampler");
}

}  // namespace

double wiener_integral_scalar(HurstParameter h, const SampledFunction& phi, const FbmPath& path) {
  require_increments(path);
  if (!(phi.grid == path.grid))
    throw std::invalid_argument("wiener_integral_scalar: phi grid does not match path grid");
  const auto w = kstar_cell_weights(h, path.lattice, path.lattice.n_cells(), phi);
  return dot_weights(w, path.increments);
}

double wiener_integral_scalar(HurstParameter h, const StepFunction& phi, const FbmPath& path) {
  require_increments(path);
  const auto w = kstar_cell_weights(h, path.lattice, path.lattice.n_cells(), phi);
  return dot_weights(w, path.increments);
}

CovarianceEstimate empirical_covariance(std::span<const FbmPath> paths) {
  if (paths.size() < 2) throw std::invalid_argument("empirical_covariance: need at least 2 paths");
  const auto& grid = paths.front().grid;
  const std::size_t stride = grid.n_nodes();
  std::vector<double> flat(paths.size() * stride);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (!(paths[p].grid == grid))
      throw std::invalid_argument("empirical_covariance: paths on mismatched grids");
    std::copy(paths[p].values.begin(), paths[p].values.end(), flat.begin() + p * stride);
  }
  return empirical_covariance(flat, paths.size(), stride);
}

CovarianceEstimate empirical_covariance(std::span<const double> values, std::size_t count,
                                        std::size_t n_nodes) {
  if (count < 2) throw std::invalid_argument("empirical_covariance: need at least 2 samples");
  CovarianceEstimate est;
  est.n_nodes = n_nodes;
  est.count = count;
  std::vector<double> mean(n_nodes, 0.0);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t i = 0; i < n_nodes; ++i) mean[i] += values[p * n_nodes + i];
  for (auto& m : mean) m /= static_cast<double>(count);
  est.cov.assign(n_nodes * n_nodes, 0.0);
  std::vector<double> c(n_nodes);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t i = 0; i < n_nodes; ++i) c[i] = values[p * n_nodes + i] - mean[i];
    for (std::size_t i = 0; i < n_nodes; ++i)
      for (std::size_t j = 0; j <= i; ++j) est.cov[i * n_nodes + j] += c[i] * c[j];
  }
  const double norm = 1.0 / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      est.cov[i * n_nodes + j] *= norm;
      est.cov[j * n_nodes + i] = est.cov[i * n_nodes + j];
    }
  est.se.assign(n_nodes * n_nodes, 0.0);
  const double m = static_cast<double>(count);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = 0; j < n_nodes; ++j) {
      const double cij = est.cov[i * n_nodes + j];
      est.se[i * n_nodes + j] =
          std::sqrt((est.cov[i * n_nodes + i] * est.cov[j * n_nodes + j] + cij * cij) / m);
    }
  return est;
}

}  // namespace fbmsteer
