#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbmsteer/fbm_kernel.hpp"
#include "fbmsteer/grid.hpp"
#include "fbmsteer/parallel.hpp"
#include "fbmsteer/rng.hpp"

namespace fbmsteer {

/// Quadrature resolution of the Volterra sampler. The driving increments live
/// on Lattice::graded(grid, base_split, graded_levels); the defaults reproduce
/// the plain one-cell-per-step scheme.
struct VolterraOptions {
  std::size_t base_split = 1;
  std::size_t graded_levels = 0;
};

/// Scalar fBm path at grid nodes. Volterra paths carry the standard Brownian
/// increments of their lattice so every later Wiener integral of the run is
/// driven by the same underlying Brownian path; Cholesky paths do not.
struct FbmPath {
  TimeGrid grid;
  Lattice lattice;
  std::vector<double> values;      // n_steps + 1
  std::vector<double> increments;  // one per lattice cell; empty for Cholesky
  RngStream rng;

  bool has_increments() const { return !increments.empty(); }
};

/// Lower-triangular factor of [R_H(t_i, t_j)]_{i,j=1..n} with escalating
/// diagonal jitter (at most 1e-10 * max diagonal); reusable across paths.
class CholeskyFactor {
 public:
  CholeskyFactor(HurstParameter h, TimeGrid grid);

  const TimeGrid& grid() const { return grid_; }
  /// values[1..n] = L xi for iid standard normal xi; values[0] = 0.
  void map(std::span<const double> xi, std::span<double> values) const;
  double jitter_used() const { return jitter_; }

 private:
  TimeGrid grid_;
  std::size_t n_;
  std::vector<double> lower_;  // row-major n x n, lower triangle
  double jitter_ = 0.0;
};

/// Cell-averaged kernel weight rows K̄(t_i, cell) for every grid node i on a
/// refinement lattice; shared by batch sampling. Row construction is the
/// data-parallel kernel.
class VolterraWeights {
 public:
  VolterraWeights(HurstParameter h, Lattice lattice, Exec exec = Exec::parallel);

  const Lattice& lattice() const { return lattice_; }
  double hurst() const { return h_; }
  /// Weights of node i over lattice cells [0, lattice.node_edge(i)).
  std::span<const double> row(std::size_t i) const;

 private:
  double h_;
  Lattice lattice_;
  std::vector<std::size_t> offsets_;
  std::vector<double> rows_;
};

/// Exact-distribution sampler: maps iid normals through the Cholesky factor of
/// the covariance matrix. Serves as the distributional oracle; no increments.
FbmPath sample_fbm_cholesky(HurstParameter h, TimeGrid grid, RngStream rng);
FbmPath sample_fbm_cholesky(const CholeskyFactor& factor, RngStream rng);

/// Volterra sampler: values[i] = sum_j K̄(t_i, cell_j) dB_j with iid Gaussian
/// increments on the lattice cells; increments are recorded.
FbmPath sample_fbm_volterra(HurstParameter h, TimeGrid grid, RngStream rng,
                            VolterraOptions opts = {});
FbmPath sample_fbm_volterra(const VolterraWeights& weights, RngStream rng);

/// Deterministic rebuild from explicit increments (refinement studies couple
/// resolutions through a shared Brownian path this way).
FbmPath sample_fbm_volterra_from_increments(const VolterraWeights& weights,
                                            std::vector<double> increments, RngStream tag);

/// Batch node values, one path per row of `values` (count x (n_steps+1)).
/// Paths are independent streams rng.derived(path index); output is
/// bit-identical between serial and parallel execution.
void sample_volterra_values(const VolterraWeights& weights, RngStream rng, std::size_t count,
                            std::span<double> values, Exec exec = Exec::parallel);
void sample_cholesky_values(const CholeskyFactor& factor, RngStream rng, std::size_t count,
                            std::span<double> values, Exec exec = Exec::parallel);

/// int_0^T phi dB^H against the path's recorded increments through the K*
/// cell weights on the path's own lattice. Requires a Volterra path.
double wiener_integral_scalar(HurstParameter h, const SampledFunction& phi, const FbmPath& path);
double wiener_integral_scalar(HurstParameter h, const StepFunction& phi, const FbmPath& path);

/// Unbiased sample covariance of node values with per-entry standard errors
/// (Gaussian formula SE_ij = sqrt((C_ii C_jj + C_ij^2)/M)).
struct CovarianceEstimate {
  std::size_t n_nodes = 0;
  std::size_t count = 0;
  std::vector<double> cov;
  std::vector<double> se;

  double cov_at(std::size_t i, std::size_t j) const { return cov[i * n_nodes + j]; }
  double se_at(std::size_t i, std::size_t j) const { return se[i * n_nodes + j]; }
};

CovarianceEstimate empirical_covariance(std::span<const FbmPath> paths);
/// Same from a dense batch matrix (count x n_nodes).
CovarianceEstimate empirical_covariance(std::span<const double> values, std::size_t count,
                                        std::size_t n_nodes);

}  // namespace fbmsteer
