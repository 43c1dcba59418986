#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbmsteer/grid.hpp"
#include "fbmsteer/parallel.hpp"

namespace fbmsteer {

/// Hurst parameter restricted to the rough regime 0 < H < 1/2.
class HurstParameter {
 public:
  explicit HurstParameter(double h);
  double value() const { return h_; }

 private:
  double h_;
};

/// fBm covariance R_H(s,t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double covariance(HurstParameter h, double s, double t);

/// c_H = sqrt( 2H / ((1-2H) B(1-2H, H+1/2)) ), Beta through log-Gamma.
double normalization_constant(HurstParameter h);

/// Volterra kernel K_H(t,s) for the rough representation of fBm.
/// Zero for t <= s (and within 1e-12 relative of the diagonal); the inner
/// integral is evaluated by a singularity-removing power substitution with
/// fixed-order Gauss-Legendre panels on a geometrically graded mesh.
double kernel(HurstParameter h, double t, double s);

/// dK_H/dt(t,s) = c_H (H - 1/2) (t/s)^{H-1/2} (t-s)^{H-3/2}, t > s > 0.
double kernel_dt(HurstParameter h, double t, double s);

/// Mean of K_H(t, .) over [s0, s1] (the kernel's zero extension past t is
/// part of the average). Endpoint singularities at s=0 and s=t are handled
/// by power substitutions.
double kernel_cell_average(HurstParameter h, double t, double s0, double s1);

/// Pointwise (K*_T phi)(s) = K(T,s) phi(s) + int_s^T (phi(r)-phi(s)) dK/dr(r,s) dr
/// for piecewise-linear phi; the singular weight is product-integrated with
/// closed-form cell moments. Valid for 0 < s < T; returns 0 for s >= T.
double kstar_value(HurstParameter h, const SampledFunction& phi, double s);

/// Same, for a step function on [0, horizon]; reduces exactly to
/// sum_i c_i K(t_i, s) 1_{s < t_i}.
double kstar_value(HurstParameter h, double horizon, const StepFunction& phi, double s);

/// Node-aligned transform samples. Interior nodes are pointwise values; node 0
/// is evaluated at the first cell's L^2-representative point s_eff =
/// dt*(2H)^{1/(1-2H)} because the pointwise limit diverges when phi(0) != 0;
/// the last node is 0 by the kernel's zero convention.
SampledFunction kstar_transform(HurstParameter h, const SampledFunction& phi);

/// L^2([0,T]) norm of K* phi, i.e. the standard deviation of int phi dB^H.
/// Integrates (K* phi)^2 cell-by-cell with 2H-power substitutions at both
/// endpoints of [0,T].
double isometry_norm(HurstParameter h, const SampledFunction& phi);
double isometry_norm(HurstParameter h, double horizon, const StepFunction& phi,
                     std::size_t n_cells = 512);

/// Cell-projected K* weights on a refinement lattice: w_k such that
/// int_0^{upto} phi dB^H ~= sum_k w_k dB_k with dB_k the Brownian increment of
/// lattice cell k. `upto` must be a lattice edge. The first term is the exact
/// cell average of the kernel; the correction integral uses midpoint-anchored
/// product integration. These are the weights the Volterra sampler and the
/// scalar Wiener integral share.
std::vector<double> kstar_cell_weights(HurstParameter h, const Lattice& lat,
                                       std::size_t upto_edge, const SampledFunction& phi);
std::vector<double> kstar_cell_weights(HurstParameter h, const Lattice& lat,
                                       std::size_t upto_edge, const StepFunction& phi);

/// Precomputed discrete K* machinery on a uniform grid: the cell-averaged
/// kernel table K̄(t_i, cell_j) plus the 1D power tables that make one
/// transform application pure arithmetic. Row construction is the
/// data-parallel kernel; Exec::serial is the reference implementation.
class KstarTable {
 public:
  KstarTable(HurstParameter h, TimeGrid grid, Exec exec = Exec::parallel);

  const TimeGrid& grid() const { return grid_; }
  double hurst() const { return h_; }

  /// K̄(t_m, cell_j), 0 <= j < m <= n.
  double kbar(std::size_t m, std::size_t j) const { return kbar_[offset(m) + j]; }

  /// Discrete transform for horizon node m: fills w[0..m) from phi[0..m].
  void weights(std::size_t m, std::span<const double> phi, std::span<double> w) const;

 private:
  std::size_t offset(std::size_t m) const { return m * (m - 1) / 2; }

  double h_;
  TimeGrid grid_;
  double c1_;              // c_H (H - 1/2)
  double dm1_first_;       // partial-cell moment (dt/2)^{H+1/2} / (H+1/2)
  std::vector<double> kbar_;
  std::vector<double> q_;      // (2m+1)^{H-1/2}
  std::vector<double> invq_;   // 1 / q
  std::vector<double> adiag_;  // ((4j+3)/(4j+2))^{H-1/2}
  std::vector<double> dm0_;    // int_{cell d} x^{H-3/2} dx
  std::vector<double> dm1_;    // int_{cell d} x^{H-1/2} dx
};

}  // namespace fbmsteer
