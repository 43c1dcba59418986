#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbmsteer/fbm_sampler.hpp"

namespace fbmsteer {

/// Spectral data of the trace-class covariance Q: Q e_n = lambda_n e_n.
class CovarianceSpec {
 public:
  explicit CovarianceSpec(std::vector<double> eigenvalues);

  std::size_t truncation() const { return eigenvalues_.size(); }
  double eigenvalue(std::size_t n) const { return eigenvalues_[n]; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  double trace() const;
  /// sum_{n > N/2} lambda_n / trace — the truncation-insensitivity indicator.
  double tail_fraction() const;

 private:
  std::vector<double> eigenvalues_;
};

/// sigma(t) restricted to diagonal-in-eigenbasis form: sigma(t) e_n = s_n(t) e_n.
struct DiagonalNoiseCoefficient {
  TimeGrid grid;
  std::size_t modes;
  std::vector<double> values;  // (n_steps+1) x modes, node-major
  double holder_c5;
  double holder_gamma;

  double at(std::size_t node, std::size_t mode) const { return values[node * modes + mode]; }
};

/// Hypothesis audit of a noise coefficient against a covariance spec with
/// A-eigenvalues n^2: the per-mode Hoelder bound, the L_2^0 sup norm, and the
/// finite-truncation surrogate of int ||A sigma||^2 (reported, not consumed).
struct NoiseValidationReport {
  bool holder_ok = false;
  double worst_holder_quotient = 0.0;  // max over modes/pairs of |ds| sqrt(l_n) / (C5 |dt|^gamma)
  double l20_sup = 0.0;                // sup_t sqrt(sum l_n s_n(t)^2)
  double c6_surrogate = 0.0;           // int_0^T sum l_n n^4 s_n(t)^2 dt
  double trace = 0.0;
  double tail_fraction = 0.0;
};

NoiseValidationReport validate_noise(const DiagonalNoiseCoefficient& sigma,
                                     const CovarianceSpec& q, HurstParameter h);

/// ||sigma(t)||_{L_2^0}^2 = sum_n lambda_n s_n(t)^2 at a grid node.
double l20_norm_squared(const DiagonalNoiseCoefficient& sigma, const CovarianceSpec& q,
                        std::size_t node);

/// Q-fBm: independent scalar Volterra fBm paths, one per mode, on distinct
/// derived streams. Coordinates of B^H(t) are sqrt(lambda_n) * mode value.
struct QfbmPath {
  TimeGrid grid;
  std::vector<double> eigenvalues;
  std::vector<FbmPath> mode_paths;

  std::size_t modes() const { return mode_paths.size(); }
  double coordinate(std::size_t node, std::size_t mode) const;
};

QfbmPath sample_qfbm(const CovarianceSpec& q, HurstParameter h, TimeGrid grid, RngStream rng,
                     VolterraOptions opts = {}, Exec exec = Exec::parallel);

/// Finite-sum Wiener integral of an operator-valued integrand against Q-fBm:
/// per mode, sqrt(lambda_n) * int_0^{t_upto} weight_n dbeta_n^H, where weight_n
/// is the caller-composed integrand (resolvent factor times sigma action).
std::vector<double> wiener_integral_operator(const DiagonalNoiseCoefficient& sigma,
                                             const CovarianceSpec& q, HurstParameter h,
                                             const QfbmPath& noise, std::size_t upto_node,
                                             std::span<const SampledFunction> weight);

}  // namespace fbmsteer
