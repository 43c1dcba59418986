#include "fbmsteer/hilbert_noise.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmsteer {

CovarianceSpec::CovarianceSpec(std::vector<double> eigenvalues)
    : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) throw std::invalid_argument("CovarianceSpec: need N >= 1");
  for (double l : eigenvalues_)
    if (!(l >= 0.0)) throw std::invalid_argument("CovarianceSpec: eigenvalues must be >= 0");
}

double CovarianceSpec::trace() const {
  double s = 0.0;
  for (double l : eigenvalues_) s += l;
  return s;
}

double CovarianceSpec::tail_fraction() const {
  const double tr = trace();
  if (tr == 0.0) return 0.0;
  double tail = 0.0;
  for (std::size_t n = truncation() / 2; n < truncation(); ++n) tail += eigenvalues_[n];
  return tail / tr;
}

NoiseValidationReport validate_noise(const DiagonalNoiseCoefficient& sigma,
                                     const CovarianceSpec& q, HurstParameter h) {
  if (sigma.modes != q.truncation())
    throw std::invalid_argument("validate_noise: mode count mismatch");
  if (!(sigma.holder_gamma > 0.5 - h.value()))
    throw std::invalid_argument("validate_noise: requires gamma > 1/2 - H");
  NoiseValidationReport rep;
  rep.trace = q.trace();
  rep.tail_fraction = q.tail_fraction();
  const std::size_t nn = sigma.grid.n_nodes();
  for (std::size_t j = 0; j < nn; ++j) {
    double s2 = 0.0;
    for (std::size_t m = 0; m < sigma.modes; ++m)
      s2 += q.eigenvalue(m) * sigma.at(j, m) * sigma.at(j, m);
    rep.l20_sup = std::max(rep.l20_sup, std::sqrt(s2));
  }
  // discrete per-mode Hoelder audit on all node pairs
  double worst = 0.0;
  for (std::size_t m = 0; m < sigma.modes; ++m) {
    const double sl = std::sqrt(q.eigenvalue(m));
    if (sl == 0.0) continue;
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = i + 1; j < nn; ++j) {
        const double ds = std::abs(sigma.at(i, m) - sigma.at(j, m));
        const double dt = sigma.grid.node(j) - sigma.grid.node(i);
        const double bound = sigma.holder_c5 / sl * std::pow(dt, sigma.holder_gamma);
        if (bound > 0.0) worst = std::max(worst, ds / bound);
        else if (ds > 0.0) worst = std::max(worst, 2.0);
      }
  }
  rep.worst_holder_quotient = worst;
  rep.holder_ok = worst <= 1.0 + 1e-12;
  // trapezoid of sum l_n n^4 s_n(t)^2 over [0,T]
  const double dt = sigma.grid.step();
  double c6 = 0.0;
  for (std::size_t j = 0; j < nn; ++j) {
    double sum = 0.0;
    for (std::size_t m = 0; m < sigma.modes; ++m) {
      const double n2 = static_cast<double>((m + 1) * (m + 1));
      sum += q.eigenvalue(m) * n2 * n2 * sigma.at(j, m) * sigma.at(j, m);
    }
    const double wq = (j == 0 || j + 1 == nn) ? 0.5 : 1.0;
    c6 += wq * dt * sum;
  }
  rep.c6_surrogate = c6;
  return rep;
}

double l20_norm_squared(const DiagonalNoiseCoefficient& sigma, const CovarianceSpec& q,
                        std::size_t node) {
  double s = 0.0;
  for (std::size_t m = 0; m < sigma.modes; ++m)
    s += q.eigenvalue(m) * sigma.at(node, m) * sigma.at(node, m);
  return s;
}

double QfbmPath::coordinate(std::size_t node, std::size_t mode) const {
  return std::sqrt(eigenvalues[mode]) * mode_paths[mode].values[node];
}

QfbmPath sample_qfbm(const CovarianceSpec& q, HurstParameter h, TimeGrid grid, RngStream rng,
                     VolterraOptions opts, Exec exec) {
  const VolterraWeights weights(
      h, Lattice::graded(grid, opts.base_split, opts.graded_levels), exec);
  QfbmPath out{grid, q.eigenvalues(), {}};
  out.mode_paths.reserve(q.truncation());
  for (std::size_t m = 0; m < q.truncation(); ++m)
    out.mode_paths.push_back(sample_fbm_volterra(weights, rng.derived(m)));
  return out;
}

std::vector<double> wiener_integral_operator(const DiagonalNoiseCoefficient& sigma,
                                             const CovarianceSpec& q, HurstParameter h,
                                             const QfbmPath& noise, std::size_t upto_node,
                                             std::span<const SampledFunction> weight) {
  if (noise.modes() != q.truncation() || sigma.modes != q.truncation())
    throw std::invalid_argument("wiener_integral_operator: mode count mismatch");
  if (weight.size() != noise.modes())
    throw std::invalid_argument("wiener_integral_operator: one integrand per mode required");
  if (upto_node > noise.grid.n_steps())
    throw std::invalid_argument("wiener_integral_operator: upto node out of range");
  std::vector<double> out(noise.modes(), 0.0);
  if (upto_node == 0) return out;
  for (std::size_t m = 0; m < noise.modes(); ++m) {
    const auto& path = noise.mode_paths[m];
    if (!(weight[m].grid == path.grid))
      throw std::invalid_argument("wiener_integral_operator: integrand grid mismatch");
    const std::size_t edge = path.lattice.node_edge(upto_node);
    const auto w = kstar_cell_weights(h, path.lattice, edge, weight[m]);
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * path.increments[j];
    out[m] = std::sqrt(q.eigenvalue(m)) * s;
  }
  return out;
}

}  // namespace fbmsteer
