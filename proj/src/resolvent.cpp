#include "fbmsteer/resolvent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmsteer {

double MemoryKernel::operator()(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return amplitude_;
    case Kind::exp_decay: return amplitude_ * std::exp(-rate_ * t);
  }
  return 0.0;
}

double MemoryKernel::derivative(double t) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::exp_decay: return -rate_ * amplitude_ * std::exp(-rate_ * t);
  }
  return 0.0;
}

double MemoryKernel::derivative_l1(double T) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::exp_decay: return std::abs(amplitude_) * (1.0 - std::exp(-rate_ * T));
  }
  return 0.0;
}

ResolventFamily solve_modes(const MemoryKernel& kernel, std::size_t modes, TimeGrid grid,
                            Exec exec) {
  if (modes < 1) throw std::invalid_argument("solve_modes: need at least one mode");
  const std::size_t n = grid.n_steps();
  const double dt = grid.step();

  ResolventFamily fam{grid, modes, {}, {}, 0.0, 0.0};
  fam.eigenvalues.resize(modes);
  for (std::size_t m = 0; m < modes; ++m)
    fam.eigenvalues[m] = static_cast<double>((m + 1) * (m + 1));
  fam.values.assign(modes * (n + 1), 0.0);

  std::vector<double> b(n + 1);
  for (std::size_t j = 0; j <= n; ++j) b[j] = kernel(grid.node(j));

  bool failed = false;
  std::size_t failed_mode = 0;
  for_each_index(exec, modes, [&](std::size_t m) {
    const double a = fam.eigenvalues[m];
    double* r = fam.values.data() + m * (n + 1);
    r[0] = 1.0;
    const double E = std::exp(-a * dt);
    const double denom = 1.0 + 0.25 * a * dt * dt * b[0];
    double q_prev = 0.0;  // trapezoidal memory integral at t_i
    for (std::size_t i = 0; i < n; ++i) {
      // memory sum of Q_{i+1} without the implicit r_{i+1} contribution
      double s2 = 0.5 * b[i + 1] * r[0];
      for (std::size_t k = 1; k <= i; ++k) s2 += b[i + 1 - k] * r[k];
      const double rhs = E * r[i] - 0.5 * a * dt * (E * q_prev + dt * s2);
      r[i + 1] = rhs / denom;
      q_prev = dt * (s2 + 0.5 * b[0] * r[i + 1]);
      if (!std::isfinite(r[i + 1])) {
        failed = true;
        failed_mode = m + 1;
        return;
      }
    }
  });
  if (failed)
    throw std::runtime_error("solve_modes: non-finite resolvent value in mode " +
                             std::to_string(failed_mode));

  double sup = 0.0;
  for (double v : fam.values) sup = std::max(sup, std::abs(v));
  fam.sup_norm_D = sup;
  fam.lipschitz_M = lipschitz_constant(fam, kernel);
  return fam;
}

std::vector<double> apply(const ResolventFamily& family, std::size_t t_index,
                          std::span<const double> x) {
  if (x.size() != family.modes) throw std::invalid_argument("apply: dimension mismatch");
  if (t_index >= family.grid.n_nodes()) throw std::invalid_argument("apply: node out of range");
  std::vector<double> y(family.modes);
  for (std::size_t m = 0; m < family.modes; ++m) y[m] = family.r(m, t_index) * x[m];
  return y;
}

double verify_resolvent_identity(const ResolventFamily& family, const MemoryKernel& kernel,
                                 std::span<const double> x) {
  if (x.size() != family.modes)
    throw std::invalid_argument("verify_resolvent_identity: dimension mismatch");
  const std::size_t n = family.grid.n_steps();
  const double dt = family.grid.step();
  std::vector<double> b(n + 1);
  for (std::size_t j = 0; j <= n; ++j) b[j] = kernel(family.grid.node(j));

  double worst = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t m = 0; m < family.modes; ++m) {
      if (x[m] == 0.0) continue;
      const double a = family.eigenvalues[m];
      const double* r = family.values.data() + m * (n + 1);
      double q = 0.5 * b[i] * r[0] + 0.5 * b[0] * r[i];
      for (std::size_t k = 1; k < i; ++k) q += b[i - k] * r[k];
      q *= dt;
      const double deriv = (r[i + 1] - r[i - 1]) / (2.0 * dt);
      const double res = (deriv + a * r[i] + a * q) * x[m];
      acc += res * res;
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

double lipschitz_constant(const ResolventFamily& family, const MemoryKernel& kernel) {
  const double T = family.grid.horizon();
  return (1.0 + T * std::abs(kernel(0.0)) + T * kernel.derivative_l1(T)) * family.sup_norm_D;
}

double graph_norm(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double w = 1.0 + static_cast<double>((m + 1) * (m + 1));
    s += w * w * x[m] * x[m];
  }
  return std::sqrt(s);
}

}  // namespace fbmsteer
