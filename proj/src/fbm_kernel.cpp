#include "fbmsteer/fbm_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbmsteer {

namespace {

// Gauss-Legendre nodes/weights on [-1,1].
constexpr int kGl4 = 4;
constexpr double kGl4X[] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                            0.8611363115940526};
constexpr double kGl4W[] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                            0.3478548451374538};

constexpr int kGl8 = 8;
constexpr double kGl8X[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGl8W[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

constexpr int kGl16 = 16;
constexpr double kGl16X[] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGl16W[] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

constexpr double kDiagRelTol = 1e-12;

double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// int_s^t u^{H-3/2} (u-s)^{H-1/2} du after w = (u-s)^{H+1/2}: the integrand
// (s + w^{1/p})^{H-3/2} / p is bounded; its curvature concentrates near w = 0
// on the scale s^p, so panels are graded geometrically from the right.
double inner_integral(double h, double t, double s) {
  const double p = h + 0.5;
  const double W = std::pow(t - s, p);
  const double ratio = (t - s) / s;
  int levels = 12;
  if (ratio > 1.0) levels += static_cast<int>(std::ceil(p * std::log2(ratio)));
  levels = std::min(levels, 64);
  const double ex = h - 1.5;
  const double invp = 1.0 / p;
  double acc = 0.0;
  double hi = W;
  for (int l = 0; l < levels; ++l) {
    const double lo = hi * 0.5;
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    double panel = 0.0;
    for (int q = 0; q < kGl8; ++q) {
      const double w = mid + half * kGl8X[q];
      panel += kGl8W[q] * std::pow(s + std::pow(w, invp), ex);
    }
    acc += half * panel;
    hi = lo;
  }
  acc += hi * std::pow(s, ex);  // remaining [0, W 2^-levels]: integrand ~ s^{H-3/2}
  return acc / p;
}

double kernel_unchecked(double h, double ch, double t, double s) {
  if (t - s <= kDiagRelTol * t) return 0.0;
  const double I = inner_integral(h, t, s);
  return ch * (std::pow(t / s, h - 0.5) * std::pow(t - s, h - 0.5) -
               (h - 0.5) * std::pow(s, 0.5 - h) * I);
}

// int_{s0}^{s1} K(t,s) ds with power substitutions at s=0 and s=t.
double kernel_cell_integral(double h, double ch, double t, double s0, double s1) {
  const double hi = std::min(s1, t);
  if (hi <= s0) return 0.0;
  double acc = 0.0;
  double lo = s0;
  if (s0 == 0.0) {
    const double p = h + 0.5;
    const double mid = 0.5 * hi;
    const double X = std::pow(mid, p);
    const double invp = 1.0 / p;
    for (int q = 0; q < kGl16; ++q) {
      const double x = 0.5 * X * (1.0 + kGl16X[q]);
      const double s = std::pow(x, invp);
      acc += 0.5 * X * kGl16W[q] * kernel_unchecked(h, ch, t, s) * invp * std::pow(x, invp - 1.0);
    }
    lo = mid;
  }
  if (hi >= t * (1.0 - 1e-14)) {
    const double p = h + 0.5;
    const double Y = std::pow(t - lo, p);
    const double invp = 1.0 / p;
    for (int q = 0; q < kGl16; ++q) {
      const double y = 0.5 * Y * (1.0 + kGl16X[q]);
      const double s = t - std::pow(y, invp);
      acc += 0.5 * Y * kGl16W[q] * kernel_unchecked(h, ch, t, s) * invp * std::pow(y, invp - 1.0);
    }
  } else {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int q = 0; q < kGl4; ++q)
      acc += half * kGl4W[q] * kernel_unchecked(h, ch, t, mid + half * kGl4X[q]);
  }
  return acc;
}

}  // namespace

HurstParameter::HurstParameter(double h) : h_(h) {
  if (!(h > 0.0) || !(h < 0.5))
    throw std::invalid_argument("HurstParameter: H must lie strictly in (0, 1/2)");
}

double covariance(HurstParameter hp, double s, double t) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance: negative time");
  const double a = 2.0 * hp.value();
  return 0.5 * (std::pow(t, a) + std::pow(s, a) - std::pow(std::abs(t - s), a));
}

double normalization_constant(HurstParameter hp) {
  const double h = hp.value();
  return std::sqrt(2.0 * h / ((1.0 - 2.0 * h) * beta_fn(1.0 - 2.0 * h, h + 0.5)));
}

double kernel(HurstParameter hp, double t, double s) {
  if (t <= s) return 0.0;
  if (s <= 0.0) throw std::invalid_argument("kernel: requires s > 0 when t > s");
  return kernel_unchecked(hp.value(), normalization_constant(hp), t, s);
}

double kernel_dt(HurstParameter hp, double t, double s) {
  if (!(t > s) || !(s > 0.0)) throw std::invalid_argument("kernel_dt: requires t > s > 0");
  const double h = hp.value();
  if (t - s <= kDiagRelTol * t)
    throw std::invalid_argument("kernel_dt: t - s below the diagonal resolution threshold");
  return normalization_constant(hp) * (h - 0.5) * std::pow(t / s, h - 0.5) *
         std::pow(t - s, h - 1.5);
}

double kernel_cell_average(HurstParameter hp, double t, double s0, double s1) {
  if (!(s1 > s0) || s0 < 0.0) throw std::invalid_argument("kernel_cell_average: bad cell");
  if (!(t > 0.0)) throw std::invalid_argument("kernel_cell_average: t must be > 0");
  const double h = hp.value();
  return kernel_cell_integral(h, normalization_constant(hp), t, s0, s1) / (s1 - s0);
}

namespace {

// Correction integral of the pointwise transform at s for piecewise-linear phi:
// c1 * sum over cells k of A_k (alpha DM0 + slope DM1) with A_k the midpoint
// value of (r/s)^{H-1/2}; the partial cell containing s has alpha = 0 exactly.
double kstar_correction_linear(double h, const SampledFunction& phi, double s) {
  const auto& g = phi.grid;
  const double dt = g.step();
  const std::size_t n = g.n_steps();
  const double phis = phi(s);
  const std::size_t j0 = std::min(static_cast<std::size_t>(s / dt), n - 1);
  double acc = 0.0;
  for (std::size_t k = j0; k < n; ++k) {
    const double lo = std::max(g.node(k), s);
    const double hi = g.node(k + 1);
    if (hi <= lo) continue;
    const double sl = (phi.values[k + 1] - phi.values[k]) / dt;
    const double A = std::pow(0.5 * (lo + hi) / s, h - 0.5);
    const double x0 = lo - s;
    const double x1 = hi - s;
    const double dm1 = (std::pow(x1, h + 0.5) - std::pow(x0, h + 0.5)) / (h + 0.5);
    double term = sl * dm1;
    if (x0 > 0.0) {
      const double alpha = phi.values[k] - phis - sl * (g.node(k) - s);
      const double dm0 = (std::pow(x1, h - 0.5) - std::pow(x0, h - 0.5)) / (h - 0.5);
      term += alpha * dm0;
    }
    acc += A * term;
  }
  return acc;
}

}  // namespace

double kstar_value(HurstParameter hp, const SampledFunction& phi, double s) {
  const double T = phi.grid.horizon();
  if (!(s > 0.0)) throw std::invalid_argument("kstar_value: requires s > 0");
  if (s >= T) return 0.0;
  const double h = hp.value();
  const double ch = normalization_constant(hp);
  return kernel_unchecked(h, ch, T, s) * phi(s) +
         ch * (h - 0.5) * kstar_correction_linear(h, phi, s);
}

double kstar_value(HurstParameter hp, double horizon, const StepFunction& phi, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("kstar_value: requires s > 0");
  const double h = hp.value();
  const double ch = normalization_constant(hp);
  double v = 0.0;
  for (const auto& c : phi.components) {
    const double upto = std::min(c.upto, horizon);
    if (s < upto) v += c.weight * kernel_unchecked(h, ch, upto, s);
  }
  return v;
}

SampledFunction kstar_transform(HurstParameter hp, const SampledFunction& phi) {
  const auto& g = phi.grid;
  const double h = hp.value();
  std::vector<double> out(g.n_nodes(), 0.0);
  const double s_eff = g.step() * std::pow(2.0 * h, 1.0 / (1.0 - 2.0 * h));
  out[0] = kstar_value(hp, phi, s_eff);
  for (std::size_t j = 1; j < g.n_steps(); ++j) out[j] = kstar_value(hp, phi, g.node(j));
  out[g.n_steps()] = 0.0;
  return SampledFunction(g, std::move(out));
}

namespace {

// int_0^T v(s)^2 ds; the first and last cells are mapped with the 2H-power
// substitution that flattens the s^{2H-1} / (T-s)^{2H-1} profiles of v^2.
template <class Eval>
double norm_squared(double h, double T, std::size_t n_cells, const Eval& v) {
  const double dt = T / static_cast<double>(n_cells);
  const double a = 2.0 * h;
  const double inva = 1.0 / a;
  double acc = 0.0;
  for (int q = 0; q < kGl8; ++q) {
    const double y = 0.5 * (1.0 + kGl8X[q]);
    const double jac = inva * std::pow(y, inva - 1.0);
    const double s1 = dt * std::pow(y, inva);
    const double vl = v(s1);
    acc += 0.5 * dt * kGl8W[q] * vl * vl * jac;
    const double s2 = T - dt * std::pow(y, inva);
    const double vr = v(s2);
    acc += 0.5 * dt * kGl8W[q] * vr * vr * jac;
  }
  for (std::size_t j = 1; j + 1 < n_cells; ++j) {
    const double mid = (static_cast<double>(j) + 0.5) * dt;
    const double half = 0.5 * dt;
    for (int q = 0; q < kGl8; ++q) {
      const double val = v(mid + half * kGl8X[q]);
      acc += half * kGl8W[q] * val * val;
    }
  }
  return acc;
}

}  // namespace

double isometry_norm(HurstParameter hp, const SampledFunction& phi) {
  const double T = phi.grid.horizon();
  const double n2 = norm_squared(hp.value(), T, phi.grid.n_steps(),
                                 [&](double s) { return kstar_value(hp, phi, s); });
  return std::sqrt(std::max(n2, 0.0));
}

double isometry_norm(HurstParameter hp, double horizon, const StepFunction& phi,
                     std::size_t n_cells) {
  const double n2 = norm_squared(hp.value(), horizon, n_cells,
                                 [&](double s) { return kstar_value(hp, horizon, phi, s); });
  return std::sqrt(std::max(n2, 0.0));
}

std::vector<double> kstar_cell_weights(HurstParameter hp, const Lattice& lat,
                                       std::size_t upto_edge, const SampledFunction& phi) {
  if (!(phi.grid == lat.grid()))
    throw std::invalid_argument("kstar_cell_weights: phi grid does not match lattice grid");
  if (upto_edge == 0 || upto_edge > lat.n_cells())
    throw std::invalid_argument("kstar_cell_weights: upto_edge out of range");
  const double h = hp.value();
  const double ch = normalization_constant(hp);
  const double c1 = ch * (h - 0.5);
  const double horizon = lat.edge(upto_edge);
  std::vector<double> w(upto_edge, 0.0);
  for (std::size_t j = 0; j < upto_edge; ++j) {
    const double sj = 0.5 * (lat.edge(j) + lat.edge(j + 1));  // midpoint anchor
    const double phis = phi(sj);
    double acc = 0.0;
    for (std::size_t k = j; k < upto_edge; ++k) {
      const double lo = std::max(lat.edge(k), sj);
      const double hi = lat.edge(k + 1);
      if (hi <= lo) continue;
      const double slk = (phi(lat.edge(k + 1)) - phi(lat.edge(k))) / lat.width(k);
      const double A = std::pow(0.5 * (lo + hi) / sj, h - 0.5);
      const double x0 = lo - sj;
      const double x1 = hi - sj;
      const double dm1 = (std::pow(x1, h + 0.5) - std::pow(x0, h + 0.5)) / (h + 0.5);
      double term = slk * dm1;
      if (x0 > 0.0) {
        const double alpha = phi(lat.edge(k)) - phis - slk * (lat.edge(k) - sj);
        const double dm0 = (std::pow(x1, h - 0.5) - std::pow(x0, h - 0.5)) / (h - 0.5);
        term += alpha * dm0;
      }
      acc += A * term;
    }
    w[j] = kernel_cell_integral(h, ch, horizon, lat.edge(j), lat.edge(j + 1)) / lat.width(j) *
               phis +
           c1 * acc;
  }
  return w;
}

std::vector<double> kstar_cell_weights(HurstParameter hp, const Lattice& lat,
                                       std::size_t upto_edge, const StepFunction& phi) {
  if (upto_edge == 0 || upto_edge > lat.n_cells())
    throw std::invalid_argument("kstar_cell_weights: upto_edge out of range");
  const double h = hp.value();
  const double ch = normalization_constant(hp);
  const double horizon = lat.edge(upto_edge);
  std::vector<double> w(upto_edge, 0.0);
  for (const auto& c : phi.components) {
    const double upto = std::min(c.upto, horizon);
    if (!(upto > 0.0)) continue;
    for (std::size_t j = 0; j < upto_edge; ++j) {
      if (lat.edge(j) >= upto) break;
      w[j] += c.weight *
              kernel_cell_integral(h, ch, upto, lat.edge(j), std::min(lat.edge(j + 1), upto)) /
              lat.width(j);
    }
  }
  return w;
}

KstarTable::KstarTable(HurstParameter hp, TimeGrid grid, Exec exec)
    : h_(hp.value()), grid_(grid) {
  const std::size_t n = grid_.n_steps();
  const double dt = grid_.step();
  const double ch = normalization_constant(hp);
  c1_ = ch * (h_ - 0.5);
  dm1_first_ = std::pow(0.5 * dt, h_ + 0.5) / (h_ + 0.5);
  q_.resize(n);
  invq_.resize(n);
  adiag_.resize(n);
  dm0_.assign(n, 0.0);
  dm1_.assign(n, 0.0);
  std::vector<double> g1(n), g2(n);
  for (std::size_t m = 0; m < n; ++m) {
    q_[m] = std::pow(2.0 * static_cast<double>(m) + 1.0, h_ - 0.5);
    invq_[m] = 1.0 / q_[m];
    adiag_[m] = std::pow((4.0 * static_cast<double>(m) + 3.0) / (4.0 * static_cast<double>(m) + 2.0),
                         h_ - 0.5);
    const double x = (static_cast<double>(m) + 0.5) * dt;
    g1[m] = std::pow(x, h_ - 0.5);
    g2[m] = std::pow(x, h_ + 0.5);
  }
  for (std::size_t d = 1; d < n; ++d) {
    dm0_[d] = (g1[d] - g1[d - 1]) / (h_ - 0.5);
    dm1_[d] = (g2[d] - g2[d - 1]) / (h_ + 0.5);
  }
  kbar_.assign(n * (n + 1) / 2, 0.0);
  for_each_index(exec, n, [&](std::size_t row) {
    const std::size_t m = row + 1;
    const double tm = grid_.node(m);
    double* out = kbar_.data() + offset(m);
    for (std::size_t j = 0; j < m; ++j)
      out[j] = kernel_cell_integral(h_, ch, tm, grid_.node(j), grid_.node(j + 1)) / dt;
  });
}

void KstarTable::weights(std::size_t m, std::span<const double> phi, std::span<double> w) const {
  if (m == 0 || m > grid_.n_steps()) throw std::invalid_argument("KstarTable: bad horizon node");
  if (phi.size() < m + 1 || w.size() < m)
    throw std::invalid_argument("KstarTable: spans too short");
  const double dt = grid_.step();
  const double* kb = kbar_.data() + offset(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double pbar = 0.5 * (phi[j] + phi[j + 1]);
    const double slj = (phi[j + 1] - phi[j]) / dt;
    double acc = adiag_[j] * slj * dm1_first_;
    for (std::size_t k = j + 1; k < m; ++k) {
      const std::size_t d = k - j;
      const double sl = (phi[k + 1] - phi[k]) / dt;
      const double alpha = phi[k] - pbar - sl * (static_cast<double>(d) - 0.5) * dt;
      acc += q_[k] * invq_[j] * (alpha * dm0_[d] + sl * dm1_[d]);
    }
    w[j] = kb[j] * pbar + c1_ * acc;
  }
}

}  // namespace fbmsteer
