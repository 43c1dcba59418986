#include "fbmsteer/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbmsteer {

double DelayFunction::operator()(double t) const {
  if (kind == Kind::constant) return base;
  return base + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
}

void DelaySystemSpec::f(double t, std::span<const double> x, std::span<double> out) const {
  for (std::size_t m = 0; m < x.size(); ++m) out[m] = f_shape(t, x[m]);
}

void DelaySystemSpec::g(double t, std::span<const double> x, std::span<double> out) const {
  for (std::size_t m = 0; m < x.size(); ++m) out[m] = g_shape(t, x[m]);
}

std::vector<double> DelaySystemSpec::control_gains() const {
  if (gains.kind == ControlGains::Kind::uniform)
    return std::vector<double>(modes, gains.value);
  if (gains.values.size() != modes)
    throw std::invalid_argument("DelaySystemSpec: control gain list has wrong length");
  return gains.values;
}

CovarianceSpec DelaySystemSpec::covariance_spec() const {
  if (covariance.kind == CovarianceTag::Kind::list) {
    if (covariance.values.size() != modes)
      throw std::invalid_argument("DelaySystemSpec: eigenvalue list has wrong length");
    return CovarianceSpec(covariance.values);
  }
  std::vector<double> l(modes);
  for (std::size_t m = 0; m < modes; ++m)
    l[m] = covariance.level * std::pow(static_cast<double>(m + 1), -covariance.exponent);
  return CovarianceSpec(std::move(l));
}

DiagonalNoiseCoefficient DelaySystemSpec::sigma_on(TimeGrid grid) const {
  DiagonalNoiseCoefficient out{grid, modes, {}, 0.0, sigma.holder_gamma};
  out.values.resize(grid.n_nodes() * modes);
  for (std::size_t j = 0; j < grid.n_nodes(); ++j) {
    const double mod =
        1.0 + sigma.modulation * std::sin(2.0 * std::numbers::pi * grid.node(j) / horizon);
    for (std::size_t m = 0; m < modes; ++m)
      out.values[j * modes + m] =
          sigma.level * std::pow(static_cast<double>(m + 1), -sigma.mode_decay) * mod;
  }
  // Lipschitz bound of the modulation, scaled by the worst sqrt(lambda_n) n^{-decay}
  out.holder_c5 = declared.c5;
  return out;
}

double DelaySystemSpec::history_value(double t, std::size_t mode) const {
  double amp = history.level * std::pow(static_cast<double>(mode + 1), -history.mode_decay);
  if (history.random) {
    NormalStream ns(RngStream{history.random_stream, 17});
    amp *= ns.normal(mode);
  }
  if (max_delay <= 0.0) return amp;
  return amp * std::cos(0.5 * std::numbers::pi * (-t) / max_delay);
}

TheoremGateReport contraction_constant(double C1, double C3, double D, double M_L, double M_W,
                                       double T) {
  if (C1 < 0 || C3 < 0 || D < 0 || M_L < 0 || M_W < 0 || T < 0)
    throw std::invalid_argument("contraction_constant: inputs must be nonnegative");
  TheoremGateReport rep;
  rep.D = D;
  rep.M_L = M_L;
  rep.M_W = M_W;
  rep.T = T;
  const double mw2 = M_L * M_L * M_W * M_W;
  rep.condition_value = C3 * C3 + D * D * C1 * C1 * T * T + D * D * mw2 * C3 * C3 * T +
                        D * D * D * D * mw2 * C1 * C1 * T * T * T;
  rep.K = 4.0 * rep.condition_value;
  rep.passes = rep.condition_value < 0.25;
  return rep;
}

Trajectory::Trajectory(TimeGrid grid, double tau, std::size_t hist_steps, std::size_t modes)
    : grid_(grid), tau_(tau), hist_steps_(hist_steps), modes_(modes) {
  if (!(tau > 0.0)) throw std::invalid_argument("Trajectory: tau must be > 0");
  if (hist_steps < 1 || modes < 1) throw std::invalid_argument("Trajectory: bad dimensions");
  fwd_.assign(grid_.n_nodes() * modes_, 0.0);
  hist_.assign((hist_steps_ + 1) * modes_, 0.0);
}

void Trajectory::value_at(double t, std::span<double> out) const {
  if (out.size() != modes_) throw std::invalid_argument("Trajectory::value_at: bad output span");
  if (t < -tau_ - 1e-12 * tau_)
    throw std::invalid_argument("Trajectory::value_at: lookup before -tau");
  if (t <= 0.0) {
    const double dt = tau_ / static_cast<double>(hist_steps_);
    const double pos = std::clamp((t + tau_) / dt, 0.0, static_cast<double>(hist_steps_));
    const std::size_t j = std::min(static_cast<std::size_t>(pos), hist_steps_ - 1);
    const double lam = pos - static_cast<double>(j);
    for (std::size_t m = 0; m < modes_; ++m)
      out[m] = hist_[j * modes_ + m] * (1.0 - lam) + hist_[(j + 1) * modes_ + m] * lam;
    return;
  }
  const double dt = grid_.step();
  const double pos = std::min(t / dt, static_cast<double>(grid_.n_steps()));
  const std::size_t i = std::min(static_cast<std::size_t>(pos), grid_.n_steps() - 1);
  const double lam = pos - static_cast<double>(i);
  for (std::size_t m = 0; m < modes_; ++m)
    out[m] = fwd_[i * modes_ + m] * (1.0 - lam) + fwd_[(i + 1) * modes_ + m] * lam;
}

std::vector<double> delayed_lookup(const Trajectory& x, double t, const DelayFunction& delay) {
  std::vector<double> out(x.modes());
  x.value_at(t - delay(t), out);
  return out;
}

SpecAuditReport audit_spec(const DelaySystemSpec& spec, RngStream rng, std::size_t pairs) {
  SpecAuditReport rep;
  const std::size_t N = spec.modes;
  NormalStream ns(rng.derived(41));
  std::vector<double> x(N), y(N), fx(N), fy(N);
  std::uint64_t draw = 0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double t = spec.horizon * uniform01(rng.derived(42), p);
    double dx2 = 0.0, nx2 = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      x[m] = 2.0 * ns.normal(draw++);
      y[m] = 2.0 * ns.normal(draw++);
      const double d = x[m] - y[m];
      dx2 += d * d;
      nx2 += x[m] * x[m];
    }
    spec.f(t, x, fx);
    spec.f(t, y, fy);
    double dfx2 = 0.0, nfx2 = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      const double d = fx[m] - fy[m];
      dfx2 += d * d;
      nfx2 += fx[m] * fx[m];
    }
    if (dx2 > 0.0) rep.measured_f_lipschitz = std::max(rep.measured_f_lipschitz, std::sqrt(dfx2 / dx2));
    rep.measured_f_growth = std::max(rep.measured_f_growth, nfx2 / (1.0 + nx2));
    spec.g(t, x, fx);
    spec.g(t, y, fy);
    double dgx2 = 0.0, ngx2 = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      const double d = fx[m] - fy[m];
      dgx2 += d * d;
      ngx2 += fx[m] * fx[m];
    }
    if (dx2 > 0.0) rep.measured_g_lipschitz = std::max(rep.measured_g_lipschitz, std::sqrt(dgx2 / dx2));
    rep.measured_g_growth = std::max(rep.measured_g_growth, ngx2 / (1.0 + nx2));
  }

  const double tol = 1.0 + 1e-9;
  if (rep.measured_f_lipschitz > spec.declared.c1 * tol)
    rep.failures.push_back("declared C1 below measured f Lipschitz quotient");
  if (rep.measured_f_growth > spec.declared.c2 * tol)
    rep.failures.push_back("declared C2 below measured f growth quotient");
  if (rep.measured_g_lipschitz > spec.declared.c3 * tol)
    rep.failures.push_back("declared C3 below measured g Lipschitz quotient");
  if (rep.measured_g_growth > spec.declared.c4 * tol)
    rep.failures.push_back("declared C4 below measured g growth quotient");

  // delay range on a dense sample
  for (const auto* d : {&spec.delay_r, &spec.delay_rho}) {
    for (int k = 0; k <= 1024; ++k) {
      const double t = spec.horizon * static_cast<double>(k) / 1024.0;
      const double v = (*d)(t);
      if (v < -1e-12 || v > spec.max_delay * tol) {
        rep.failures.push_back("delay leaves [0, tau]");
        break;
      }
    }
  }

  const HurstParameter h(spec.hurst);
  if (!(spec.sigma.holder_gamma > 0.5 - h.value()))
    rep.failures.push_back("sigma Hoelder exponent must exceed 1/2 - H");
  rep.noise = validate_noise(spec.sigma_on(TimeGrid(spec.horizon, 64)), spec.covariance_spec(), h);
  if (!rep.noise.holder_ok) rep.failures.push_back("sigma fails the per-mode Hoelder audit");

  // control gain bound
  double max_gain = 0.0;
  for (double gain_v : spec.control_gains()) max_gain = std::max(max_gain, std::abs(gain_v));
  if (max_gain > spec.declared.m_l * tol)
    rep.failures.push_back("declared M_L below max control gain");

  rep.ok = rep.failures.empty();
  return rep;
}

DelaySystemSpec heat_memory_example(const HeatMemoryParams& p) {
  DelaySystemSpec spec;
  spec.modes = p.modes;
  spec.horizon = p.horizon;
  spec.hurst = p.hurst;
  spec.max_delay = std::max(p.tau1, p.tau2);
  if (!(spec.max_delay > 0.0))
    throw std::invalid_argument("heat_memory_example: needs a positive delay");
  spec.delay_r = DelayFunction{DelayFunction::Kind::constant, p.tau1, 0.0, 1.0};
  spec.delay_rho = DelayFunction{DelayFunction::Kind::constant, p.tau2, 0.0, 1.0};
  spec.f_shape = PointwiseShape{p.f_gain == 0.0 ? PointwiseShape::Kind::zero : PointwiseShape::Kind::sine,
                                p.f_gain};
  spec.g_shape = PointwiseShape{p.g_gain == 0.0 ? PointwiseShape::Kind::zero : PointwiseShape::Kind::sine,
                                p.g_gain};
  spec.sigma = SigmaSpec{p.noise_level, 2.0, p.noise_modulation, 1.0};
  spec.history = HistorySpec{0.5, 2.0, p.random_history, 9001};
  spec.covariance = CovarianceTag{CovarianceTag::Kind::power, 1.0, 2.0, {}};
  spec.gains = ControlGains{ControlGains::Kind::uniform, 1.0, {}};
  spec.memory = p.b_amplitude == 0.0 ? MemoryKernel::zero()
                                     : MemoryKernel::exp_decay(p.b_amplitude, p.b_rate);
  spec.declared.c1 = p.f_gain;
  spec.declared.c2 = p.f_gain * p.f_gain;
  spec.declared.c3 = p.g_gain;
  spec.declared.c4 = p.g_gain * p.g_gain;
  // |s_n(t)-s_n(r)| sqrt(lambda_n): worst mode is n=1 for decay >= 1
  spec.declared.c5 =
      p.noise_level * std::abs(p.noise_modulation) * 2.0 * std::numbers::pi / p.horizon + 1e-12;
  spec.declared.m_l = 1.0;
  return spec;
}

}  // namespace fbmsteer
