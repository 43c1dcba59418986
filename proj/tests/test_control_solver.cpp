#include <doctest.h>

#include <cmath>

#include "fbmsteer/control_solver.hpp"

using namespace fbmsteer;

namespace {

DelaySystemSpec linear_deterministic_spec(std::size_t modes = 4) {
  HeatMemoryParams p;
  p.modes = modes;
  p.f_gain = 0.0;
  p.g_gain = 0.0;
  p.b_amplitude = 0.0;
  p.noise_level = 0.0;
  return heat_memory_example(p);
}

}  // namespace

TEST_CASE("controllability operator: gramians and the measured W-inverse bound") {
  const TimeGrid g(1.0, 512);
  const auto fam = solve_modes(MemoryKernel::zero(), 1, g, Exec::serial);
  const auto op = make_controllability_operator(fam, {1.0});
  CHECK(op.gramians[0] == doctest::Approx(0.43233235838169365).epsilon(1e-4));
  CHECK(op.m_w_measured == doctest::Approx(1.0 / std::sqrt(op.gramians[0])));

  CHECK_THROWS_AS(
      make_controllability_operator(solve_modes(MemoryKernel::zero(), 1, g, Exec::serial), {0.0}),
      std::runtime_error);
}

TEST_CASE("apply_W: zero control, closed-form mode values, exact linearity") {
  const TimeGrid g(1.0, 512);
  const std::size_t N = 3;
  const auto fam = solve_modes(MemoryKernel::zero(), N, g, Exec::serial);
  const auto op = make_controllability_operator(fam, std::vector<double>(N, 1.0));

  ControlSignal zero{g, N, std::vector<double>(g.n_nodes() * N, 0.0), 0.0};
  for (double v : apply_W(op, zero)) CHECK(v == 0.0);

  // u_n(s) = e^{-n^2 (T-s)}  =>  (W u)_n = (1 - e^{-2 n^2 T}) / (2 n^2)
  ControlSignal u = zero;
  for (std::size_t j = 0; j <= g.n_steps(); ++j)
    for (std::size_t m = 0; m < N; ++m) {
      const double a = static_cast<double>((m + 1) * (m + 1));
      u.values[j * N + m] = std::exp(-a * (1.0 - g.node(j)));
    }
  const auto z = apply_W(op, u);
  for (std::size_t m = 0; m < N; ++m) {
    const double a = static_cast<double>((m + 1) * (m + 1));
    CHECK(z[m] == doctest::Approx((1.0 - std::exp(-2.0 * a)) / (2.0 * a)).epsilon(1e-3));
  }

  ControlSignal su = u;
  for (auto& v : su.values) v *= -2.5;
  const auto sz = apply_W(op, su);
  for (std::size_t m = 0; m < N; ++m)
    CHECK(sz[m] == doctest::Approx(-2.5 * z[m]).epsilon(1e-13));
}

TEST_CASE("invert_W is the exact discrete minimum-norm preimage") {
  const TimeGrid g(1.0, 512);
  const std::size_t N = 4;
  const auto fam = solve_modes(MemoryKernel::exp_decay(0.5, 1.0), N, g, Exec::serial);
  const auto op = make_controllability_operator(fam, {1.0, 0.8, 1.2, 0.5});

  const std::vector<double> z0(N, 0.0);
  CHECK(invert_W(op, z0).l2_norm == 0.0);

  const std::vector<double> z = {1.0, -0.5, 0.25, 2.0};
  const auto u = invert_W(op, z);
  const auto back = apply_W(op, u);
  for (std::size_t m = 0; m < N; ++m)
    CHECK(back[m] == doctest::Approx(z[m]).epsilon(1e-12));

  // perturbation orthogonal (trapezoid pairing) to every r_n(T-.) leaves W u
  // unchanged but can only grow the norm
  ControlSignal up = u;
  const std::size_t n = g.n_steps();
  for (std::size_t m = 0; m < N; ++m) {
    // p(s) = r(T-s) * (s - c) with c chosen so <r(T-.), p> = 0
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      const double wq = (j == 0 || j == n) ? 0.5 : 1.0;
      const double r = fam.r(m, n - j);
      num += wq * r * r * g.node(j);
      den += wq * r * r;
    }
    const double c = num / den;
    for (std::size_t j = 0; j <= n; ++j)
      up.values[j * N + m] += 0.3 * fam.r(m, n - j) * (g.node(j) - c);
  }
  up.l2_norm = control_l2_norm(g, N, up.values);
  const auto back2 = apply_W(op, up);
  for (std::size_t m = 0; m < N; ++m)
    CHECK(back2[m] == doctest::Approx(z[m]).epsilon(1e-9));
  CHECK(up.l2_norm >= u.l2_norm - 1e-12);

  // closed-form single-mode Gramian (b = 0): u(s) = e^{-(1-s)} z / gamma
  const auto fam1 = solve_modes(MemoryKernel::zero(), 1, g, Exec::serial);
  const auto op1 = make_controllability_operator(fam1, {1.0});
  const auto u1 = invert_W(op1, std::vector<double>{1.0});
  CHECK(u1.at(256, 0) ==
        doctest::Approx(std::exp(-(1.0 - g.node(256))) / 0.43233235838169365).epsilon(1e-3));
}

TEST_CASE("synthesize_control: linear deterministic target algebra") {
  const auto spec = linear_deterministic_spec();
  const TimeGrid g(1.0, 128);
  const SteeringContext ctx(spec, g, RngStream{1, 1}, Exec::serial);
  const auto x0 = ctx.initial_iterate();

  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 0.7;
  const auto u = ctx.synthesize_control(x0, x1);
  // z = x1 - R(T) phi(0); verify against invert_W of that explicit vector
  std::vector<double> z(spec.modes);
  for (std::size_t m = 0; m < spec.modes; ++m) {
    const double phi0 = spec.history_value(0.0, m);
    z[m] = x1[m] - ctx.family().r(m, g.n_steps()) * phi0;
  }
  const auto u_direct = invert_W(ctx.op(), z);
  for (std::size_t j = 0; j <= g.n_steps(); ++j)
    for (std::size_t m = 0; m < spec.modes; ++m)
      CHECK(u.at(j, m) == doctest::Approx(u_direct.at(j, m)).epsilon(1e-12));
}

TEST_CASE("synthesize_control: zero control at the matched target") {
  HeatMemoryParams p;
  p.modes = 3;
  p.f_gain = 0.0;
  p.noise_level = 0.0;
  p.g_gain = 0.05;  // neutral term stays on
  const auto spec = heat_memory_example(p);
  const TimeGrid g(1.0, 128);
  const SteeringContext ctx(spec, g, RngStream{2, 2}, Exec::serial);
  const auto x0 = ctx.initial_iterate();

  // x1 := R(T)(phi(0)+g(0,phi(-r(0)))) - g(T, x0(T - r(T))) makes z vanish
  std::vector<double> look(spec.modes), gT(spec.modes), x1(spec.modes);
  x0.value_at(1.0 - spec.delay_r(1.0), look);
  spec.g(1.0, look, gT);
  for (std::size_t m = 0; m < spec.modes; ++m) {
    const double phi0 = spec.history_value(0.0, m);
    const double phir = spec.history_value(-spec.delay_r(0.0), m);
    std::vector<double> tmp_in = {phir}, tmp_out = {0.0};
    // coordinate-wise g at time 0
    std::vector<double> full_in(spec.modes, 0.0), full_out(spec.modes, 0.0);
    full_in[m] = phir;
    spec.g(0.0, full_in, full_out);
    x1[m] = ctx.family().r(m, g.n_steps()) * (phi0 + full_out[m]) - gT[m];
  }
  const auto u = ctx.synthesize_control(x0, x1);
  CHECK(u.l2_norm < 1e-12);
}

TEST_CASE("apply_psi: pure semigroup flow and history pinning") {
  const auto spec = linear_deterministic_spec();
  const TimeGrid g(1.0, 128);
  const SteeringContext ctx(spec, g, RngStream{3, 3}, Exec::serial);
  const auto x0 = ctx.initial_iterate();
  ControlSignal u0{g, spec.modes, std::vector<double>(g.n_nodes() * spec.modes, 0.0), 0.0};
  const auto out = ctx.apply_psi(x0, u0);
  for (std::size_t i = 0; i <= g.n_steps(); ++i)
    for (std::size_t m = 0; m < spec.modes; ++m) {
      const double want = ctx.family().r(m, i) * spec.history_value(0.0, m);
      CHECK(out.fwd_node(i)[m] == doctest::Approx(want).epsilon(1e-12));
    }
  CHECK(out.hist() == x0.hist());
  // t = 0 recovers phi(0) exactly even with the neutral term switched on
  HeatMemoryParams p;
  p.modes = 2;
  p.noise_level = 0.0;
  const auto spec_g = heat_memory_example(p);
  const SteeringContext ctx_g(spec_g, g, RngStream{3, 4}, Exec::serial);
  const auto x0g = ctx_g.initial_iterate();
  ControlSignal u0g{g, 2, std::vector<double>(g.n_nodes() * 2, 0.0), 0.0};
  const auto outg = ctx_g.apply_psi(x0g, u0g);
  for (std::size_t m = 0; m < 2; ++m)
    CHECK(outg.fwd_node(0)[m] == doctest::Approx(spec_g.history_value(0.0, m)).epsilon(1e-14));
}

TEST_CASE("apply_psi: sigma-only trajectory equals the cached convolution") {
  HeatMemoryParams p;
  p.modes = 2;
  p.f_gain = 0.0;
  p.g_gain = 0.0;
  auto spec = heat_memory_example(p);
  spec.history.level = 0.0;  // zero history isolates the stochastic term
  const TimeGrid g(1.0, 64);
  const SteeringContext ctx(spec, g, RngStream{4, 4}, Exec::serial);
  const auto x0 = ctx.initial_iterate();
  ControlSignal u0{g, 2, std::vector<double>(g.n_nodes() * 2, 0.0), 0.0};
  const auto out = ctx.apply_psi(x0, u0);
  for (std::size_t i = 0; i <= g.n_steps(); ++i)
    for (std::size_t m = 0; m < 2; ++m)
      CHECK(out.fwd_node(i)[m] == doctest::Approx(ctx.stochastic_term(i, m)).epsilon(1e-14));
}

TEST_CASE("stochastic convolution variance against the discrete isometry") {
  HeatMemoryParams p;
  p.modes = 1;
  p.f_gain = 0.0;
  p.g_gain = 0.0;
  p.noise_modulation = 0.0;
  const auto spec = heat_memory_example(p);
  const TimeGrid g(1.0, 16);
  const std::size_t node = 16;
  const std::size_t draws = 400;
  double m1 = 0.0, m2 = 0.0;
  double want = -1.0;
  for (std::size_t d = 0; d < draws; ++d) {
    const SteeringContext ctx(spec, g, RngStream{5, 5}.derived(d), Exec::serial);
    const double v = ctx.stochastic_term(node, 0);
    m1 += v;
    m2 += v * v;
    if (d == 0) {
      // discrete isometry: lambda_1 sum w_j^2 dt with the same composed weights
      const HurstParameter h(spec.hurst);
      const KstarTable table(h, g, Exec::serial);
      const auto sigma = spec.sigma_on(g);
      std::vector<double> integrand(node + 1), w(node);
      for (std::size_t j = 0; j <= node; ++j)
        integrand[j] = ctx.family().r(0, node - j) * sigma.at(j, 0);
      table.weights(node, integrand, w);
      want = 0.0;
      for (double x : w) want += x * x * g.step();
      want *= spec.covariance_spec().eigenvalue(0);
    }
  }
  m1 /= draws;
  const double var = m2 / draws - m1 * m1;
  const double se = var * std::sqrt(2.0 / static_cast<double>(draws));
  CHECK(std::abs(var - want) <= 3.0 * se);
}

TEST_CASE("solve_steering: linear deterministic case needs one iteration") {
  const auto spec = linear_deterministic_spec();
  const TimeGrid g(1.0, 512);
  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 1.0;
  const auto res = solve_steering(spec, g, x1, RngStream{6, 6}, SteeringOptions{1e-8, 25, Exec::serial});
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.terminal_error < 1e-3);
  CHECK(res.picard_errors.size() == 2);
  CHECK(res.picard_errors[1] == 0.0);
}

TEST_CASE("solve_steering is bitwise reproducible") {
  const auto spec = heat_memory_example(HeatMemoryParams{});
  const TimeGrid g(1.0, 128);
  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 1.0;
  const auto a = solve_steering(spec, g, x1, RngStream{7, 7}, SteeringOptions{1e-8, 25, Exec::serial});
  const auto b = solve_steering(spec, g, x1, RngStream{7, 7}, SteeringOptions{1e-8, 25, Exec::parallel});
  CHECK(a.trajectory.fwd() == b.trajectory.fwd());
  CHECK(a.control.values == b.control.values);
  CHECK(a.picard_errors == b.picard_errors);
}

TEST_CASE("steering pins the history and hits the target") {
  const auto spec = heat_memory_example(HeatMemoryParams{});
  const TimeGrid g(1.0, 128);
  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 1.0;
  const SteeringContext ctx(spec, g, RngStream{8, 8}, Exec::serial);
  const auto res = solve_steering(ctx, x1, SteeringOptions{1e-8, 25, Exec::serial});
  const auto x0 = ctx.initial_iterate();
  CHECK(res.trajectory.hist() == x0.hist());
  CHECK(res.terminal_error < 1e-4);
  CHECK(res.converged);
}

TEST_CASE("contraction demo hits the requested gate constant and converges fast") {
  const TimeGrid g(1.0, 256);
  const auto demo = make_contraction_demo(g, 0.16);
  const SteeringContext ctx(demo, g, RngStream{9, 9}, Exec::serial);
  CHECK(ctx.gate().passes);
  CHECK(ctx.gate().K == doctest::Approx(0.16).epsilon(1e-9));
  std::vector<double> x1(demo.modes, 0.3);
  const auto res = solve_steering(ctx, x1, SteeringOptions{1e-8, 25, Exec::serial});
  CHECK(res.converged);
  CHECK(res.iterations <= 12);
  CHECK(res.measured_ratio <= 0.45);
}

TEST_CASE("terminal quadrature residual shrinks under refinement") {
  const auto spec = heat_memory_example(HeatMemoryParams{});
  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 1.0;
  // shared Brownian path across resolutions
  const std::size_t fine_n = 256;
  std::vector<std::vector<double>> fine(spec.modes, std::vector<double>(fine_n));
  for (std::size_t m = 0; m < spec.modes; ++m) {
    NormalStream ns(RngStream{10, 10}.derived(m));
    ns.fill(0, fine[m]);
    for (auto& v : fine[m]) v *= std::sqrt(1.0 / fine_n);
  }
  const auto lambdas = spec.covariance_spec();
  double errs[2];
  const std::size_t steps[2] = {128, 256};
  for (int k = 0; k < 2; ++k) {
    const TimeGrid g(1.0, steps[k]);
    const VolterraWeights w(HurstParameter(spec.hurst), Lattice::uniform(g), Exec::serial);
    QfbmPath noise{g, lambdas.eigenvalues(), {}};
    for (std::size_t m = 0; m < spec.modes; ++m) {
      std::vector<double> agg(steps[k], 0.0);
      const std::size_t f = fine_n / steps[k];
      for (std::size_t j = 0; j < agg.size(); ++j)
        for (std::size_t q = 0; q < f; ++q) agg[j] += fine[m][j * f + q];
      noise.mode_paths.push_back(sample_fbm_volterra_from_increments(w, agg, RngStream{}));
    }
    const SteeringContext ctx(spec, g, std::move(noise), Exec::serial);
    errs[k] = solve_steering(ctx, x1, SteeringOptions{1e-8, 25, Exec::serial}).terminal_error;
  }
  CHECK(errs[1] <= errs[0] + 1e-12);
}
