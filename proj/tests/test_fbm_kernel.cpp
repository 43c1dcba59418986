#include <doctest.h>

#include <cmath>
#include <functional>

#include "fbmsteer/fbm_kernel.hpp"
#include "fbmsteer/rng.hpp"

using namespace fbmsteer;

namespace {

// Independent oracle: adaptive Simpson on the v-substituted inner integral
// (u = s + v^2), then the displayed kernel formula assembled directly.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fb, double fm, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, fm, flm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, 0.5 * tol, depth - 1);
}

double kernel_oracle(double h, double t, double s) {
  if (t <= s) return 0.0;
  const auto integrand = [&](double v) {
    if (v == 0.0) return 0.0;  // v^{2h} limit
    return 2.0 * std::pow(s + v * v, h - 1.5) * std::pow(v * v, h - 0.5) * v;
  };
  const double b = std::sqrt(t - s);
  const double I = adaptive_simpson(integrand, 0.0, b, integrand(0.0), integrand(b),
                                    integrand(0.5 * b), 1e-10, 48);
  const double ch = normalization_constant(HurstParameter(h));
  return ch * (std::pow(t / s, h - 0.5) * std::pow(t - s, h - 0.5) -
               (h - 0.5) * std::pow(s, 0.5 - h) * I);
}

}  // namespace

TEST_CASE("Hurst parameter restricted to (0, 1/2)") {
  CHECK_THROWS_AS(HurstParameter(0.0), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(0.5), std::invalid_argument);
  CHECK_THROWS_AS(HurstParameter(0.7), std::invalid_argument);
  CHECK(HurstParameter(0.49).value() == 0.49);
}

TEST_CASE("covariance closed form") {
  CHECK(covariance(HurstParameter(0.3), 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(covariance(HurstParameter(0.25), 0.0, 2.0) == doctest::Approx(0.0));
  CHECK(covariance(HurstParameter(0.25), 1.0, 2.0) ==
        doctest::Approx(0.70710678118654752).epsilon(1e-14));
  CHECK(covariance(HurstParameter(0.25), 0.7, 1.3) ==
        covariance(HurstParameter(0.25), 1.3, 0.7));
  CHECK_THROWS_AS(covariance(HurstParameter(0.25), -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("normalization constant against the Gamma-function route") {
  // B(1/2, 3/4) = Gamma(1/2) Gamma(3/4) / Gamma(5/4)
  const double beta = std::tgamma(0.5) * std::tgamma(0.75) / std::tgamma(1.25);
  const double direct = std::sqrt(0.5 / (0.5 * beta));
  CHECK(normalization_constant(HurstParameter(0.25)) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(normalization_constant(HurstParameter(0.25)) ==
        doctest::Approx(0.64599800374075197).epsilon(1e-12));
  CHECK(normalization_constant(HurstParameter(0.1)) ==
        doctest::Approx(0.35768577342233514).epsilon(1e-12));
  CHECK(normalization_constant(HurstParameter(0.4)) ==
        doctest::Approx(0.88072568336372688).epsilon(1e-12));
  CHECK(normalization_constant(HurstParameter(0.49)) > 0.0);
}

TEST_CASE("kernel zero convention and domain") {
  CHECK(kernel(HurstParameter(0.3), 1.0, 2.0) == 0.0);
  CHECK(kernel(HurstParameter(0.3), 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(kernel(HurstParameter(0.3), 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel(HurstParameter(0.3), 1.0, -0.5), std::invalid_argument);
  // near-diagonal threshold
  CHECK(kernel(HurstParameter(0.3), 1.0, 1.0 - 1e-14) == 0.0);
}

TEST_CASE("kernel against adaptive-quadrature oracle") {
  CHECK(kernel(HurstParameter(0.25), 1.0, 0.5) ==
        doctest::Approx(0.82032262376475282).epsilon(1e-8));
  const RngStream rng{2024, 1};
  for (int i = 0; i < 40; ++i) {
    const double h = 0.05 + 0.4 * uniform01(rng.derived(1), i);
    const double t = 0.2 + 1.5 * uniform01(rng.derived(2), i);
    const double s = t * (0.02 + 0.96 * uniform01(rng.derived(3), i));
    const double got = kernel(HurstParameter(h), t, s);
    const double want = kernel_oracle(h, t, s);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("kernel time derivative") {
  const HurstParameter h(0.25);
  const double ch = normalization_constant(h);
  CHECK(std::abs(kernel_dt(h, 2.0, 1.0)) <= ch * 0.25 * std::pow(1.0, -1.25));
  CHECK(kernel_dt(h, 2.0, 1.0) < 0.0);
  CHECK_THROWS_AS(kernel_dt(h, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_dt(h, 1.0, 2.0), std::invalid_argument);

  // central finite difference of the quadrature kernel
  const HurstParameter h3(0.3);
  const double t = 1.5, s = 0.5, dt = 1e-5;
  const double fd = (kernel(h3, t + dt, s) - kernel(h3, t - dt, s)) / (2.0 * dt);
  CHECK(kernel_dt(h3, t, s) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("kernel bound properties on random triples") {
  const RngStream rng{5150, 2};
  std::size_t checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double hv = 0.02 + 0.44 * uniform01(rng.derived(1), i);
    const double t = 0.05 + 1.95 * uniform01(rng.derived(2), i);
    const double u = std::clamp(uniform01(rng.derived(3), i), 1e-6, 1.0 - 1e-6);
    const double s = t * u;
    const HurstParameter h(hv);
    const double ch = normalization_constant(h);
    const double b4 = 2.0 * ch * (std::pow(t - s, hv - 0.5) + std::pow(s, hv - 0.5));
    REQUIRE(std::abs(kernel(h, t, s)) <= b4 * (1.0 + 1e-9));
    const double b5 = ch * (0.5 - hv) * std::pow(t - s, hv - 1.5);
    REQUIRE(std::abs(kernel_dt(h, t, s)) <= b5 * (1.0 + 1e-9));
    ++checked;
  }
  CHECK(checked == 1000);

  // derivative consistency away from the singular edges
  for (int i = 0; i < 100; ++i) {
    const double hv = 0.05 + 0.4 * uniform01(rng.derived(4), i);
    const double t = 0.5 + 1.0 * uniform01(rng.derived(5), i);
    const double s = t * (0.2 + 0.6 * uniform01(rng.derived(6), i));
    const HurstParameter h(hv);
    const double dt = 1e-5 * t;
    const double fd = (kernel(h, t + dt, s) - kernel(h, t - dt, s)) / (2.0 * dt);
    REQUIRE(kernel_dt(h, t, s) == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("cell averages match pointwise quadrature on smooth cells") {
  const HurstParameter h(0.25);
  // interior cell: compare against high-order Gauss on the pointwise kernel
  const double t = 1.0, s0 = 0.4, s1 = 0.45;
  double acc = 0.0;
  const int q = 64;
  for (int i = 0; i < q; ++i) {
    const double x = s0 + (s1 - s0) * (i + 0.5) / q;
    acc += kernel(h, t, x) * (s1 - s0) / q;
  }
  CHECK(kernel_cell_average(h, t, s0, s1) == doctest::Approx(acc / (s1 - s0)).epsilon(1e-6));
  // beyond the diagonal the zero extension wins
  CHECK(kernel_cell_average(h, 0.5, 0.6, 0.7) == 0.0);
}

TEST_CASE("K* transform of a constant is the kernel slice") {
  const HurstParameter h(0.25);
  const TimeGrid g(1.0, 64);
  const auto out = kstar_transform(h, SampledFunction::constant(g, 3.0));
  for (std::size_t j = 1; j < g.n_steps(); ++j)
    CHECK(out.values[j] == doctest::Approx(3.0 * kernel(h, 1.0, g.node(j))).epsilon(1e-9));
  CHECK(out.values[g.n_steps()] == 0.0);
  CHECK(std::isfinite(out.values[0]));
}

TEST_CASE("K* transform is finite for Hoelder data") {
  const HurstParameter h(0.25);
  const TimeGrid g(1.0, 128);
  std::vector<double> v(g.n_nodes());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::sqrt(g.node(j));  // Hoelder-1/2
  const auto out = kstar_transform(h, SampledFunction(g, std::move(v)));
  for (double x : out.values) CHECK(std::isfinite(x));
}

TEST_CASE("isometry norm: indicators and step combinations") {
  for (double hv : {0.1, 0.25, 0.4}) {
    const HurstParameter h(hv);
    const StepFunction full{{{1.0, 1.0}}};
    CHECK(isometry_norm(h, 1.0, full, 512) == doctest::Approx(1.0).epsilon(0.01));
  }
  const HurstParameter h(0.25);
  const StepFunction half{{{0.5, 1.0}}};
  CHECK(isometry_norm(h, 1.0, half, 512) ==
        doctest::Approx(0.84089641525371454).epsilon(0.01));

  // bilinear form against R_H for random step functions
  const RngStream rng{31, 4};
  for (int rep = 0; rep < 5; ++rep) {
    StepFunction phi;
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
      prev += 0.1 + 0.25 * uniform01(rng.derived(k), rep);
      phi.components.push_back({std::min(prev, 1.0), -0.5 + uniform01(rng.derived(10 + k), rep)});
    }
    double bil = 0.0;
    for (const auto& a : phi.components)
      for (const auto& b : phi.components)
        bil += a.weight * b.weight * covariance(h, a.upto, b.upto);
    const double nrm = isometry_norm(h, 1.0, phi, 512);
    REQUIRE(nrm * nrm == doctest::Approx(bil).epsilon(0.01));
  }
}

TEST_CASE("isometry norm of the zero function") {
  const HurstParameter h(0.25);
  const TimeGrid g(1.0, 32);
  CHECK(isometry_norm(h, SampledFunction::constant(g, 0.0)) == doctest::Approx(0.0));
}

TEST_CASE("piecewise-linear isometry norm for the constant function") {
  const HurstParameter h(0.25);
  const TimeGrid g(1.0, 512);
  const double nrm = isometry_norm(h, SampledFunction::constant(g, 1.0));
  CHECK(nrm * nrm == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform-grid K* table agrees with the general lattice weights") {
  const HurstParameter h(0.3);
  const TimeGrid g(1.0, 256);
  const KstarTable table(h, g, Exec::serial);
  std::vector<double> phi(g.n_nodes());
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double t = g.node(j);
    phi[j] = 0.3 + t * t - 0.4 * t;
  }
  std::vector<double> w_table(g.n_steps());
  table.weights(g.n_steps(), phi, w_table);
  const auto w_general = kstar_cell_weights(h, Lattice::uniform(g), g.n_steps(),
                                            SampledFunction(g, phi));
  REQUIRE(w_general.size() == w_table.size());
  for (std::size_t j = 0; j < w_table.size(); ++j)
    CHECK(w_table[j] == doctest::Approx(w_general[j]).epsilon(1e-11));
}
