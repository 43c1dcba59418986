#include <doctest.h>

#include <cmath>
#include <complex>

#include "fbmsteer/resolvent.hpp"
#include "fbmsteer/rng.hpp"

using namespace fbmsteer;

namespace {

// r'' + a r' + a b0 r = 0, r(0) = 1, r'(0) = -a (the once-differentiated
// constant-kernel Volterra equation).
double constant_kernel_oracle(double a, double b0, double t) {
  const std::complex<double> disc = a * a - 4.0 * a * b0;
  const std::complex<double> mu = std::sqrt(disc);
  const std::complex<double> m1 = 0.5 * (-a + mu), m2 = 0.5 * (-a - mu);
  const std::complex<double> A = (-a - m2) / (m1 - m2);
  return (A * std::exp(m1 * t) + (1.0 - A) * std::exp(m2 * t)).real();
}

}  // namespace

TEST_CASE("semigroup oracle: zero memory kernel") {
  const TimeGrid g(1.0, 1024);
  const auto fam = solve_modes(MemoryKernel::zero(), 8, g, Exec::serial);
  double worst = 0.0;
  for (std::size_t m = 0; m < 8; ++m)
    for (std::size_t j = 0; j <= g.n_steps(); ++j)
      worst = std::max(worst,
                       std::abs(fam.r(m, j) - std::exp(-fam.eigenvalues[m] * g.node(j))));
  CHECK(worst < 1e-4);
}

TEST_CASE("constant kernel oracle via characteristic roots") {
  const TimeGrid g(1.0, 1024);
  const auto fam = solve_modes(MemoryKernel::constant(0.5), 8, g, Exec::serial);
  double worst = 0.0;
  for (std::size_t m = 0; m < 8; ++m)
    for (std::size_t j = 0; j <= g.n_steps(); ++j)
      worst = std::max(worst, std::abs(fam.r(m, j) -
                                       constant_kernel_oracle(fam.eigenvalues[m], 0.5, g.node(j))));
  CHECK(worst < 1e-4);
}

TEST_CASE("R(0) = I exactly") {
  const auto fam =
      solve_modes(MemoryKernel::exp_decay(0.5, 1.0), 16, TimeGrid(1.0, 64), Exec::serial);
  for (std::size_t m = 0; m < 16; ++m) CHECK(fam.r(m, 0) == 1.0);
}

TEST_CASE("diagonal application") {
  const TimeGrid g(1.0, 256);
  const auto fam = solve_modes(MemoryKernel::zero(), 4, g, Exec::serial);
  std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
  const auto y0 = apply(fam, 0, e1);
  CHECK(y0 == e1);
  const auto y = apply(fam, 128, e1);
  CHECK(y[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  CHECK(y[1] == 0.0);

  // linearity of the diagonal scaling (up to one rounding of the combination)
  std::vector<double> a = {0.3, -1.2, 0.5, 2.0}, b = {1.0, 0.25, -0.75, 0.1};
  std::vector<double> combo(4);
  for (int m = 0; m < 4; ++m) combo[m] = 2.0 * a[m] - 3.0 * b[m];
  const auto ya = apply(fam, 77, a);
  const auto yb = apply(fam, 77, b);
  const auto yc = apply(fam, 77, combo);
  for (int m = 0; m < 4; ++m)
    CHECK(yc[m] == doctest::Approx(2.0 * ya[m] - 3.0 * yb[m]).epsilon(1e-14));

  CHECK_THROWS_AS(apply(fam, 0, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("resolvent identity residual") {
  const MemoryKernel b = MemoryKernel::zero();
  std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
  const auto fam512 = solve_modes(b, 4, TimeGrid(1.0, 512), Exec::serial);
  CHECK(verify_resolvent_identity(fam512, b, e1) < 1e-3);

  std::vector<double> zero(4, 0.0);
  CHECK(verify_resolvent_identity(fam512, b, zero) == 0.0);

  const MemoryKernel bc = MemoryKernel::constant(0.5);
  std::vector<double> x = {1.0, 0.25, 0.0, 0.0};
  const double r512 = verify_resolvent_identity(solve_modes(bc, 4, TimeGrid(1.0, 512), Exec::serial), bc, x);
  const double r1024 =
      verify_resolvent_identity(solve_modes(bc, 4, TimeGrid(1.0, 1024), Exec::serial), bc, x);
  const double ratio = r512 / r1024;
  CHECK(ratio > 4.0 * 0.7);
  CHECK(ratio < 4.0 * 1.3);
}

TEST_CASE("Lipschitz constant of the family") {
  const TimeGrid g(1.0, 512);
  const auto fam0 = solve_modes(MemoryKernel::zero(), 4, g, Exec::serial);
  CHECK(lipschitz_constant(fam0, MemoryKernel::zero()) == doctest::Approx(1.0));

  const MemoryKernel b = MemoryKernel::exp_decay(0.5, 1.0);
  const auto fam = solve_modes(b, 8, g, Exec::serial);
  const double M = fam.lipschitz_M;
  CHECK(M == doctest::Approx((1.0 + 0.5 + 0.5 * (1.0 - std::exp(-1.0))) * fam.sup_norm_D));

  // Lemma bound on random samples, Z graph norm
  const RngStream rng{42, 6};
  NormalStream ns(rng);
  std::uint64_t draw = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(8);
    for (std::size_t m = 0; m < 8; ++m)
      x[m] = ns.normal(draw++) / static_cast<double>((m + 1) * (m + 1));
    const auto i = 1 + static_cast<std::size_t>(uniform01(rng.derived(1), rep) * 511);
    auto j = 1 + static_cast<std::size_t>(uniform01(rng.derived(2), rep) * 511);
    if (j == i) j = i - 1;
    const auto yi = apply(fam, i, x);
    const auto yj = apply(fam, j, x);
    double d = 0.0;
    for (std::size_t m = 0; m < 8; ++m) d += (yi[m] - yj[m]) * (yi[m] - yj[m]);
    REQUIRE(std::sqrt(d) <=
            M * std::abs(g.node(i) - g.node(j)) * graph_norm(x) * (1.0 + 1e-9));
  }

  // doubling the horizon never shrinks M
  const auto fam2 = solve_modes(b, 8, TimeGrid(2.0, 1024), Exec::serial);
  CHECK(lipschitz_constant(fam2, b) >= M);
}

TEST_CASE("unstable kernels abort with the offending mode") {
  // b large and negative drives exponential blow-up past double range
  CHECK_THROWS_AS(solve_modes(MemoryKernel::constant(-1e8), 1, TimeGrid(1.0, 2048), Exec::serial),
                  std::runtime_error);
  CHECK_THROWS_AS(solve_modes(MemoryKernel::zero(), 0, TimeGrid(1.0, 8), Exec::serial),
                  std::invalid_argument);
}

TEST_CASE("dissipative preset stays inside the exponential bound") {
  const auto fam =
      solve_modes(MemoryKernel::exp_decay(0.5, 1.0), 16, TimeGrid(1.0, 512), Exec::serial);
  CHECK(fam.sup_norm_D <= 1.05);
}

TEST_CASE("strong continuity shrinks linearly with the step") {
  const MemoryKernel b = MemoryKernel::exp_decay(0.5, 1.0);
  std::vector<double> x = {1.0, 0.5, 0.25, 0.125};
  const auto hop = [&](const ResolventFamily& fam) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 <= fam.grid.n_steps(); ++j) {
      const auto a = apply(fam, j, x);
      const auto bb = apply(fam, j + 1, x);
      double d = 0.0;
      for (std::size_t m = 0; m < x.size(); ++m) d += (a[m] - bb[m]) * (a[m] - bb[m]);
      worst = std::max(worst, std::sqrt(d));
    }
    return worst;
  };
  const double h256 = hop(solve_modes(b, 4, TimeGrid(1.0, 256), Exec::serial));
  const double h512 = hop(solve_modes(b, 4, TimeGrid(1.0, 512), Exec::serial));
  CHECK(h512 < h256);
  CHECK(h256 / h512 == doctest::Approx(2.0).epsilon(0.2));
}
