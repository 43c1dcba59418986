#include <doctest.h>

#include <cmath>
#include <set>

#include "fbmsteer/grid.hpp"
#include "fbmsteer/rng.hpp"

using namespace fbmsteer;

TEST_CASE("TimeGrid nodes are exact and monotone") {
  const TimeGrid g(2.5, 7);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(7) == 2.5);
  CHECK(g.step() * static_cast<double>(g.n_steps()) == doctest::Approx(2.5).epsilon(1e-15));
  for (std::size_t j = 0; j < 7; ++j) CHECK(g.node(j) < g.node(j + 1));
  CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("SampledFunction interpolates linearly") {
  const TimeGrid g(1.0, 4);
  SampledFunction f(g, {0.0, 1.0, 0.0, 2.0, 2.0});
  CHECK(f(0.125) == doctest::Approx(0.5));
  CHECK(f(0.25) == doctest::Approx(1.0));
  CHECK(f(1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(SampledFunction(g, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("lattices refine the grid and keep nodes as edges") {
  const TimeGrid g(1.0, 8);
  for (const auto& lat : {Lattice::uniform(g, 3), Lattice::graded(g, 4, 40)}) {
    CHECK(lat.edge(0) == 0.0);
    CHECK(lat.edge(lat.n_cells()) == 1.0);
    for (std::size_t k = 0; k < lat.n_cells(); ++k) CHECK(lat.width(k) > 0.0);
    for (std::size_t j = 0; j <= 8; ++j)
      CHECK(lat.edge(lat.node_edge(j)) == doctest::Approx(g.node(j)).epsilon(1e-15));
  }
  CHECK(Lattice::uniform(g, 3).n_cells() == 24);
}

TEST_CASE("philox stream is deterministic and splits") {
  const RngStream a{1234, 5};
  const NormalStream na(a);
  CHECK(na.normal(7) == NormalStream(RngStream{1234, 5}).normal(7));
  CHECK(na.normal(7) != NormalStream(RngStream{1234, 6}).normal(7));
  CHECK(na.normal(7) != NormalStream(a.derived(0)).normal(7));
  CHECK(a.derived(3).stream == a.derived(3).stream);
  CHECK(a.derived(3).stream != a.derived(4).stream);

  std::vector<double> buf(9);
  na.fill(3, buf);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i] == na.normal(3 + i));
}

TEST_CASE("normal stream moments") {
  const NormalStream ns(RngStream{77, 1});
  const std::size_t n = 200000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ns.normal(i);
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  m1 /= n; m2 /= n; m3 /= n; m4 /= n;
  CHECK(std::abs(m1) < 0.01);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(m3) < 0.03);
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
}
