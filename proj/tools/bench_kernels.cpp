// Times the OpenMP kernels against their serial reference implementations and
// checks that both produce bit-identical output.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fbmsteer/control_solver.hpp"
#include "fbmsteer/fbm_kernel.hpp"
#include "fbmsteer/fbm_sampler.hpp"
#include "fbmsteer/resolvent.hpp"
#include "fbmsteer/system_model.hpp"

namespace {

using namespace fbmsteer;

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Row {
  std::string name;
  double serial = 0.0;
  double parallel = 0.0;
  bool identical = false;
};

void print(const std::vector<Row>& rows) {
  std::printf("%-34s %12s %12s %9s %10s\n", "kernel", "serial [s]", "openmp [s]", "speedup",
              "bitwise");
  for (const auto& r : rows)
    std::printf("%-34s %12.3f %12.3f %8.2fx %10s\n", r.name.c_str(), r.serial, r.parallel,
                r.serial / r.parallel, r.identical ? "equal" : "DIFFERS");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());
  std::vector<Row> rows;
  const HurstParameter h(0.25);

  {
    Row r{"kstar table build (n=512)", 0, 0, false};
    const TimeGrid grid(1.0, 512);
    std::vector<double> a, b;
    r.serial = seconds([&] {
      const KstarTable t(h, grid, Exec::serial);
      a.resize(512);
      t.weights(512, std::vector<double>(513, 1.0), a);
    });
    r.parallel = seconds([&] {
      const KstarTable t(h, grid, Exec::parallel);
      b.resize(512);
      t.weights(512, std::vector<double>(513, 1.0), b);
    });
    r.identical = a == b;
    rows.push_back(r);
  }

  {
    Row r{"volterra batch (n=32 graded, 4096)", 0, 0, false};
    const TimeGrid grid(1.0, 32);
    const VolterraWeights w(h, Lattice::graded(grid, 4, 48), Exec::parallel);
    const std::size_t paths = 4096;
    std::vector<double> a(paths * grid.n_nodes()), b(paths * grid.n_nodes());
    r.serial = seconds([&] { sample_volterra_values(w, RngStream{1, 1}, paths, a, Exec::serial); });
    r.parallel =
        seconds([&] { sample_volterra_values(w, RngStream{1, 1}, paths, b, Exec::parallel); });
    r.identical = a == b;
    rows.push_back(r);
  }

  {
    Row r{"volterra weights (n=32 graded)", 0, 0, false};
    const TimeGrid grid(1.0, 32);
    const Lattice lat = Lattice::graded(grid, 4, 48);
    std::vector<double> a, b;
    r.serial = seconds([&] {
      const auto row = VolterraWeights(h, lat, Exec::serial).row(32);
      a.assign(row.begin(), row.end());
    });
    r.parallel = seconds([&] {
      const auto row = VolterraWeights(h, lat, Exec::parallel).row(32);
      b.assign(row.begin(), row.end());
    });
    r.identical = a == b;
    rows.push_back(r);
  }

  {
    Row r{"resolvent modes (N=64, n=2048)", 0, 0, false};
    const TimeGrid grid(1.0, 2048);
    const MemoryKernel b_kernel = MemoryKernel::exp_decay(0.5, 1.0);
    ResolventFamily fa, fb;
    r.serial = seconds([&] { fa = solve_modes(b_kernel, 64, grid, Exec::serial); });
    r.parallel = seconds([&] { fb = solve_modes(b_kernel, 64, grid, Exec::parallel); });
    r.identical = fa.values == fb.values;
    rows.push_back(r);
  }

  {
    Row r{"steering context (N=16, n=512)", 0, 0, false};
    const DelaySystemSpec spec = heat_memory_example(HeatMemoryParams{});
    const TimeGrid grid(1.0, 512);
    std::vector<double> a, b;
    r.serial = seconds([&] {
      const SteeringContext ctx(spec, grid, RngStream{3, 3}, Exec::serial);
      a.resize(spec.modes);
      for (std::size_t m = 0; m < spec.modes; ++m) a[m] = ctx.stochastic_term(512, m);
    });
    r.parallel = seconds([&] {
      const SteeringContext ctx(spec, grid, RngStream{3, 3}, Exec::parallel);
      b.resize(spec.modes);
      for (std::size_t m = 0; m < spec.modes; ++m) b[m] = ctx.stochastic_term(512, m);
    });
    r.identical = a == b;
    rows.push_back(r);
  }

  print(rows);
  for (const auto& r : rows)
    if (!r.identical) return 1;
  return 0;
}
