#include "fbmsteer/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fbmsteer/control_solver.hpp"
#include "fbmsteer/csv.hpp"
#include "fbmsteer/fbm_kernel.hpp"
#include "fbmsteer/fbm_sampler.hpp"
#include "fbmsteer/hilbert_noise.hpp"
#include "fbmsteer/resolvent.hpp"
#include "fbmsteer/system_model.hpp"

namespace fbmsteer {

namespace {

constexpr std::size_t kCovSteps = 32;
constexpr std::size_t kCovPaths = 20000;
constexpr std::size_t kLatticeSplit = 4;
constexpr std::size_t kLatticeLevels = 48;

std::string fmt(double v) { return io::format_double(v); }

struct CovRun {
  CovarianceEstimate volterra;
  CovarianceEstimate cholesky;
};

CovRun covariance_run(double hval, RngStream rng, Exec exec) {
  const HurstParameter h(hval);
  const TimeGrid grid(1.0, kCovSteps);
  const VolterraWeights weights(h, Lattice::graded(grid, kLatticeSplit, kLatticeLevels), exec);
  const std::size_t stride = grid.n_nodes();
  std::vector<double> values(kCovPaths * stride);
  sample_volterra_values(weights, rng.derived(1), kCovPaths, values, exec);
  CovRun run;
  run.volterra = empirical_covariance(values, kCovPaths, stride);
  const CholeskyFactor factor(h, grid);
  sample_cholesky_values(factor, rng.derived(2), kCovPaths, values, exec);
  run.cholesky = empirical_covariance(values, kCovPaths, stride);
  return run;
}

double max_z_against_theory(const CovarianceEstimate& est, double hval, const TimeGrid& grid) {
  const HurstParameter h(hval);
  double worst = 0.0;
  for (std::size_t i = 1; i < est.n_nodes; ++i)
    for (std::size_t j = 1; j <= i; ++j) {
      const double r = covariance(h, grid.node(i), grid.node(j));
      const double se = est.se_at(i, j);
      if (se > 0.0) worst = std::max(worst, std::abs(est.cov_at(i, j) - r) / se);
    }
  return worst;
}

double max_z_between(const CovarianceEstimate& a, const CovarianceEstimate& b) {
  double worst = 0.0;
  for (std::size_t i = 1; i < a.n_nodes; ++i)
    for (std::size_t j = 1; j <= i; ++j) {
      const double se =
          std::sqrt(a.se_at(i, j) * a.se_at(i, j) + b.se_at(i, j) * b.se_at(i, j));
      if (se > 0.0)
        worst = std::max(worst, std::abs(a.cov_at(i, j) - b.cov_at(i, j)) / se);
    }
  return worst;
}

DelaySystemSpec section4_preset() {
  HeatMemoryParams p;  // defaults are the N=16 heat-with-memory configuration
  return heat_memory_example(p);
}

/// Mode-wise uniform-lattice noise increments at the finest resolution,
/// aggregated onto coarser dyadic grids so all resolutions share one Brownian
/// path.
std::vector<std::vector<double>> draw_mode_increments(std::size_t modes, std::size_t n_fine,
                                                      double horizon, RngStream rng) {
  std::vector<std::vector<double>> inc(modes, std::vector<double>(n_fine));
  const double sq = std::sqrt(horizon / static_cast<double>(n_fine));
  for (std::size_t m = 0; m < modes; ++m) {
    NormalStream ns(rng.derived(m));
    ns.fill(0, inc[m]);
    for (auto& v : inc[m]) v *= sq;
  }
  return inc;
}

std::vector<double> aggregate(const std::vector<double>& fine, std::size_t factor) {
  std::vector<double> coarse(fine.size() / factor, 0.0);
  for (std::size_t j = 0; j < coarse.size(); ++j)
    for (std::size_t k = 0; k < factor; ++k) coarse[j] += fine[j * factor + k];
  return coarse;
}

std::string steer_canary(std::uint64_t seed, Exec exec) {
  const DelaySystemSpec spec = section4_preset();
  const TimeGrid grid(1.0, 256);
  std::vector<double> x1(spec.modes, 0.0);
  x1[0] = 1.0;
  const SteeringResult res =
      solve_steering(spec, grid, x1, RngStream{seed, 7}, SteeringOptions{1e-8, 25, exec});
  io::CsvBuilder traj({"t", "x"});
  for (std::size_t i = 0; i <= grid.n_steps(); ++i)
    for (std::size_t m = 0; m < spec.modes; ++m) {
      const double row[2] = {grid.node(i), res.trajectory.fwd_node(i)[m]};
      traj.row(row);
    }
  io::CsvBuilder ctrl({"t", "u"});
  for (std::size_t i = 0; i <= grid.n_steps(); ++i)
    for (std::size_t m = 0; m < spec.modes; ++m) {
      const double row[2] = {grid.node(i), res.control.at(i, m)};
      ctrl.row(row);
    }
  io::CsvBuilder diag({"iteration", "error"});
  for (std::size_t k = 0; k < res.picard_errors.size(); ++k) {
    const double row[2] = {static_cast<double>(k + 1), res.picard_errors[k]};
    diag.row(row);
  }
  return traj.str() + ctrl.str() + diag.str();
}

std::string covariance_canary(std::uint64_t seed, Exec exec) {
  const HurstParameter h(0.25);
  const TimeGrid grid(1.0, kCovSteps);
  const VolterraWeights weights(h, Lattice::graded(grid, kLatticeSplit, kLatticeLevels), exec);
  const std::size_t stride = grid.n_nodes();
  const std::size_t paths = 5000;
  std::vector<double> values(paths * stride);
  sample_volterra_values(weights, RngStream{seed, 11}, paths, values, exec);
  const auto est = empirical_covariance(values, paths, stride);
  io::CsvBuilder csv({"i", "j", "cov"});
  for (std::size_t i = 0; i < stride; ++i)
    for (std::size_t j = 0; j < stride; ++j) {
      const double row[3] = {static_cast<double>(i), static_cast<double>(j), est.cov_at(i, j)};
      csv.row(row);
    }
  return csv.str();
}

}  // namespace

bool VerifyReport::all_pass() const {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

std::string VerifyReport::to_csv() const {
  io::CsvBuilder csv({"criterion", "name", "pass", "measured", "detail"});
  for (const auto& r : results) {
    std::string measured;
    for (std::size_t i = 0; i < r.numbers.size(); ++i) {
      if (i) measured += ';';
      measured += fmt(r.numbers[i]);
    }
    const std::string cells[5] = {std::to_string(r.id), r.name, r.pass ? "1" : "0", measured,
                                  "\"" + r.detail + "\""};
    csv.raw_row(cells);
  }
  return csv.str();
}

void VerifyReport::print_table(std::ostream& os) const {
  for (const auto& r : results) {
    char line[512];
    std::snprintf(line, sizeof(line), "[%2d/11] %s  %s  (%s)", r.id,
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    os << line << "\n";
  }
  os << (all_pass() ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
     << "\n";
}

VerifyReport run_acceptance(std::uint64_t seed, Exec exec, std::ostream* log) {
  VerifyReport report;
  const RngStream root{seed, 0};
  const auto note = [&](const std::string& s) {
    if (log) (*log) << s << "\n";
  };

  // ---- criteria 1 & 2: covariance fidelity and sampler cross-validation
  note("[ 1/11] sampling fBm covariance batches (3 Hurst values, 2 samplers)...");
  {
    const double hs[3] = {0.1, 0.25, 0.4};
    const TimeGrid grid(1.0, kCovSteps);
    double worst_fidelity = 0.0, worst_cross = 0.0;
    std::string det1, det2;
    for (int k = 0; k < 3; ++k) {
      const CovRun run = covariance_run(hs[k], root.derived(100 + k), exec);
      const double zv = max_z_against_theory(run.volterra, hs[k], grid);
      const double zc = max_z_against_theory(run.cholesky, hs[k], grid);
      const double zx = max_z_between(run.volterra, run.cholesky);
      worst_fidelity = std::max({worst_fidelity, zv, zc});
      worst_cross = std::max(worst_cross, zx);
      det1 += "h=" + fmt(hs[k]) + ": z_volterra=" + fmt(zv) + " z_cholesky=" + fmt(zc) + "  ";
      det2 += "h=" + fmt(hs[k]) + ": z=" + fmt(zx) + "  ";
    }
    report.results.push_back({1, "fBm covariance fidelity (entrywise 3 SE)",
                              worst_fidelity <= 3.0, det1, {worst_fidelity}});
    report.results.push_back(
        {2, "sampler cross-validation (3 combined SE)", worst_cross <= 3.0, det2, {worst_cross}});
  }

  // ---- criterion 3: kernel bound properties
  note("[ 3/11] kernel bound properties on random triples...");
  {
    std::size_t violations4 = 0, violations5 = 0;
    const RngStream s3 = root.derived(3);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double hv = 0.02 + 0.44 * uniform01(s3.derived(1), i);
      const double t = 0.05 + 1.95 * uniform01(s3.derived(2), i);
      const double u = std::clamp(uniform01(s3.derived(3), i), 1e-6, 1.0 - 1e-6);
      const double s = t * u;
      const HurstParameter h(hv);
      const double ch = normalization_constant(h);
      const double bound4 =
          2.0 * ch * (std::pow(t - s, hv - 0.5) + std::pow(s, hv - 0.5));
      if (std::abs(kernel(h, t, s)) > bound4 * (1.0 + 1e-9)) ++violations4;
      const double bound5 = ch * (0.5 - hv) * std::pow(t - s, hv - 1.5);
      if (std::abs(kernel_dt(h, t, s)) > bound5 * (1.0 + 1e-9)) ++violations5;
    }
    report.results.push_back({3, "kernel bounds (1000 random triples each)",
                              violations4 == 0 && violations5 == 0,
                              "violations: growth-bound=" + std::to_string(violations4) +
                                  " derivative-bound=" + std::to_string(violations5),
                              {static_cast<double>(violations4), static_cast<double>(violations5)}});
  }

  // ---- criterion 4: isometry
  note("[ 4/11] isometry: Monte-Carlo variance and bilinear form...");
  {
    const HurstParameter h(0.25);
    const TimeGrid grid(1.0, 64);
    const VolterraWeights weights(h, Lattice::graded(grid, kLatticeSplit, kLatticeLevels), exec);
    const StepFunction one{{{1.0, 1.0}}};
    const auto w = kstar_cell_weights(h, weights.lattice(), weights.lattice().n_cells(), one);
    const std::size_t paths = 20000;
    std::vector<double> integrals(paths);
    for_each_index(exec, paths, [&](std::size_t p) {
      const auto path = sample_fbm_volterra(weights, root.derived(4).derived(p));
      double s = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * path.increments[j];
      integrals[p] = s;
    });
    double mean = 0.0;
    for (double v : integrals) mean += v;
    mean /= static_cast<double>(paths);
    double var = 0.0;
    for (double v : integrals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(paths - 1);
    const double se = var * std::sqrt(2.0 / static_cast<double>(paths - 1));
    const double z_var = std::abs(var - 1.0) / se;  // T^{2H} = 1

    // step-function bilinear identity at n = 512
    const StepFunction two{{{0.5, 1.0}, {1.0, 0.7}}};
    const StepFunction three{{{0.25, 0.8}, {0.625, -0.4}, {1.0, 1.1}}};
    double worst_rel = 0.0;
    for (const auto* phi : {&one, &two, &three}) {
      const double nrm = isometry_norm(h, 1.0, *phi, 512);
      double bil = 0.0;
      for (const auto& a : phi->components)
        for (const auto& b : phi->components)
          bil += a.weight * b.weight * covariance(h, a.upto, b.upto);
      worst_rel = std::max(worst_rel, std::abs(nrm * nrm - bil) / bil);
    }
    report.results.push_back({4, "isometry (variance 3 SE; bilinear form 1%)",
                              z_var <= 3.0 && worst_rel <= 0.01,
                              "var z=" + fmt(z_var) + " bilinear rel=" + fmt(worst_rel),
                              {z_var, worst_rel}});
  }

  // ---- criterion 5: resolvent oracles
  note("[ 5/11] resolvent oracles...");
  {
    const TimeGrid grid(1.0, 1024);
    const auto fam0 = solve_modes(MemoryKernel::zero(), 8, grid, exec);
    double err0 = 0.0;
    for (std::size_t m = 0; m < 8; ++m)
      for (std::size_t j = 0; j <= grid.n_steps(); ++j)
        err0 = std::max(err0,
                        std::abs(fam0.r(m, j) - std::exp(-fam0.eigenvalues[m] * grid.node(j))));

    const auto famc = solve_modes(MemoryKernel::constant(0.5), 8, grid, exec);
    double errc = 0.0;
    for (std::size_t m = 0; m < 8; ++m) {
      const double a = famc.eigenvalues[m];
      const double disc = a * a - 4.0 * a * 0.5;
      for (std::size_t j = 0; j <= grid.n_steps(); ++j) {
        const double t = grid.node(j);
        double exact;
        if (disc >= 0.0) {
          const double mu = std::sqrt(disc);
          const double m1 = 0.5 * (-a + mu), m2 = 0.5 * (-a - mu);
          const double A = (-a - m2) / (m1 - m2);
          exact = A * std::exp(m1 * t) + (1.0 - A) * std::exp(m2 * t);
        } else {
          const double om = 0.5 * std::sqrt(-disc);
          // r = e^{-at/2}(cos(om t) + B sin(om t)), r'(0) = -a => B = -a/(2 om)
          exact = std::exp(-0.5 * a * t) *
                  (std::cos(om * t) + (-a + 0.5 * a) / om * std::sin(om * t));
        }
        errc = std::max(errc, std::abs(famc.r(m, j) - exact));
      }
    }

    std::vector<double> x(4, 0.0);
    x[0] = 1.0;
    x[1] = 0.25;
    const auto fam512 = solve_modes(MemoryKernel::constant(0.5), 4, TimeGrid(1.0, 512), exec);
    const auto fam1024 = solve_modes(MemoryKernel::constant(0.5), 4, TimeGrid(1.0, 1024), exec);
    const double r512 = verify_resolvent_identity(fam512, MemoryKernel::constant(0.5), x);
    const double r1024 = verify_resolvent_identity(fam1024, MemoryKernel::constant(0.5), x);
    const double order = std::log2(r512 / r1024);

    const bool pass = err0 < 1e-4 && errc < 1e-4 && order > 1.7 && order < 2.3;
    report.results.push_back({5, "resolvent oracles (1e-4; residual order 2±0.3)", pass,
                              "b=0 err=" + fmt(err0) + " b=0.5 err=" + fmt(errc) +
                                  " residual order=" + fmt(order),
                              {err0, errc, order}});
  }

  // ---- criterion 6: Lemma 2.3 Lipschitz bound
  note("[ 6/11] resolvent Lipschitz bound...");
  {
    const DelaySystemSpec spec = section4_preset();
    const TimeGrid grid(1.0, 512);
    const auto fam = solve_modes(spec.memory, spec.modes, grid, exec);
    const double M = lipschitz_constant(fam, spec.memory);
    NormalStream ns(root.derived(6));
    double worst = 0.0;
    std::uint64_t draw = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(spec.modes);
      for (auto& v : x) {
        const double n2 = 1.0;
        v = ns.normal(draw++) * n2;
      }
      for (std::size_t m = 0; m < spec.modes; ++m)
        x[m] /= static_cast<double>((m + 1) * (m + 1));  // keep graph norm moderate
      const std::size_t i =
          1 + static_cast<std::size_t>(uniform01(root.derived(61), trial) * (grid.n_steps() - 1));
      std::size_t j =
          1 + static_cast<std::size_t>(uniform01(root.derived(62), trial) * (grid.n_steps() - 1));
      if (j == i) j = (i > 1) ? i - 1 : i + 1;
      const auto xi = apply(fam, i, x);
      const auto xj = apply(fam, j, x);
      double d2 = 0.0;
      for (std::size_t m = 0; m < spec.modes; ++m) {
        const double d = xi[m] - xj[m];
        d2 += d * d;
      }
      const double quotient = std::sqrt(d2) / (std::abs(grid.node(i) - grid.node(j)) * graph_norm(x));
      worst = std::max(worst, quotient);
    }
    report.results.push_back({6, "Lemma-2.3 Lipschitz bound (100 random samples)", worst <= M,
                              "max quotient=" + fmt(worst) + " M=" + fmt(M), {worst, M}});
  }

  // ---- criterion 7: Theorem gate arithmetic
  note("[ 7/11] Theorem gate arithmetic...");
  {
    const auto rep = contraction_constant(0.1, 0.1, 1.0, 1.0, 1.0, 1.0);
    const bool arithmetic_ok =
        std::abs(rep.condition_value - 0.04) < 1e-12 && std::abs(rep.K - 0.16) < 1e-12 && rep.passes;
    const auto at_boundary = contraction_constant(0.0, 0.5, 1.0, 0.0, 0.0, 1.0);
    const auto below = contraction_constant(0.0, 0.5 - 1e-9, 1.0, 0.0, 0.0, 1.0);
    const bool gate_ok = !at_boundary.passes && below.passes &&
                         std::abs(at_boundary.condition_value - 0.25) < 1e-15;
    report.results.push_back({7, "Theorem gate arithmetic", arithmetic_ok && gate_ok,
                              "condition_value=" + fmt(rep.condition_value) + " K=" + fmt(rep.K),
                              {rep.condition_value, rep.K}});
  }

  // ---- criterion 8: contraction in practice
  note("[ 8/11] Picard contraction on gate-passing preset...");
  {
    const TimeGrid grid(1.0, 256);
    const DelaySystemSpec demo = make_contraction_demo(grid, 0.16);
    std::vector<double> x1(demo.modes, 0.0);
    x1[0] = 0.3;
    const SteeringResult res =
        solve_steering(demo, grid, x1, root.derived(8), SteeringOptions{1e-8, 25, exec});
    const bool pass = res.gate.passes && std::abs(res.gate.K - 0.16) < 1e-9 && res.converged &&
                      res.iterations <= 12 && res.measured_ratio <= 0.45;
    report.results.push_back(
        {8, "Picard contraction (K=0.16: ratio<=0.45, <=12 iterations)", pass,
         "K=" + fmt(res.gate.K) + " ratio=" + fmt(res.measured_ratio) +
             " iterations=" + std::to_string(res.iterations),
         {res.gate.K, res.measured_ratio, static_cast<double>(res.iterations)}});
  }

  // ---- criterion 9: end-to-end steering with refinement monotonicity
  note("[ 9/11] end-to-end steering at n = 128, 256, 512 (coupled noise)...");
  {
    const DelaySystemSpec spec = section4_preset();
    const HurstParameter h(spec.hurst);
    const auto lambdas = spec.covariance_spec();
    const auto fine = draw_mode_increments(spec.modes, 512, 1.0, root.derived(9));
    double errs[3] = {0.0, 0.0, 0.0};
    const std::size_t steps[3] = {128, 256, 512};
    for (int k = 0; k < 3; ++k) {
      const TimeGrid grid(1.0, steps[k]);
      const VolterraWeights w(h, Lattice::uniform(grid), exec);
      QfbmPath noise{grid, lambdas.eigenvalues(), {}};
      for (std::size_t m = 0; m < spec.modes; ++m)
        noise.mode_paths.push_back(sample_fbm_volterra_from_increments(
            w, aggregate(fine[m], 512 / steps[k]), root.derived(9).derived(m)));
      SteeringContext ctx(spec, grid, std::move(noise), exec);
      std::vector<double> x1(spec.modes, 0.0);
      x1[0] = 1.0;
      const SteeringResult res = solve_steering(ctx, x1, SteeringOptions{1e-8, 25, exec});
      errs[k] = res.terminal_error;
    }
    const double floor = 1e-10;
    const bool monotone = (errs[0] >= errs[1] - floor) && (errs[1] >= errs[2] - floor);
    const bool pass = errs[2] < 0.02 && monotone;
    report.results.push_back(
        {9, "end-to-end steering (terminal < 2%, monotone under refinement)", pass,
         "terminal errors: n128=" + fmt(errs[0]) + " n256=" + fmt(errs[1]) +
             " n512=" + fmt(errs[2]),
         {errs[0], errs[1], errs[2]}});
  }

  // ---- criterion 10: W round-trip
  note("[10/11] controllability operator round-trip...");
  {
    const DelaySystemSpec spec = section4_preset();
    const TimeGrid grid(1.0, 512);
    const auto op = make_controllability_operator(solve_modes(spec.memory, spec.modes, grid, exec),
                                                  spec.control_gains());
    NormalStream ns(root.derived(10));
    double worst = 0.0;
    std::uint64_t draw = 0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> z(spec.modes);
      for (auto& v : z) v = ns.normal(draw++);
      const auto back = apply_W(op, invert_W(op, z));
      double num = 0.0, den = 0.0;
      for (std::size_t m = 0; m < spec.modes; ++m) {
        const double d = back[m] - z[m];
        num += d * d;
        den += z[m] * z[m];
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
    report.results.push_back({10, "W round-trip (20 random targets, 1e-3)", worst < 1e-3,
                              "max relative error=" + fmt(worst), {worst}});
  }

  // ---- criterion 11: reproducibility
  note("[11/11] byte-identical reproducibility...");
  {
    const std::string a = steer_canary(seed, exec) + covariance_canary(seed, exec);
    const std::string b = steer_canary(seed, exec) + covariance_canary(seed, exec);
    const bool pass = a == b;
    report.results.push_back({11, "reproducibility (byte-identical reruns)", pass,
                              "compared " + std::to_string(a.size()) + " bytes",
                              {static_cast<double>(a.size())}});
  }

  return report;
}

}  // namespace fbmsteer
