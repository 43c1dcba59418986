// Command-line front end: fBm sampling experiments, kernel checks, resolvent
// tables, steering runs and the acceptance suite. Every run writes CSV outputs
// plus a manifest (config echo, wall clock, per-file checksums) into --out.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "fbmsteer/config.hpp"
#include "fbmsteer/control_solver.hpp"
#include "fbmsteer/csv.hpp"
#include "fbmsteer/fbm_kernel.hpp"
#include "fbmsteer/fbm_sampler.hpp"
#include "fbmsteer/manifest.hpp"
#include "fbmsteer/model_json.hpp"
#include "fbmsteer/verify.hpp"

namespace {

using namespace fbmsteer;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGate = 3;
constexpr int kExitNumerical = 4;

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  std::string dir = cfg.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("FBMSTEER_OUT")) dir = env;
    else dir = "out";
  }
  fs::create_directories(dir);
  return dir;
}

DelaySystemSpec resolve_spec(const ExperimentConfig& cfg) {
  DelaySystemSpec spec =
      cfg.spec_path.empty() ? heat_memory_example(HeatMemoryParams{}) : load_spec_file(cfg.spec_path);
  if (cfg.modes) spec.modes = *cfg.modes;
  if (cfg.hurst) spec.hurst = *cfg.hurst;
  return spec;
}

int run_sample_fbm(const ExperimentConfig& cfg) {
  const Clock clock;
  const fs::path dir = prepare_out_dir(cfg);
  const HurstParameter h(cfg.hurst.value_or(0.25));
  const TimeGrid grid(1.0, cfg.n_steps.value_or(32));
  const std::size_t paths = cfg.paths.value_or(1000);
  const std::size_t stride = grid.n_nodes();

  std::vector<std::string> node_names(stride);
  for (std::size_t i = 0; i < stride; ++i) node_names[i] = "t" + std::to_string(i);

  const auto write_batch = [&](const std::string& tag, std::span<const double> values) {
    io::CsvBuilder pathcsv(node_names);
    for (std::size_t p = 0; p < paths; ++p) pathcsv.row(values.subspan(p * stride, stride));
    io::write_file(dir / ("paths_" + tag + ".csv"), pathcsv.str());
    if (paths == 1) {  // single-path long format
      io::CsvBuilder single({"t", "value"});
      for (std::size_t i = 0; i < stride; ++i) {
        const double row[2] = {grid.node(i), values[i]};
        single.row(row);
      }
      io::write_file(dir / ("path_" + tag + ".csv"), single.str());
    }
    const auto est = empirical_covariance(values, paths, stride);
    io::CsvBuilder cov(node_names);
    io::CsvBuilder se(node_names);
    for (std::size_t i = 0; i < stride; ++i) {
      cov.row({est.cov.data() + i * stride, stride});
      se.row({est.se.data() + i * stride, stride});
    }
    io::write_file(dir / ("covariance_" + tag + ".csv"), cov.str());
    io::write_file(dir / ("covariance_se_" + tag + ".csv"), se.str());
  };

  std::vector<double> values(paths * stride);
  if (cfg.sampler == "volterra" || cfg.sampler == "both") {
    const VolterraWeights w(h, Lattice::graded(grid, 4, 48));
    sample_volterra_values(w, RngStream{cfg.seed, 1}, paths, values);
    write_batch("volterra", values);
  }
  if (cfg.sampler == "cholesky" || cfg.sampler == "both") {
    const CholeskyFactor f(h, grid);
    sample_cholesky_values(f, RngStream{cfg.seed, 2}, paths, values);
    write_batch("cholesky", values);
  }

  io::CsvBuilder theory(node_names);
  std::vector<double> row(stride);
  for (std::size_t i = 0; i < stride; ++i) {
    for (std::size_t j = 0; j < stride; ++j) row[j] = covariance(h, grid.node(i), grid.node(j));
    theory.row(row);
  }
  io::write_file(dir / "covariance_theory.csv", theory.str());
  io::write_manifest(dir, "sample-fbm", config_to_json(cfg), cfg.seed, clock.seconds());
  std::cout << "sample-fbm: " << paths << " paths on " << grid.n_steps()
            << " steps written to " << dir << "\n";
  return kExitOk;
}

int run_check_kernel(const ExperimentConfig& cfg) {
  const Clock clock;
  const fs::path dir = prepare_out_dir(cfg);
  const std::size_t samples = cfg.paths.value_or(1000);
  const RngStream rng{cfg.seed, 3};
  io::CsvBuilder csv({"h", "t", "s", "kernel", "growth_bound", "kernel_dt", "derivative_bound",
                      "within_bounds"});
  std::size_t violations = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double hv = cfg.hurst.value_or(0.02 + 0.44 * uniform01(rng.derived(1), i));
    const double t = 0.05 + 1.95 * uniform01(rng.derived(2), i);
    const double u = std::clamp(uniform01(rng.derived(3), i), 1e-6, 1.0 - 1e-6);
    const double s = t * u;
    const HurstParameter h(hv);
    const double ch = normalization_constant(h);
    const double K = kernel(h, t, s);
    const double b4 = 2.0 * ch * (std::pow(t - s, hv - 0.5) + std::pow(s, hv - 0.5));
    const double dK = kernel_dt(h, t, s);
    const double b5 = ch * (0.5 - hv) * std::pow(t - s, hv - 1.5);
    const bool ok = std::abs(K) <= b4 * (1.0 + 1e-9) && std::abs(dK) <= b5 * (1.0 + 1e-9);
    if (!ok) ++violations;
    const double row[8] = {hv, t, s, K, b4, dK, b5, ok ? 1.0 : 0.0};
    csv.row(row);
  }
  io::write_file(dir / "kernel.csv", csv.str());
  io::write_manifest(dir, "check-kernel", config_to_json(cfg), cfg.seed, clock.seconds());
  std::cout << "check-kernel: " << samples << " samples, " << violations << " bound violations\n";
  return violations == 0 ? kExitOk : kExitNumerical;
}

int run_resolvent(const ExperimentConfig& cfg) {
  const Clock clock;
  const fs::path dir = prepare_out_dir(cfg);
  const DelaySystemSpec spec = resolve_spec(cfg);
  const TimeGrid grid(spec.horizon, cfg.n_steps.value_or(512));
  const auto fam = solve_modes(spec.memory, spec.modes, grid);

  std::vector<std::string> names = {"t"};
  for (std::size_t m = 1; m <= spec.modes; ++m) names.push_back("r_" + std::to_string(m));
  io::CsvBuilder csv(names);
  std::vector<double> row(spec.modes + 1);
  for (std::size_t j = 0; j <= grid.n_steps(); ++j) {
    row[0] = grid.node(j);
    for (std::size_t m = 0; m < spec.modes; ++m) row[m + 1] = fam.r(m, j);
    csv.row(row);
  }
  io::write_file(dir / "resolvent.csv", csv.str());

  std::vector<double> x(spec.modes, 0.0);
  for (std::size_t m = 0; m < spec.modes; ++m)
    x[m] = 1.0 / static_cast<double>((m + 1) * (m + 1));
  io::CsvBuilder rep({"sup_norm_D", "lipschitz_M", "identity_residual"});
  const double row3[3] = {fam.sup_norm_D, fam.lipschitz_M,
                          verify_resolvent_identity(fam, spec.memory, x)};
  rep.row(row3);
  io::write_file(dir / "resolvent_report.csv", rep.str());
  io::write_manifest(dir, "resolvent", config_to_json(cfg), cfg.seed, clock.seconds());
  std::cout << "resolvent: " << spec.modes << " modes on " << grid.n_steps()
            << " steps, sup norm " << fam.sup_norm_D << "\n";
  return kExitOk;
}

int run_steer(const ExperimentConfig& cfg) {
  const Clock clock;
  const fs::path dir = prepare_out_dir(cfg);
  const DelaySystemSpec spec = resolve_spec(cfg);
  const TimeGrid grid(spec.horizon, cfg.n_steps.value_or(512));

  SteeringContext ctx(spec, grid, RngStream{cfg.seed, 7});
  if (!ctx.gate().passes && !cfg.force) {
    std::cerr << "steer: Theorem gate fails (condition value "
              << ctx.gate().condition_value
              << " >= 1/4); rerun with --force to proceed without the contraction guarantee\n";
    return kExitGate;
  }
  if (!ctx.gate().passes)
    std::cerr << "steer: WARNING: gate fails (condition value " << ctx.gate().condition_value
              << "); proceeding under --force without the Theorem guarantee\n";

  std::vector<double> x1(spec.modes, 0.0);
  if (cfg.target == "first-mode") x1[0] = 1.0;

  const SteeringResult res = solve_steering(ctx, x1, SteeringOptions{});

  std::vector<std::string> names = {"t"};
  for (std::size_t m = 1; m <= spec.modes; ++m) names.push_back("x_" + std::to_string(m));
  io::CsvBuilder traj(names);
  std::vector<double> row(spec.modes + 1);
  for (std::size_t j = 0; j <= res.trajectory.hist_steps(); ++j) {
    row[0] = res.trajectory.hist_time(j);
    const auto v = res.trajectory.hist_node(j);
    for (std::size_t m = 0; m < spec.modes; ++m) row[m + 1] = v[m];
    traj.row(row);
  }
  for (std::size_t i = 1; i <= grid.n_steps(); ++i) {
    row[0] = grid.node(i);
    const auto v = res.trajectory.fwd_node(i);
    for (std::size_t m = 0; m < spec.modes; ++m) row[m + 1] = v[m];
    traj.row(row);
  }
  io::write_file(dir / "trajectory.csv", traj.str());

  names[0] = "t";
  for (std::size_t m = 1; m <= spec.modes; ++m) names[m] = "u_" + std::to_string(m);
  io::CsvBuilder ctrl(names);
  for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
    row[0] = grid.node(i);
    for (std::size_t m = 0; m < spec.modes; ++m) row[m + 1] = res.control.at(i, m);
    ctrl.row(row);
  }
  io::write_file(dir / "control.csv", ctrl.str());

  io::CsvBuilder diag({"iteration", "error", "ratio"});
  for (std::size_t k = 0; k < res.picard_errors.size(); ++k) {
    const double ratio = k > 0 ? res.picard_errors[k] / res.picard_errors[k - 1] : 0.0;
    const double drow[3] = {static_cast<double>(k + 1), res.picard_errors[k], ratio};
    diag.row(drow);
  }
  io::write_file(dir / "diagnostics.csv", diag.str());

  // the Q-fBm realization that drove the run, in coordinates
  for (std::size_t m = 1; m <= spec.modes; ++m) names[m] = "mode_" + std::to_string(m);
  io::CsvBuilder noise(names);
  for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
    row[0] = grid.node(i);
    for (std::size_t m = 0; m < spec.modes; ++m) row[m + 1] = ctx.noise().coordinate(i, m);
    noise.row(row);
  }
  io::write_file(dir / "noise.csv", noise.str());
  io::write_manifest(dir, "steer", config_to_json(cfg), cfg.seed, clock.seconds());

  std::cout << "steer: terminal error " << res.terminal_error << " after " << res.iterations
            << " iterations (gate " << (ctx.gate().passes ? "passed" : "failed")
            << ", K=" << ctx.gate().K << "), control L2 norm " << res.control.l2_norm << "\n";
  return kExitOk;
}

int run_verify(const ExperimentConfig& cfg) {
  const Clock clock;
  const fs::path dir = prepare_out_dir(cfg);
  const VerifyReport report = run_acceptance(cfg.seed, Exec::parallel, &std::cout);
  report.print_table(std::cout);
  io::write_file(dir / "verify_report.csv", report.to_csv());
  io::write_manifest(dir, "verify", config_to_json(cfg), cfg.seed, clock.seconds());
  return report.all_pass() ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbmsteer: rough fBm simulation and exact steering of neutral stochastic "
               "integro-differential systems"};
  app.require_subcommand(0, 1);

  std::string config_path;
  ExperimentConfig overrides;
  bool seed_set = false, out_set = false, force_set = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out_dir;
  std::size_t n_steps = 0, modes = 0, paths = 0;
  double hurst = 0.0;
  std::string spec_path, target, sampler;

  app.add_option("--config", config_path, "experiment configuration JSON");
  app.add_option("--seed", seed, "RNG seed (default 42)")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out", out_dir, "output directory (or FBMSTEER_OUT)")
      ->each([&](const std::string&) { out_set = true; });
  auto* nopt = app.add_option("--n-steps", n_steps, "time steps on [0, T]");
  auto* mopt = app.add_option("--modes", modes, "spectral truncation");
  auto* popt = app.add_option("--paths", paths, "Monte-Carlo path / sample count");
  auto* hopt = app.add_option("--hurst", hurst, "Hurst parameter in (0, 1/2)");
  auto* sopt = app.add_option("--spec", spec_path, "system spec JSON path");
  auto* topt = app.add_option("--target", target, "steer target: first-mode | zero");
  auto* smopt = app.add_option("--sampler", sampler, "sample-fbm: volterra | cholesky | both");
  app.add_flag("--force", force_set, "run steer even when the Theorem gate fails");

  app.fallthrough();  // options placed after the subcommand match the main app
  for (const char* name : {"sample-fbm", "check-kernel", "resolvent", "steer", "verify"})
    app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    const auto subs = app.get_subcommands();
    if (!subs.empty()) cfg.scenario = subs.front()->get_name();
    if (cfg.scenario.empty())
      throw std::invalid_argument("no scenario: give a subcommand or a config with one");
    if (seed_set) cfg.seed = seed;
    if (out_set) cfg.out = out_dir;
    if (force_set) cfg.force = true;
    if (!nopt->empty()) cfg.n_steps = n_steps;
    if (!mopt->empty()) cfg.modes = modes;
    if (!popt->empty()) cfg.paths = paths;
    if (!hopt->empty()) cfg.hurst = hurst;
    if (!sopt->empty()) cfg.spec_path = spec_path;
    if (!topt->empty()) cfg.target = target;
    if (!smopt->empty()) cfg.sampler = sampler;
    // re-validate after overrides
    cfg = config_from_json(config_to_json(cfg));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (cfg.scenario == "sample-fbm") return run_sample_fbm(cfg);
    if (cfg.scenario == "check-kernel") return run_check_kernel(cfg);
    if (cfg.scenario == "resolvent") return run_resolvent(cfg);
    if (cfg.scenario == "steer") return run_steer(cfg);
    if (cfg.scenario == "verify") return run_verify(cfg);
    std::cerr << "config error: unknown scenario '" << cfg.scenario << "'\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
