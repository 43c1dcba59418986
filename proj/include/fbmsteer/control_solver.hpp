#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fbmsteer/system_model.hpp"

namespace fbmsteer {

/// W u = int_0^T R(T-s) L u(s) ds realized mode-wise; gramians are the
/// trapezoidal integrals gamma_n = int (ell_n r_n(T-s))^2 ds, with the same
/// rule apply_W uses, so the minimum-norm inverse round-trips exactly.
struct ControllabilityOperator {
  ResolventFamily family;
  std::vector<double> gains;
  std::vector<double> gramians;
  double m_w_measured = 0.0;  // max_n gamma_n^{-1/2}
};

ControllabilityOperator make_controllability_operator(ResolventFamily family,
                                                      std::vector<double> gains);

struct ControlSignal {
  TimeGrid grid;
  std::size_t modes = 0;
  std::vector<double> values;  // (n_steps+1) x modes, node-major
  double l2_norm = 0.0;

  double at(std::size_t node, std::size_t mode) const { return values[node * modes + mode]; }
};

/// Trapezoidal L^2([0,T]) norm of a node-major control table.
double control_l2_norm(const TimeGrid& grid, std::size_t modes, std::span<const double> values);

std::vector<double> apply_W(const ControllabilityOperator& op, const ControlSignal& u);

/// Minimum-norm preimage u_n(s) = ell_n r_n(T-s) z_n / gamma_n.
ControlSignal invert_W(const ControllabilityOperator& op, std::span<const double> z);

/// Everything a steering run precomputes once for a (spec, grid, noise draw):
/// resolvent family, controllability operator, discrete K* table, the sampled
/// Q-fBm, and the iterate-independent stochastic convolution
/// S_n(t_i) = [int_0^{t_i} R(t_i - s) sigma(s) dB^H(s)]_n.
class SteeringContext {
 public:
  SteeringContext(const DelaySystemSpec& spec, TimeGrid grid, RngStream rng,
                  Exec exec = Exec::parallel);
  SteeringContext(const DelaySystemSpec& spec, TimeGrid grid, QfbmPath noise,
                  Exec exec = Exec::parallel);

  const DelaySystemSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  const ResolventFamily& family() const { return op_.family; }
  const ControllabilityOperator& op() const { return op_; }
  const QfbmPath& noise() const { return noise_; }
  const TheoremGateReport& gate() const { return gate_; }
  double stochastic_term(std::size_t node, std::size_t mode) const {
    return stoch_[node * modes_ + mode];
  }

  /// History-pinned trajectory with forward part R(t) phi(0) (the initial
  /// Picard iterate).
  Trajectory initial_iterate() const;

  ControlSignal synthesize_control(const Trajectory& x_iter, std::span<const double> x1) const;
  Trajectory apply_psi(const Trajectory& x_iter, const ControlSignal& u) const;

 private:
  void build(Exec exec);

  DelaySystemSpec spec_;
  TimeGrid grid_;
  std::size_t modes_;
  ControllabilityOperator op_;
  QfbmPath noise_;
  DiagonalNoiseCoefficient sigma_;
  TheoremGateReport gate_;
  std::size_t hist_steps_ = 0;
  std::vector<double> phi0_;        // phi(0)
  std::vector<double> phi_capital_; // phi(0) + g(0, phi(-r(0)))
  std::vector<double> stoch_;       // (n+1) x modes
  // per-sweep scratch: f(s_j, x(s_j - rho(s_j))) values
  void eval_drift(const Trajectory& x, std::vector<double>& fvals) const;
  friend struct SteeringRunner;
};

struct SteeringResult {
  Trajectory trajectory;
  ControlSignal control;
  std::vector<double> picard_errors;  // sup-node coordinate-RMS change per sweep
  double measured_ratio = 0.0;        // geometric mean of successive ratios
  double terminal_error = 0.0;        // ||x(T) - x1|| / (1 + ||x1||)
  std::size_t iterations = 0;         // sweeps until the change dropped below tol
  bool converged = false;
  TheoremGateReport gate;
};

struct SteeringOptions {
  double tol = 1e-8;
  std::size_t max_iter = 25;
  Exec exec = Exec::parallel;
};

/// Samples one Q-fBm path, then iterates x <- psi(x, synthesize_control(x))
/// from the initial iterate until the sup-node RMS change drops below tol.
/// When the Theorem gate fails the run still proceeds (the caller decides
/// whether to refuse); result.gate records the report.
SteeringResult solve_steering(const DelaySystemSpec& spec, TimeGrid grid,
                              std::span<const double> x1, RngStream rng,
                              const SteeringOptions& options = {});
SteeringResult solve_steering(const SteeringContext& ctx, std::span<const double> x1,
                              const SteeringOptions& options = {});

/// Gate-passing demo: single-mode system whose nonlinearity gains are tuned so
/// the Theorem constant lands exactly on K = target_K for this grid.
DelaySystemSpec make_contraction_demo(TimeGrid grid, double target_K = 0.16);

}  // namespace fbmsteer
