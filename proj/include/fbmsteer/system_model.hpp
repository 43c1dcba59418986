#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbmsteer/hilbert_noise.hpp"
#include "fbmsteer/resolvent.hpp"

namespace fbmsteer {

/// Pointwise nonlinearity xi -> shape(t, xi), applied coordinate-wise in the
/// eigenbasis; composition preserves the l^2 Lipschitz constant.
struct PointwiseShape {
  enum class Kind { zero, sine };
  Kind kind = Kind::zero;
  double gain = 0.0;

  double operator()(double /*t*/, double xi) const {
    return kind == Kind::sine ? gain * std::sin(xi) : 0.0;
  }
};

/// Continuous delay [0,T] -> [0, tau] from a closed-form family so the range
/// check is exact.
struct DelayFunction {
  enum class Kind { constant, sinusoidal };
  Kind kind = Kind::constant;
  double base = 0.0;       // constant value, or sinusoid offset
  double amplitude = 0.0;  // sinusoid amplitude (0 for constant)
  double frequency = 1.0;  // cycles per unit time

  double operator()(double t) const;
  double min_value() const { return base - std::abs(amplitude); }
  double max_value() const { return base + std::abs(amplitude); }
};

struct SigmaSpec {
  double level = 0.0;       // s_n(t) = level n^{-mode_decay} (1 + modulation sin(2 pi t / T))
  double mode_decay = 2.0;
  double modulation = 0.0;
  double holder_gamma = 1.0;
};

struct HistorySpec {
  double level = 0.5;  // phi_n(t) = level n^{-mode_decay} cos(pi t / (2 tau)) on [-tau, 0]
  double mode_decay = 2.0;
  bool random = false;  // scale amplitudes by seeded standard normals
  std::uint64_t random_stream = 9001;
};

struct CovarianceTag {
  enum class Kind { power, list };
  Kind kind = Kind::power;
  double level = 1.0;     // lambda_n = level n^{-exponent}
  double exponent = 2.0;
  std::vector<double> values;  // list form
};

struct ControlGains {
  enum class Kind { uniform, list };
  Kind kind = Kind::uniform;
  double value = 1.0;
  std::vector<double> values;
};

struct DeclaredConstants {
  double c1 = 0.0;   // f Lipschitz
  double c2 = 0.0;   // f growth
  double c3 = 0.0;   // g Lipschitz
  double c4 = 0.0;   // g growth
  double c5 = 0.0;   // sigma Hoelder (L_2^0)
  double m_l = 1.0;  // ||L|| bound
};

/// Full problem description of the neutral delay system; closed-form tags are
/// materialized onto grids on demand.
struct DelaySystemSpec {
  std::size_t modes = 1;
  double horizon = 1.0;
  double max_delay = 0.0;
  double hurst = 0.25;
  DelayFunction delay_r;    // neutral-term delay (g)
  DelayFunction delay_rho;  // drift delay (f)
  PointwiseShape f_shape;
  PointwiseShape g_shape;
  SigmaSpec sigma;
  HistorySpec history;
  CovarianceTag covariance;
  ControlGains gains;
  MemoryKernel memory = MemoryKernel::zero();
  DeclaredConstants declared;

  void f(double t, std::span<const double> x, std::span<double> out) const;
  void g(double t, std::span<const double> x, std::span<double> out) const;
  std::vector<double> control_gains() const;
  CovarianceSpec covariance_spec() const;
  DiagonalNoiseCoefficient sigma_on(TimeGrid grid) const;
  /// phi_n at history node time t in [-tau, 0].
  double history_value(double t, std::size_t mode) const;
};

/// Theorem gate: condition_value = C3^2 + D^2 C1^2 T^2 + D^2 M_L^2 M_W^2 C3^2 T
/// + D^4 M_L^2 M_W^2 C1^2 T^3; K = 4 condition_value; passes iff < 1/4.
struct TheoremGateReport {
  double D = 0.0;
  double M_L = 0.0;
  double M_W = 0.0;
  double T = 0.0;
  double condition_value = 0.0;
  double K = 0.0;
  bool passes = false;
};

TheoremGateReport contraction_constant(double C1, double C3, double D, double M_L, double M_W,
                                       double T);

/// Trajectory over [-tau, T]: a history block on its own uniform grid plus the
/// forward block on the main grid; both vector-valued with `modes` coordinates.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, double tau, std::size_t hist_steps, std::size_t modes);

  const TimeGrid& grid() const { return grid_; }
  double tau() const { return tau_; }
  std::size_t hist_steps() const { return hist_steps_; }
  std::size_t modes() const { return modes_; }
  double hist_time(std::size_t j) const {
    return -tau_ + static_cast<double>(j) * tau_ / static_cast<double>(hist_steps_);
  }
  std::span<double> fwd_node(std::size_t i) { return {fwd_.data() + i * modes_, modes_}; }
  std::span<const double> fwd_node(std::size_t i) const { return {fwd_.data() + i * modes_, modes_}; }
  std::span<double> hist_node(std::size_t j) { return {hist_.data() + j * modes_, modes_}; }
  std::span<const double> hist_node(std::size_t j) const {
    return {hist_.data() + j * modes_, modes_};
  }
  std::vector<double>& fwd() { return fwd_; }
  const std::vector<double>& fwd() const { return fwd_; }
  std::vector<double>& hist() { return hist_; }
  const std::vector<double>& hist() const { return hist_; }

  /// Linear interpolation at t in [-tau, T]; throws below -tau.
  void value_at(double t, std::span<double> out) const;

 private:
  TimeGrid grid_;
  double tau_;
  std::size_t hist_steps_;
  std::size_t modes_;
  std::vector<double> fwd_;
  std::vector<double> hist_;
};

/// x(t - delay(t)) with history lookup for negative times.
std::vector<double> delayed_lookup(const Trajectory& x, double t, const DelayFunction& delay);

/// Random-pair audit of the declared constants plus the hypothesis checks.
struct SpecAuditReport {
  bool ok = false;
  std::vector<std::string> failures;
  double measured_f_lipschitz = 0.0;
  double measured_g_lipschitz = 0.0;
  double measured_f_growth = 0.0;
  double measured_g_growth = 0.0;
  NoiseValidationReport noise;
};

SpecAuditReport audit_spec(const DelaySystemSpec& spec, RngStream rng, std::size_t pairs = 1000);

/// Spectral-truncation preset of the heat equation with memory kernel b(t),
/// Dirichlet sine eigenbasis, constant delays tau1 (g) and tau2 (f).
struct HeatMemoryParams {
  std::size_t modes = 16;
  double horizon = 1.0;
  double hurst = 0.25;
  double tau1 = 0.2;
  double tau2 = 0.2;
  double f_gain = 0.05;
  double g_gain = 0.05;
  double b_amplitude = 0.5;
  double b_rate = 1.0;
  double noise_level = 0.05;
  double noise_modulation = 0.5;
  bool random_history = false;
};

DelaySystemSpec heat_memory_example(const HeatMemoryParams& params);

}  // namespace fbmsteer
