#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbmsteer/grid.hpp"
#include "fbmsteer/parallel.hpp"

namespace fbmsteer {

/// Memory kernel b(t) of B(t) = b(t) A, from a closed-form family so that the
/// H.2 majorant c(t) = |b'(t)| and its integral are exact.
class MemoryKernel {
 public:
  enum class Kind { zero, constant, exp_decay };

  static MemoryKernel zero() { return MemoryKernel(Kind::zero, 0.0, 0.0); }
  static MemoryKernel constant(double b0) { return MemoryKernel(Kind::constant, b0, 0.0); }
  /// b(t) = amplitude * exp(-rate * t)
  static MemoryKernel exp_decay(double amplitude, double rate) {
    return MemoryKernel(Kind::exp_decay, amplitude, rate);
  }

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double rate() const { return rate_; }
  double operator()(double t) const;
  double derivative(double t) const;
  /// int_0^T |b'(s)| ds (the H.2 majorant integral), closed form.
  double derivative_l1(double T) const;

 private:
  MemoryKernel(Kind k, double a, double r) : kind_(k), amplitude_(a), rate_(r) {}
  Kind kind_;
  double amplitude_;
  double rate_;
};

/// Mode-wise samples r_n(t_j) of the resolvent for A with eigenvalues -n^2 and
/// B(t) = b(t) A: each mode solves
///   r' = -n^2 r - n^2 int_0^t b(t-s) r(s) ds,  r(0) = 1.
struct ResolventFamily {
  TimeGrid grid{1.0, 1};
  std::size_t modes = 0;
  std::vector<double> eigenvalues;  // a_n = n^2
  std::vector<double> values;       // mode-major: values[m*(n_steps+1) + j]
  double sup_norm_D = 0.0;          // max_j max_n |r_n(t_j)|
  double lipschitz_M = 0.0;         // Lemma-2.3 constant for the family's kernel

  double r(std::size_t mode, std::size_t node) const {
    return values[mode * grid.n_nodes() + node];
  }
  std::span<const double> mode(std::size_t m) const {
    return {values.data() + m * grid.n_nodes(), grid.n_nodes()};
  }
};

/// Marches every mode with trapezoidal product integration for the memory term
/// and an exact integrating factor e^{-n^2 t} for the stiff local term
/// (second order; exact when b = 0). Modes run independently in parallel.
ResolventFamily solve_modes(const MemoryKernel& kernel, std::size_t modes, TimeGrid grid,
                            Exec exec = Exec::parallel);

/// Diagonal action (r_n(t_index) x_n)_n.
std::vector<double> apply(const ResolventFamily& family, std::size_t t_index,
                          std::span<const double> x);

/// Max over interior nodes of || (r_n'(t) + n^2 r_n(t) + n^2 (b*r_n)(t)) x_n ||_2
/// with a central-difference derivative and trapezoidal convolution; decays at
/// O(dt^2) under refinement.
double verify_resolvent_identity(const ResolventFamily& family, const MemoryKernel& kernel,
                                 std::span<const double> x);

/// Lemma-2.3 constant M = (1 + T |b(0)| + T int_0^T |b'|) sup_t ||R(t)||.
double lipschitz_constant(const ResolventFamily& family, const MemoryKernel& kernel);

/// Graph norm sqrt(sum (1+n^2)^2 x_n^2) used by the Lipschitz audits.
double graph_norm(std::span<const double> x);

}  // namespace fbmsteer
