#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fbmsteer {

/// Counter-based generator: Philox4x32-10 (Salmon et al., SC'11).
/// A draw is a pure function of (seed, stream, counter), so work can be
/// distributed across threads or re-ordered without changing any result.
namespace philox {

std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t counter);

}  // namespace philox

/// Identifies one logical random stream. Equal (seed, stream) always
/// reproduces the same sequence; distinct streams are independent.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngStream derived(std::uint64_t sub) const;
};

/// Standard normal deviates from a counter-based stream (Box-Muller on
/// Philox output). Stateless apart from the draw index.
class NormalStream {
 public:
  explicit NormalStream(RngStream id);

  /// i-th normal of the stream, independent of access order.
  double normal(std::uint64_t i) const;

  /// Fills out with normals [first, first + out.size()).
  void fill(std::uint64_t first, std::span<double> out) const;

 private:
  std::uint64_t key_;
};

/// Uniform deviate in (0,1) at draw index i (used by property tests).
double uniform01(RngStream id, std::uint64_t i);

}  // namespace fbmsteer
