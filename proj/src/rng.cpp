#include "fbmsteer/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmsteer {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3)-1

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

namespace philox {

std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t counter) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0u, 0u};
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

RngStream RngStream::derived(std::uint64_t sub) const {
  return RngStream{seed, splitmix64(stream * 0x9E3779B97F4A7C15ull + sub)};
}

NormalStream::NormalStream(RngStream id)
    : key_(splitmix64(id.seed ^ splitmix64(id.stream))) {}

namespace {

inline double to_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32) | b;
  // 53-bit mantissa, shifted off zero so log() below is safe
  return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

inline std::array<double, 2> box_muller(std::uint64_t key, std::uint64_t blk) {
  const auto w = philox::block(key, blk);
  const double u1 = to_unit(w[0], w[1]);
  const double u2 = to_unit(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace

double NormalStream::normal(std::uint64_t i) const {
  return box_muller(key_, i >> 1)[i & 1];
}

void NormalStream::fill(std::uint64_t first, std::span<double> out) const {
  std::uint64_t i = first;
  std::size_t k = 0;
  if ((i & 1) && k < out.size()) out[k++] = normal(i++);
  while (k + 2 <= out.size()) {
    const auto pair = box_muller(key_, i >> 1);
    out[k++] = pair[0];
    out[k++] = pair[1];
    i += 2;
  }
  if (k < out.size()) out[k] = normal(i);
}

double uniform01(RngStream id, std::uint64_t i) {
  const std::uint64_t key = splitmix64(id.seed ^ splitmix64(id.stream));
  const auto w = philox::block(key, i);
  return to_unit(w[0], w[1]);
}

}  // namespace fbmsteer
