#include "sgrecon/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgrecon {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t RngState::next_u64() {
  const std::uint64_t key = splitmix64_mix(seed ^ 0x6A09E667F3BCC908ULL);
  ++counter;
  return splitmix64_mix(key + counter * kGolden);
}

double RngState::next_uniform() { return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv; }

double RngState::next_open_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * kTwoPow53Inv;
}

std::uint64_t RngState::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double RngState::next_gaussian() {
  const double u1 = next_open_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void RngState::fill_gaussian(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    const double u1 = next_open_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(a);
    out[i + 1] = r * std::sin(a);
  }
  if (i < out.size()) out[i] = next_gaussian();
}

RngState RngState::substream(std::uint64_t index) const {
  return RngState(splitmix64_mix(seed + kGolden * (index + 1)) ^ splitmix64_mix(index), 0);
}

}  // namespace sgrecon
