#pragma once

#include <cstdint>
#include <span>

namespace sgrecon {

/// Counter-based 64-bit generator.
///
/// Draw number `c` of a stream keyed by `seed` is `mix(key(seed) + (c + 1) * G)`,
/// where `mix` is the SplitMix64 finalizer and G the 64-bit golden-ratio
/// increment. Only integer arithmetic is involved, so identical
/// (seed, counter) pairs yield bit-identical integer draws on every platform.
/// Gaussian variates use Box-Muller on consecutive uniform draws.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  RngState() = default;
  explicit RngState(std::uint64_t s, std::uint64_t c = 0) : seed(s), counter(c) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform();
  /// Uniform on (0, 1].
  double next_open_uniform();
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);
  double next_gaussian();
  /// Fills `out` with standard normals, using both Box-Muller outputs per pair.
  void fill_gaussian(std::span<double> out);

  /// Independent stream derived from this one's seed; does not advance `*this`.
  RngState substream(std::uint64_t index) const;

  bool operator==(const RngState&) const = default;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace sgrecon
