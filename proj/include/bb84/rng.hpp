#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bb84 {

/// Master seed of a simulation run. Identical seed and inputs give
/// bit-identical output.
struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Named substreams derived from the master seed. Each party draws only from
/// its own streams, so the sequence a stream produces does not depend on the
/// order in which other streams are consumed.
enum class Stream : std::uint32_t {
  AliceBases = 1,
  AliceBits,
  BobBases,
  BobOutcomes,
  EveDecisions,
  ChannelNoise,
  TestSelection,
  Codeword,
  Permutation,
  NaiveSample,
  Trial,
};

std::string_view stream_name(Stream s);

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for substream `s` of `master`, optionally further split by `index`
/// (used for per-trial and per-block derivation).
std::uint64_t derive_seed(RngSeed master, Stream s, std::uint64_t index = 0);

/// Deterministic generator with platform-independent helpers. The standard
/// distributions are implementation-defined, so bounded integers and uniform
/// reals are produced here from raw 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(RngSeed master, Stream s, std::uint64_t index = 0)
      : engine_(derive_seed(master, s, index)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t bit() { return static_cast<std::uint8_t>(next() >> 63); }

  /// Uniform in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bb84
