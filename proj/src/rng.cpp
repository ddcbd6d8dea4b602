#include "bb84/rng.hpp"

#include <stdexcept>

namespace bb84 {

std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::AliceBases: return "alice-bases";
    case Stream::AliceBits: return "alice-bits";
    case Stream::BobBases: return "bob-bases";
    case Stream::BobOutcomes: return "bob-outcomes";
    case Stream::EveDecisions: return "eve-decisions";
    case Stream::ChannelNoise: return "channel-noise";
    case Stream::TestSelection: return "test-selection";
    case Stream::Codeword: return "codeword";
    case Stream::Permutation: return "permutation";
    case Stream::NaiveSample: return "naive-sample";
    case Stream::Trial: return "trial";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(RngSeed master, Stream s, std::uint64_t index) {
  std::uint64_t h = splitmix64(master.value);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(s) * 0xd1b54a32d192ed03ULL));
  return splitmix64(h ^ splitmix64(index));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Largest multiple of bound representable; draws above it are rejected.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x > limit);
  return x % bound;
}

}  // namespace bb84
