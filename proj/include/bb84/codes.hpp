#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bb84/bits.hpp"
#include "bb84/gf2.hpp"
#include "bb84/rng.hpp"

namespace bb84 {

class CodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NestingViolation : public CodeError {
 public:
  using CodeError::CodeError;
};
class DistanceTooSmall : public CodeError {
 public:
  using CodeError::CodeError;
};
class DegenerateCode : public CodeError {
 public:
  using CodeError::CodeError;
};
class NotACodeword : public CodeError {
 public:
  using CodeError::CodeError;
};

/// Largest block length for which distances are verified exhaustively and a
/// syndrome table is built.
inline constexpr std::size_t kExhaustiveLimit = 24;

struct DecodeResult {
  BitString codeword;
  std::size_t corrected_weight = 0;
  /// The correction exceeded the guaranteed radius t (coset-leader decoding).
  bool beyond_radius = false;
};

/// Returns the decoded codeword or nullopt for a decoding failure.
using DecoderHook = std::function<std::optional<BitString>(std::span<const std::uint8_t>)>;

class SyndromeTable;

/// Binary linear [n, k_dim, d] code.
class LinearCode {
 public:
  /// Builds the code spanned by the generator rows, which must be linearly
  /// independent. For n <= kExhaustiveLimit the minimum distance is computed
  /// by enumeration and a claimed distance, if any, must match. Beyond that
  /// the claimed distance is taken as given and marked unverified.
  static LinearCode from_generator(const BinaryMatrix& generator, std::optional<std::size_t> claimed_d = {});

  std::size_t n() const { return generator_.cols(); }
  std::size_t k_dim() const { return generator_.rows(); }
  std::size_t d() const { return d_; }
  bool distance_verified() const { return distance_verified_; }
  const BinaryMatrix& generator() const { return generator_; }
  const BinaryMatrix& parity_check() const { return parity_check_; }

  BitString encode(std::span<const std::uint8_t> message) const;
  BitString syndrome(std::span<const std::uint8_t> word) const;
  bool contains(std::span<const std::uint8_t> word) const;
  /// All 2^k_dim codewords; k_dim must be at most kExhaustiveLimit.
  std::vector<BitString> codewords() const;

  /// The dual code, generated by this code's parity-check matrix.
  LinearCode dual() const;

  /// Installs a decoder for codes too long for the syndrome table.
  LinearCode with_decoder(DecoderHook hook) const;

  // Decoding internals; see syndrome_decode().
  const SyndromeTable* table() const { return table_.get(); }
  const DecoderHook& decoder_hook() const { return hook_; }

 private:
  BinaryMatrix generator_;
  BinaryMatrix parity_check_;
  std::size_t d_ = 0;
  bool distance_verified_ = false;
  std::shared_ptr<const SyndromeTable> table_;
  DecoderHook hook_;
};

/// Minimum nonzero codeword weight by Gray-code enumeration of the row space.
std::size_t minimum_distance(const BinaryMatrix& generator);

std::optional<DecodeResult> syndrome_decode(const LinearCode& code, std::span<const std::uint8_t> word);

/// Nested pair C2 ⊂ C1 used for reconciliation (C1 decoding) and privacy
/// amplification (coset labels of C2 in C1).
struct CssPair {
  LinearCode c1;
  LinearCode c2;
  std::size_t t = 0;
  std::size_t k = 0;
  /// k × n matrix made of rows of the generator of C2⊥; its kernel on C1 is
  /// exactly C2.
  BinaryMatrix g2;

  std::size_t n() const { return c1.n(); }
};

/// Checks nesting and the distance conditions on C1 and C2⊥, computes t, k
/// and the labeling matrix. Requires t >= 1 and k >= 1.
CssPair validate_css(const LinearCode& c1, const LinearCode& c2);

/// [7,4,3] Hamming code as C1 with its dual as C2 (Steane construction).
CssPair steane_pair();
LinearCode hamming_7_4();

BitString coset_label(const CssPair& css, std::span<const std::uint8_t> u);

struct AliceReconciliation {
  BitString announcement;  // u + v
  BitString key;
  BitString codeword;  // u, kept local
};

AliceReconciliation reconcile_alice(const CssPair& css, std::span<const std::uint8_t> v, Rng& rng);

/// Key from Bob's raw block and Alice's announcement; nullopt on decoding
/// failure.
std::optional<BitString> reconcile_bob(const CssPair& css, std::span<const std::uint8_t> received,
                                       std::span<const std::uint8_t> announcement);

/// Bijection on {0..n-1}. permute(b)[i] = b[map[i]].
class Permutation {
 public:
  static Permutation identity(std::size_t n);
  /// Fisher-Yates shuffle driven by a generator seeded with `seed`.
  static Permutation random(std::size_t n, std::uint64_t seed);
  static Permutation from_mapping(std::vector<std::uint32_t> mapping);

  std::size_t size() const { return map_.size(); }
  const std::vector<std::uint32_t>& mapping() const { return map_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  Permutation inverse() const;

 private:
  std::vector<std::uint32_t> map_;
  std::optional<std::uint64_t> seed_;
};

BitString permute(const Permutation& perm, std::span<const std::uint8_t> block);
BitString inverse_permute(const Permutation& perm, std::span<const std::uint8_t> block);

// Code files: header "n k_dim", then k_dim generator rows of n characters in
// {0,1}. A "# d = <int>" comment records a claimed distance. Blank lines and
// other '#' comments are ignored. A CSS pair file holds two such blocks, C1
// first.
LinearCode parse_code(std::string_view text);
std::string format_code(const LinearCode& code);
CssPair parse_css_pair(std::string_view text);
std::string format_css_pair(const CssPair& css);
CssPair load_css_pair(const std::filesystem::path& path);

}  // namespace bb84
