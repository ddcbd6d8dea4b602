#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bb84/channel.hpp"
#include "bb84/rng.hpp"

namespace bb84 {

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProtocolParams {
  std::uint64_t N = 0;        // transmitted qubits
  double p = 0.5;             // probability of the rectilinear basis, both parties
  std::uint64_t m1 = 1;       // rectilinear test sample
  std::uint64_t m2 = 1;       // diagonal test sample
  double e_max = 0.11;
  double delta_e = 0.01;
  /// Planning slack; p²/10 when unset.
  std::optional<double> delta_prime;
  /// Cap on reconciliation blocks per session; 0 uses every whole block.
  std::uint64_t max_blocks = 0;

  double effective_delta_prime() const { return delta_prime.value_or(p * p / 10.0); }
  double acceptance_threshold() const { return e_max - delta_e; }

  /// Defaults with m1 = m2 = n_test.
  static ProtocolParams with_test_size(std::uint64_t N, double p, std::uint64_t n_test);
};

/// 0 < p <= 1/2, e_max - delta_e > 0, m1, m2 >= 1, delta' > 0 and
/// N (p² - delta') >= m1. Throws InvalidParams.
void validate(const ProtocolParams& params);

enum class SiftClass : std::uint8_t { BothRect, BothDiag, AliceRectBobDiag, AliceDiagBobRect };

SiftClass classify(Basis alice, Basis bob);

/// Bob's record for one position.
struct Measurement {
  Basis basis = Basis::Rectilinear;
  std::uint8_t bit = 0;
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct SiftedEntry {
  std::uint32_t position = 0;
  std::uint8_t alice_bit = 0;
  std::uint8_t bob_bit = 0;
  friend bool operator==(const SiftedEntry&, const SiftedEntry&) = default;
};

struct SiftedData {
  std::vector<SiftedEntry> both_rect;
  std::vector<SiftedEntry> both_diag;
  std::size_t transmitted = 0;

  std::size_t retained() const { return both_rect.size() + both_diag.size(); }
  double retained_fraction() const;
};

/// Each basis Rectilinear with probability p (AliceBases stream), each bit
/// uniform (AliceBits stream).
std::vector<QubitSymbol> alice_prepare(std::uint64_t N, double p, Rng& bases, Rng& bits);

/// Basis Rectilinear with probability p; a matching basis reads the symbol's
/// bit, a mismatched one gives a uniform outcome.
std::vector<Measurement> bob_measure(std::span<const QubitSymbol> received, double p, Rng& bases, Rng& outcomes);

/// Keeps positions where the bases agree. Throws std::invalid_argument on a
/// length mismatch.
SiftedData sift(std::span<const QubitSymbol> alice, std::span<const Measurement> bob);

/// Test positions chosen by Bob, sorted ascending within each basis.
struct TestSelection {
  std::vector<std::uint32_t> rect;
  std::vector<std::uint32_t> diag;
};

/// Uniform sample without replacement of m1 rectilinear and m2 diagonal
/// positions; nullopt if either class is too small.
std::optional<TestSelection> select_test_positions(std::span<const std::uint32_t> rect_positions,
                                                   std::span<const std::uint32_t> diag_positions, std::uint64_t m1,
                                                   std::uint64_t m2, Rng& rng);

struct ErrorEstimate {
  std::uint64_t r1 = 0;
  std::uint64_t m1 = 0;
  std::uint64_t r2 = 0;
  std::uint64_t m2 = 0;
  double e1 = 0.0;
  double e2 = 0.0;
  std::vector<std::uint32_t> tested_positions;  // ascending, both bases

  friend bool operator==(const ErrorEstimate&, const ErrorEstimate&) = default;
};

ErrorEstimate make_estimate(std::uint64_t r1, std::uint64_t m1, std::uint64_t r2, std::uint64_t m2,
                            const TestSelection& selection);

/// Refined per-basis estimate; nullopt means the sample was insufficient.
std::optional<ErrorEstimate> refined_estimate(const SiftedData& sifted, std::uint64_t m1, std::uint64_t m2, Rng& rng);

/// Strict comparison: a rate equal to e_max - delta_e aborts.
bool passes_error_check(const ErrorEstimate& estimate, const ProtocolParams& params);

/// Single lumped error rate over a uniform sample of `sample_size` positions
/// drawn from both classes together. Demonstration only; never used to
/// accept a session. Throws std::invalid_argument on an empty sift.
double naive_estimate(const SiftedData& sifted, std::uint64_t sample_size, Rng& rng);

/// Analytical average rate for the biased intercept-resend attack.
double predicted_naive_rate(double p, double p1, double p2);

struct WeightedRates {
  double bit_flip = 0.0;
  double phase = 0.0;
};

/// Fraction q of key positions measured in the rectilinear basis:
/// bit-flip = q e1 + (1-q) e2, phase = q e2 + (1-q) e1. With q = 0 (key from
/// the diagonal basis only) this is (e2, e1).
WeightedRates weighted_error_rates(double q, double e1, double e2);

}  // namespace bb84
