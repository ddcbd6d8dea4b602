#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bb84/rng.hpp"

namespace bb84 {

/// Rectilinear is the Z basis {0, 90 degrees}; Diagonal is the X basis
/// {45, 135 degrees}.
enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// Classical stand-in for a BB84 photon. Bit 0 is horizontal (Rectilinear)
/// or 45 degrees (Diagonal); bit 1 is vertical or 135 degrees.
struct QubitSymbol {
  Basis basis = Basis::Rectilinear;
  std::uint8_t bit = 0;

  friend bool operator==(const QubitSymbol&, const QubitSymbol&) = default;
};

enum class PauliLetter : std::uint8_t { I, X, Y, Z };

struct Passive {
  friend bool operator==(const Passive&, const Passive&) = default;
};

/// Per qubit: measure Rectilinear with probability p1, Diagonal with
/// probability p2, otherwise leave the qubit alone.
struct BiasedInterceptResend {
  double p1 = 0.0;
  double p2 = 0.0;
  friend bool operator==(const BiasedInterceptResend&, const BiasedInterceptResend&) = default;
};

struct DepolarizingPauli {
  double q_i = 1.0;
  double q_x = 0.0;
  double q_y = 0.0;
  double q_z = 0.0;
  friend bool operator==(const DepolarizingPauli&, const DepolarizingPauli&) = default;

  /// (1 - 3w, w, w, w): flips the bit of either basis with probability 2w.
  static DepolarizingPauli symmetric(double w) { return {1.0 - 3.0 * w, w, w, w}; }
};

struct FixedPauliString {
  std::vector<PauliLetter> letters;
  friend bool operator==(const FixedPauliString&, const FixedPauliString&) = default;
};

using AttackStrategy = std::variant<Passive, BiasedInterceptResend, DepolarizingPauli, FixedPauliString>;

class InvalidStrategy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidStrategy if the probabilities are out of range.
void validate(const AttackStrategy& strategy);

std::string describe(const AttackStrategy& strategy);

QubitSymbol apply_pauli(QubitSymbol sym, PauliLetter letter);

/// Same basis: unchanged. Otherwise the original bit is lost and a uniformly
/// random value is resent in the measurement basis.
QubitSymbol intercept_resend(QubitSymbol sym, Basis measure_basis, Rng& rng);

/// Applies the strategy independently to each qubit. FixedPauliString must
/// match the input length.
std::vector<QubitSymbol> transmit(std::span<const QubitSymbol> symbols, const AttackStrategy& strategy,
                                  Rng& rng);

/// Which substream drives a strategy's randomness in a session.
Stream channel_stream(const AttackStrategy& strategy);

}  // namespace bb84
