#include "bb84/channel.hpp"

#include <cmath>

#include <fmt/format.h>

namespace bb84 {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void validate(const AttackStrategy& strategy) {
  std::visit(overloaded{
                 [](const Passive&) {},
                 [](const BiasedInterceptResend& s) {
                   if (!is_probability(s.p1) || !is_probability(s.p2) || s.p1 + s.p2 > 1.0) {
                     throw InvalidStrategy(
                         fmt::format("intercept-resend needs p1, p2 >= 0 and p1 + p2 <= 1 (got {}, {})",
                                     s.p1, s.p2));
                   }
                 },
                 [](const DepolarizingPauli& s) {
                   for (double q : {s.q_i, s.q_x, s.q_y, s.q_z}) {
                     if (!is_probability(q)) throw InvalidStrategy("Pauli probabilities must lie in [0, 1]");
                   }
                   if (std::abs(s.q_i + s.q_x + s.q_y + s.q_z - 1.0) > 1e-12) {
                     throw InvalidStrategy("Pauli probabilities must sum to 1");
                   }
                 },
                 [](const FixedPauliString&) {},
             },
             strategy);
}

std::string describe(const AttackStrategy& strategy) {
  return std::visit(
      overloaded{
          [](const Passive&) { return std::string("passive"); },
          [](const BiasedInterceptResend& s) { return fmt::format("intercept-resend({},{})", s.p1, s.p2); },
          [](const DepolarizingPauli& s) {
            return fmt::format("pauli({},{},{},{})", s.q_i, s.q_x, s.q_y, s.q_z);
          },
          [](const FixedPauliString& s) { return fmt::format("fixed-pauli[{}]", s.letters.size()); },
      },
      strategy);
}

QubitSymbol apply_pauli(QubitSymbol sym, PauliLetter letter) {
  // X flips Z-basis values, Z flips X-basis values, Y does both.
  bool flips = false;
  switch (letter) {
    case PauliLetter::I: flips = false; break;
    case PauliLetter::X: flips = sym.basis == Basis::Rectilinear; break;
    case PauliLetter::Z: flips = sym.basis == Basis::Diagonal; break;
    case PauliLetter::Y: flips = true; break;
  }
  if (flips) sym.bit ^= 1;
  return sym;
}

QubitSymbol intercept_resend(QubitSymbol sym, Basis measure_basis, Rng& rng) {
  if (sym.basis == measure_basis) return sym;
  return {measure_basis, rng.bit()};
}

std::vector<QubitSymbol> transmit(std::span<const QubitSymbol> symbols, const AttackStrategy& strategy,
                                  Rng& rng) {
  validate(strategy);
  std::vector<QubitSymbol> out(symbols.begin(), symbols.end());
  std::visit(overloaded{
                 [](const Passive&) {},
                 [&](const BiasedInterceptResend& s) {
                   for (auto& q : out) {
                     const double u = rng.uniform();
                     if (u < s.p1) {
                       q = intercept_resend(q, Basis::Rectilinear, rng);
                     } else if (u < s.p1 + s.p2) {
                       q = intercept_resend(q, Basis::Diagonal, rng);
                     }
                   }
                 },
                 [&](const DepolarizingPauli& s) {
                   for (auto& q : out) {
                     const double u = rng.uniform();
                     PauliLetter letter = PauliLetter::I;
                     if (u < s.q_x) {
                       letter = PauliLetter::X;
                     } else if (u < s.q_x + s.q_y) {
                       letter = PauliLetter::Y;
                     } else if (u < s.q_x + s.q_y + s.q_z) {
                       letter = PauliLetter::Z;
                     }
                     q = apply_pauli(q, letter);
                   }
                 },
                 [&](const FixedPauliString& s) {
                   if (s.letters.size() != out.size()) {
                     throw InvalidStrategy(fmt::format("fixed Pauli string has {} letters for {} qubits",
                                                       s.letters.size(), out.size()));
                   }
                   for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply_pauli(out[i], s.letters[i]);
                 },
             },
             strategy);
  return out;
}

Stream channel_stream(const AttackStrategy& strategy) {
  return std::holds_alternative<BiasedInterceptResend>(strategy) ? Stream::EveDecisions : Stream::ChannelNoise;
}

}  // namespace bb84
