#include <array>
#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "bb84/channel.hpp"

namespace bb84 {
namespace {

using Complex = std::complex<double>;
using State = std::array<Complex, 2>;
using Matrix = std::array<std::array<Complex, 2>, 2>;

// Polarization states as vectors in the computational basis.
State state_of(QubitSymbol s) {
  const double r = 1.0 / std::sqrt(2.0);
  if (s.basis == Basis::Rectilinear) return s.bit ? State{0.0, 1.0} : State{1.0, 0.0};
  return s.bit ? State{r, -r} : State{r, r};
}

Matrix matrix_of(PauliLetter l) {
  const Complex i{0.0, 1.0};
  switch (l) {
    case PauliLetter::I: return {{{1.0, 0.0}, {0.0, 1.0}}};
    case PauliLetter::X: return {{{0.0, 1.0}, {1.0, 0.0}}};
    case PauliLetter::Y: return {{{0.0, -i}, {i, 0.0}}};
    case PauliLetter::Z: return {{{1.0, 0.0}, {0.0, -1.0}}};
  }
  return {};
}

// |<a|b>| = 1 means equal up to a global phase.
bool same_ray(const State& a, const State& b) {
  const Complex overlap = std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
  return std::abs(std::abs(overlap) - 1.0) < 1e-12;
}

TEST(ApplyPauli, MatchesMatrixAction) {
  for (auto basis : {Basis::Rectilinear, Basis::Diagonal}) {
    for (std::uint8_t bit : {0, 1}) {
      for (auto letter : {PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z}) {
        const QubitSymbol in{basis, bit};
        const auto m = matrix_of(letter);
        const auto s = state_of(in);
        const State expected{m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]};
        const auto out = apply_pauli(in, letter);
        EXPECT_EQ(out.basis, basis);
        EXPECT_TRUE(same_ray(state_of(out), expected))
            << "basis " << int(basis) << " bit " << int(bit) << " letter " << int(letter);
      }
    }
  }
}

TEST(InterceptResend, SameBasisIsTransparent) {
  Rng rng(1);
  for (auto basis : {Basis::Rectilinear, Basis::Diagonal})
    for (std::uint8_t bit : {0, 1}) EXPECT_EQ(intercept_resend({basis, bit}, basis, rng), (QubitSymbol{basis, bit}));
}

TEST(InterceptResend, WrongBasisResendsInMeasurementBasis) {
  Rng rng(2);
  int ones = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const auto out = intercept_resend({Basis::Rectilinear, 0}, Basis::Diagonal, rng);
    ASSERT_EQ(out.basis, Basis::Diagonal);
    ones += out.bit;
  }
  EXPECT_NEAR(ones / double(trials), 0.5, 5 * std::sqrt(0.25 / trials));
}

// Error rate seen by a receiver measuring in the sender's basis.
double sifted_error_rate(const AttackStrategy& strategy, Basis basis, int trials, std::uint64_t seed) {
  Rng source(seed), channel(seed + 1), outcome(seed + 2);
  std::vector<QubitSymbol> sent(trials);
  for (auto& q : sent) q = {basis, source.bit()};
  const auto received = transmit(sent, strategy, channel);
  int errors = 0;
  for (int i = 0; i < trials; ++i) {
    const auto bit = received[i].basis == basis ? received[i].bit : outcome.bit();
    errors += bit != sent[i].bit;
  }
  return errors / double(trials);
}

TEST(Transmit, BiasedInterceptResendRatesPerBasis) {
  const int trials = 100000;
  for (auto [p1, p2] : {std::pair{0.0, 1.0}, std::pair{0.3, 0.5}, std::pair{1.0, 0.0}}) {
    const BiasedInterceptResend eve{p1, p2};
    // Only a wrong-basis measurement disturbs, and then with probability 1/2.
    const double e1 = p2 / 2, e2 = p1 / 2;
    const double tol1 = 5 * std::sqrt(std::max(e1 * (1 - e1), 1e-6) / trials);
    const double tol2 = 5 * std::sqrt(std::max(e2 * (1 - e2), 1e-6) / trials);
    EXPECT_NEAR(sifted_error_rate(eve, Basis::Rectilinear, trials, 10), e1, tol1);
    EXPECT_NEAR(sifted_error_rate(eve, Basis::Diagonal, trials, 20), e2, tol2);
  }
}

TEST(Transmit, SymmetricPauliFlipsEachBasisAtTwiceTheWeight) {
  const int trials = 100000;
  const double w = 0.02, flip = 2 * w;
  const double tol = 5 * std::sqrt(flip * (1 - flip) / trials);
  EXPECT_NEAR(sifted_error_rate(DepolarizingPauli::symmetric(w), Basis::Rectilinear, trials, 30), flip, tol);
  EXPECT_NEAR(sifted_error_rate(DepolarizingPauli::symmetric(w), Basis::Diagonal, trials, 40), flip, tol);
}

TEST(Transmit, PassiveIsIdentity) {
  Rng rng(5);
  std::vector<QubitSymbol> sent{{Basis::Rectilinear, 1}, {Basis::Diagonal, 0}, {Basis::Diagonal, 1}};
  EXPECT_EQ(transmit(sent, Passive{}, rng), sent);
}

TEST(Transmit, FixedPauliStringAppliesPositionally) {
  Rng rng(6);
  std::vector<QubitSymbol> sent(4, {Basis::Rectilinear, 0});
  const FixedPauliString s{{PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z}};
  const auto out = transmit(sent, s, rng);
  EXPECT_EQ(out[0].bit, 0);
  EXPECT_EQ(out[1].bit, 1);
  EXPECT_EQ(out[2].bit, 1);
  EXPECT_EQ(out[3].bit, 0);
  EXPECT_THROW(transmit(std::vector<QubitSymbol>(3), s, rng), InvalidStrategy);
}

TEST(Validate, RejectsBadProbabilities) {
  EXPECT_THROW(validate(BiasedInterceptResend{-0.1, 0.5}), InvalidStrategy);
  EXPECT_THROW(validate(BiasedInterceptResend{0.6, 0.6}), InvalidStrategy);
  EXPECT_THROW(validate(DepolarizingPauli{0.5, 0.5, 0.5, 0.0}), InvalidStrategy);
  EXPECT_NO_THROW(validate(DepolarizingPauli::symmetric(0.1)));
  EXPECT_NO_THROW(validate(Passive{}));
}

TEST(ChannelStream, EveAndNoiseUseSeparateStreams) {
  EXPECT_EQ(channel_stream(BiasedInterceptResend{0, 1}), Stream::EveDecisions);
  EXPECT_EQ(channel_stream(DepolarizingPauli::symmetric(0.01)), Stream::ChannelNoise);
}

}  // namespace
}  // namespace bb84
