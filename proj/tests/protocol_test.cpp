#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "bb84/protocol.hpp"

namespace bb84 {
namespace {

TEST(Params, Validation) {
  auto ok = ProtocolParams::with_test_size(30000, 0.1, 200);
  EXPECT_NO_THROW(validate(ok));
  EXPECT_DOUBLE_EQ(ok.acceptance_threshold(), 0.10);
  EXPECT_DOUBLE_EQ(ok.effective_delta_prime(), 0.001);

  auto bad = ok;
  bad.p = 0.6;
  EXPECT_THROW(validate(bad), InvalidParams);
  bad = ok;
  bad.p = 0.0;
  EXPECT_THROW(validate(bad), InvalidParams);
  bad = ok;
  bad.N = 20000;  // 20000 (0.01 - 0.001) = 180 < 200
  EXPECT_THROW(validate(bad), InvalidParams);
  bad = ok;
  bad.delta_e = 0.2;
  EXPECT_THROW(validate(bad), InvalidParams);
}

TEST(Sifting, ClassifiesAllFourCases) {
  EXPECT_EQ(classify(Basis::Rectilinear, Basis::Rectilinear), SiftClass::BothRect);
  EXPECT_EQ(classify(Basis::Diagonal, Basis::Diagonal), SiftClass::BothDiag);
  EXPECT_EQ(classify(Basis::Rectilinear, Basis::Diagonal), SiftClass::AliceRectBobDiag);
  EXPECT_EQ(classify(Basis::Diagonal, Basis::Rectilinear), SiftClass::AliceDiagBobRect);
}

TEST(Sifting, RetainedFractionFollowsBias) {
  for (double p : {0.5, 0.25, 0.1}) {
    Rng ab(1), abits(2), bb(3), bo(4);
    const std::uint64_t N = 100000;
    const auto sent = alice_prepare(N, p, ab, abits);
    const auto got = bob_measure(sent, p, bb, bo);
    const auto sifted = sift(sent, got);
    const double q = p * p + (1 - p) * (1 - p);
    EXPECT_NEAR(sifted.retained_fraction(), q, 4 * std::sqrt(q * (1 - q) / N));
    // No channel, so sifted positions agree.
    for (const auto& e : sifted.both_rect) ASSERT_EQ(e.alice_bit, e.bob_bit);
    for (const auto& e : sifted.both_diag) ASSERT_EQ(e.alice_bit, e.bob_bit);
  }
}

TEST(Sifting, MismatchedBasisOutcomeIsRandom) {
  Rng bb(7), bo(8);
  std::vector<QubitSymbol> sent(40000, {Basis::Diagonal, 1});
  const auto got = bob_measure(sent, 1.0, bb, bo);  // Bob always rectilinear
  int ones = 0;
  for (const auto& m : got) ones += m.bit;
  EXPECT_NEAR(ones / 40000.0, 0.5, 5 * std::sqrt(0.25 / 40000));
  EXPECT_THROW(sift(sent, std::vector<Measurement>(3)), std::invalid_argument);
}

TEST(Estimation, SelectionIsSortedSubsetOfRightSize) {
  std::vector<std::uint32_t> rect{1, 4, 9, 12, 30}, diag{2, 3, 5, 6, 7, 8};
  Rng rng(3);
  const auto s = select_test_positions(rect, diag, 3, 6, rng);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->rect.size(), 3u);
  EXPECT_TRUE(std::is_sorted(s->rect.begin(), s->rect.end()));
  for (auto x : s->rect) EXPECT_NE(std::find(rect.begin(), rect.end(), x), rect.end());
  EXPECT_EQ(s->diag, diag);
  EXPECT_FALSE(select_test_positions(rect, diag, 6, 1, rng));
}

TEST(Estimation, StrictThreshold) {
  ProtocolParams params = ProtocolParams::with_test_size(30000, 0.1, 100);
  const TestSelection none;
  EXPECT_TRUE(passes_error_check(make_estimate(9, 100, 0, 100, none), params));
  // Exactly e_max - delta_e aborts.
  EXPECT_FALSE(passes_error_check(make_estimate(10, 100, 0, 100, none), params));
  EXPECT_FALSE(passes_error_check(make_estimate(0, 100, 10, 100, none), params));
}

TEST(Estimation, RefinedCountsMismatches) {
  SiftedData d;
  for (std::uint32_t i = 0; i < 10; ++i) d.both_rect.push_back({i, 0, std::uint8_t(i < 3)});
  for (std::uint32_t i = 10; i < 20; ++i) d.both_diag.push_back({i, 1, 1});
  d.transmitted = 40;
  Rng rng(1);
  const auto e = refined_estimate(d, 10, 10, rng);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->r1, 3u);
  EXPECT_EQ(e->r2, 0u);
  EXPECT_DOUBLE_EQ(e->e1, 0.3);
  EXPECT_EQ(e->tested_positions.size(), 20u);
  EXPECT_FALSE(refined_estimate(d, 11, 1, rng));
  EXPECT_DOUBLE_EQ(d.retained_fraction(), 0.5);
}

TEST(NaiveRate, Prediction) {
  EXPECT_NEAR(predicted_naive_rate(0.1, 0, 1), 0.0060976, 1e-7);
  // Balanced bases: half the sifted bits are rectilinear and wrong half the time.
  EXPECT_DOUBLE_EQ(predicted_naive_rate(0.5, 0, 1), 0.25);
  EXPECT_EQ(predicted_naive_rate(0.3, 0, 0), 0.0);
  // Literal: errors only on rectilinear-sifted positions, at rate p2/2.
  const double p = 0.2, p1 = 0.3, p2 = 0.6;
  const double rect = p * p, diag = (1 - p) * (1 - p);
  EXPECT_NEAR(predicted_naive_rate(p, p1, p2), (rect * p2 / 2 + diag * p1 / 2) / (rect + diag), 1e-15);
  Rng rng(1);
  EXPECT_THROW(naive_estimate(SiftedData{}, 10, rng), std::invalid_argument);
}

TEST(WeightedRates, SwapsAtTheEnds) {
  const auto diag_only = weighted_error_rates(0.0, 0.3, 0.05);
  EXPECT_DOUBLE_EQ(diag_only.bit_flip, 0.05);
  EXPECT_DOUBLE_EQ(diag_only.phase, 0.3);
  const auto rect_only = weighted_error_rates(1.0, 0.3, 0.05);
  EXPECT_DOUBLE_EQ(rect_only.bit_flip, 0.3);
  EXPECT_DOUBLE_EQ(rect_only.phase, 0.05);
  const auto half = weighted_error_rates(0.5, 0.3, 0.05);
  EXPECT_DOUBLE_EQ(half.bit_flip, half.phase);
  EXPECT_THROW(weighted_error_rates(1.5, 0, 0), std::invalid_argument);
}

}  // namespace
}  // namespace bb84
