#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "bb84/codes.hpp"
#include "bb84/gf2.hpp"

namespace bb84 {
namespace {

// All 2^rows combinations of the given rows, computed without the library.
std::set<BitString> span_of(const std::vector<BitString>& rows, std::size_t n) {
  std::set<BitString> out;
  for (std::uint32_t mask = 0; mask < (1u << rows.size()); ++mask) {
    BitString w(n, 0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (mask >> r & 1)
        for (std::size_t i = 0; i < n; ++i) w[i] ^= rows[r][i];
    out.insert(w);
  }
  return out;
}

BitString bits(const std::string& s) {
  BitString b;
  for (char c : s) b.push_back(c == '1');
  return b;
}

std::vector<BitString> all_words(std::size_t n) {
  std::vector<BitString> out;
  for (std::uint32_t x = 0; x < (1u << n); ++x) {
    BitString w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = x >> i & 1;
    out.push_back(w);
  }
  return out;
}

TEST(BinaryMatrix, RankAndNullspace) {
  const auto m = BinaryMatrix::from_rows({bits("1100"), bits("0110"), bits("1010")}, 4);
  EXPECT_EQ(m.rank(), 2u);
  EXPECT_FALSE(m.full_row_rank());
  const auto ns = m.nullspace();
  EXPECT_EQ(ns.rows(), 2u);
  // Brute force: the null space holds exactly the words orthogonal to every row.
  std::set<BitString> expected;
  for (const auto& w : all_words(4)) {
    bool zero = true;
    for (std::size_t r = 0; r < 3; ++r) {
      int dot = 0;
      for (std::size_t i = 0; i < 4; ++i) dot ^= m.at(r, i) & w[i];
      zero &= dot == 0;
    }
    if (zero) expected.insert(w);
  }
  EXPECT_EQ(span_of(ns.row_list(), 4), expected);
}

TEST(BinaryMatrix, ProductAndTranspose) {
  const auto a = BinaryMatrix::from_rows({bits("101"), bits("011")}, 3);
  const auto p = a * a.transpose();
  EXPECT_EQ(p.at(0, 0), 0);  // 1+0+1
  EXPECT_EQ(p.at(0, 1), 1);
  EXPECT_EQ(p.at(1, 1), 0);
  EXPECT_EQ(a.multiply(bits("111")), bits("00"));
  EXPECT_EQ(a.combine_rows(bits("11")), bits("110"));
}

TEST(Hamming, DistanceIsThreeByEnumeration) {
  const auto code = hamming_7_4();
  EXPECT_EQ(code.n(), 7u);
  EXPECT_EQ(code.k_dim(), 4u);
  const auto words = span_of(code.generator().row_list(), 7);
  ASSERT_EQ(words.size(), 16u);
  std::size_t d = 7;
  for (const auto& w : words)
    if (std::count(w.begin(), w.end(), 1) > 0) d = std::min<std::size_t>(d, std::count(w.begin(), w.end(), 1));
  EXPECT_EQ(d, 3u);
  EXPECT_EQ(code.d(), d);
  EXPECT_TRUE(code.distance_verified());
  for (const auto& w : words) EXPECT_TRUE(code.contains(w));
}

TEST(Hamming, ClaimedDistanceMustMatch) {
  EXPECT_THROW(LinearCode::from_generator(hamming_7_4().generator(), 4), CodeError);
  EXPECT_NO_THROW(LinearCode::from_generator(hamming_7_4().generator(), 3));
}

TEST(Hamming, SyndromeDecodingCorrectsSingleErrors) {
  const auto code = hamming_7_4();
  for (const auto& c : span_of(code.generator().row_list(), 7)) {
    for (std::size_t i = 0; i <= 7; ++i) {
      auto w = c;
      if (i < 7) w[i] ^= 1;
      const auto r = syndrome_decode(code, w);
      ASSERT_TRUE(r);
      EXPECT_EQ(r->codeword, c);
      EXPECT_EQ(r->corrected_weight, i < 7 ? 1u : 0u);
    }
  }
}

TEST(Steane, PairParameters) {
  const auto css = steane_pair();
  EXPECT_EQ(css.n(), 7u);
  EXPECT_EQ(css.k, 1u);
  EXPECT_EQ(css.t, 1u);
  const auto c1 = span_of(css.c1.generator().row_list(), 7);
  for (const auto& w : span_of(css.c2.generator().row_list(), 7)) EXPECT_TRUE(c1.count(w));
}

TEST(Steane, CosetLabelIsConstantOnCosetsAndSurjective) {
  const auto css = steane_pair();
  const auto c1 = span_of(css.c1.generator().row_list(), 7);
  const auto c2 = span_of(css.c2.generator().row_list(), 7);
  std::set<BitString> labels;
  for (const auto& u : c1) {
    const auto label = coset_label(css, u);
    labels.insert(label);
    for (const auto& c : c2) EXPECT_EQ(coset_label(css, xor_bits(u, c)), label);
  }
  EXPECT_EQ(labels.size(), std::size_t{1} << css.k);
  EXPECT_THROW(coset_label(css, bits("1000000")), NotACodeword);
}

TEST(ValidateCss, RejectsBrokenPairs) {
  const auto hamming = hamming_7_4();
  const auto outside = LinearCode::from_generator(BinaryMatrix::from_rows({bits("1000000")}, 7));
  EXPECT_THROW(validate_css(hamming, outside), NestingViolation);
  EXPECT_THROW(validate_css(hamming, hamming), DegenerateCode);

  // Even-weight code has distance 2, so t = 0.
  std::vector<BitString> even;
  for (std::size_t i = 0; i < 6; ++i) {
    BitString r(7, 0);
    r[i] = r[6] = 1;
    even.push_back(r);
  }
  const auto c1 = LinearCode::from_generator(BinaryMatrix::from_rows(even, 7));
  const auto c2 = LinearCode::from_generator(BinaryMatrix::from_rows({bits("1111110")}, 7));
  EXPECT_THROW(validate_css(c1, c2), DistanceTooSmall);
}

TEST(Reconciliation, AgreesUnderCorrectableErrors) {
  const auto css = steane_pair();
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    BitString v(7);
    for (auto& b : v) b = rng.bit();
    const auto alice = reconcile_alice(css, v, rng);
    EXPECT_TRUE(css.c1.contains(alice.codeword));
    EXPECT_EQ(alice.announcement, xor_bits(alice.codeword, v));
    for (std::size_t i = 0; i <= 7; ++i) {
      auto w = v;
      if (i < 7) w[i] ^= 1;
      const auto key = reconcile_bob(css, w, alice.announcement);
      ASSERT_TRUE(key);
      EXPECT_EQ(*key, alice.key);
    }
  }
}

TEST(Reconciliation, CodewordChoiceIsUniform) {
  const auto css = steane_pair();
  Rng rng(12);
  const BitString v(7, 0);
  std::map<BitString, int> counts;
  const int draws = 16000;
  for (int i = 0; i < draws; ++i) ++counts[reconcile_alice(css, v, rng).codeword];
  ASSERT_EQ(counts.size(), 16u);
  const double expected = draws / 16.0;
  double chi2 = 0.0;
  for (const auto& [w, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99.9th percentile of chi-square with 15 degrees of freedom.
  EXPECT_LT(chi2, 37.697);
}

TEST(Permutation, InverseRoundTrip) {
  const auto perm = Permutation::random(50, 99);
  EXPECT_EQ(perm.seed(), std::optional<std::uint64_t>(99));
  Rng rng(3);
  BitString b(50);
  for (auto& x : b) x = rng.bit();
  EXPECT_EQ(inverse_permute(perm, permute(perm, b)), b);
  EXPECT_EQ(permute(perm.inverse(), permute(perm, b)), b);
  EXPECT_EQ(permute(Permutation::identity(50), b), b);
  EXPECT_EQ(Permutation::random(50, 99).mapping(), perm.mapping());
  EXPECT_THROW(Permutation::from_mapping({0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(permute(perm, BitString(49)), std::invalid_argument);
}

TEST(Permutation, DispersesBursts) {
  const std::size_t n = 70;
  BitString burst(n, 0);
  burst[30] = burst[31] = burst[32] = 1;
  auto mean_gap = [](const BitString& b) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i]) pos.push_back(i);
    double sum = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      for (std::size_t j = i + 1; j < pos.size(); ++j, ++pairs) sum += double(pos[j] - pos[i]);
    return sum / pairs;
  };
  const double baseline = mean_gap(burst);  // 4/3
  double total = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) total += mean_gap(permute(Permutation::random(n, t), burst));
  // Three uniform distinct positions in [0, n) are on average (n + 1) / 3 apart.
  EXPECT_NEAR(total / trials, (n + 1) / 3.0, 1.0);
  EXPECT_GT(total / trials, 10 * baseline);
}

TEST(CodeFiles, PairRoundTrip) {
  const auto css = steane_pair();
  const auto text = format_css_pair(css);
  const auto back = parse_css_pair(text);
  EXPECT_EQ(back.c1.generator(), css.c1.generator());
  EXPECT_EQ(back.c2.generator(), css.c2.generator());
  EXPECT_EQ(back.t, css.t);
  EXPECT_EQ(back.k, css.k);
}

TEST(CodeFiles, ParsesCommentsAndRejectsGarbage) {
  const auto code = parse_code("# a comment\n3 1\n# d = 3\n111\n");
  EXPECT_EQ(code.d(), 3u);
  EXPECT_THROW(parse_code("3 1\n112\n"), CodeError);
  EXPECT_THROW(parse_code("3 2\n111\n"), CodeError);
  EXPECT_THROW(parse_code("3 1\n1111\n"), CodeError);
  EXPECT_THROW(parse_css_pair("3 1\n111\n"), CodeError);
}

}  // namespace
}  // namespace bb84
