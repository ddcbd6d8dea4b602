#include "bb84/protocol.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bb84 {

ProtocolParams ProtocolParams::with_test_size(std::uint64_t N, double p, std::uint64_t n_test) {
  ProtocolParams params;
  params.N = N;
  params.p = p;
  params.m1 = n_test;
  params.m2 = n_test;
  return params;
}

void validate(const ProtocolParams& params) {
  if (!(params.p > 0.0 && params.p <= 0.5)) throw InvalidParams(fmt::format("p = {} must satisfy 0 < p <= 1/2", params.p));
  if (!(params.e_max - params.delta_e > 0.0) || params.delta_e < 0.0) {
    throw InvalidParams("need delta_e >= 0 and e_max - delta_e > 0");
  }
  if (params.m1 < 1 || params.m2 < 1) throw InvalidParams("test sample sizes must be at least 1");
  const double dp = params.effective_delta_prime();
  if (!(dp > 0.0)) throw InvalidParams("delta' must be positive");
  const double capacity = static_cast<double>(params.N) * (params.p * params.p - dp);
  if (capacity < static_cast<double>(params.m1)) {
    throw InvalidParams(fmt::format("N (p^2 - delta') = {:.1f} is smaller than m1 = {}", capacity, params.m1));
  }
  if (params.N > std::uint64_t{0xffffffff}) throw InvalidParams("N must fit in 32 bits");
}

SiftClass classify(Basis alice, Basis bob) {
  if (alice == bob) return alice == Basis::Rectilinear ? SiftClass::BothRect : SiftClass::BothDiag;
  return alice == Basis::Rectilinear ? SiftClass::AliceRectBobDiag : SiftClass::AliceDiagBobRect;
}

double SiftedData::retained_fraction() const {
  return transmitted == 0 ? 0.0 : static_cast<double>(retained()) / static_cast<double>(transmitted);
}

std::vector<QubitSymbol> alice_prepare(std::uint64_t N, double p, Rng& bases, Rng& bits) {
  std::vector<QubitSymbol> out(N);
  for (auto& q : out) {
    q.basis = bases.bernoulli(p) ? Basis::Rectilinear : Basis::Diagonal;
    q.bit = bits.bit();
  }
  return out;
}

std::vector<Measurement> bob_measure(std::span<const QubitSymbol> received, double p, Rng& bases, Rng& outcomes) {
  std::vector<Measurement> out(received.size());
  for (std::size_t i = 0; i < received.size(); ++i) {
    out[i].basis = bases.bernoulli(p) ? Basis::Rectilinear : Basis::Diagonal;
    out[i].bit = out[i].basis == received[i].basis ? received[i].bit : outcomes.bit();
  }
  return out;
}

SiftedData sift(std::span<const QubitSymbol> alice, std::span<const Measurement> bob) {
  if (alice.size() != bob.size()) throw std::invalid_argument("sift: Alice and Bob records differ in length");
  SiftedData out;
  out.transmitted = alice.size();
  for (std::size_t i = 0; i < alice.size(); ++i) {
    const SiftedEntry e{static_cast<std::uint32_t>(i), alice[i].bit, bob[i].bit};
    switch (classify(alice[i].basis, bob[i].basis)) {
      case SiftClass::BothRect: out.both_rect.push_back(e); break;
      case SiftClass::BothDiag: out.both_diag.push_back(e); break;
      default: break;
    }
  }
  return out;
}

namespace {

std::vector<std::uint32_t> sample_without_replacement(std::span<const std::uint32_t> population, std::uint64_t m,
                                                      Rng& rng) {
  std::vector<std::uint32_t> pool(population.begin(), population.end());
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::uint32_t> positions_of(const std::vector<SiftedEntry>& entries) {
  std::vector<std::uint32_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.position);
  return out;
}

std::uint64_t mismatches(const std::vector<SiftedEntry>& entries, const std::vector<std::uint32_t>& tested) {
  std::uint64_t r = 0;
  auto it = entries.begin();
  for (auto pos : tested) {
    it = std::lower_bound(it, entries.end(), pos, [](const SiftedEntry& e, std::uint32_t p) { return e.position < p; });
    if (it->alice_bit != it->bob_bit) ++r;
  }
  return r;
}

}  // namespace

std::optional<TestSelection> select_test_positions(std::span<const std::uint32_t> rect_positions,
                                                   std::span<const std::uint32_t> diag_positions, std::uint64_t m1,
                                                   std::uint64_t m2, Rng& rng) {
  if (rect_positions.size() < m1 || diag_positions.size() < m2) return std::nullopt;
  TestSelection s;
  s.rect = sample_without_replacement(rect_positions, m1, rng);
  s.diag = sample_without_replacement(diag_positions, m2, rng);
  return s;
}

ErrorEstimate make_estimate(std::uint64_t r1, std::uint64_t m1, std::uint64_t r2, std::uint64_t m2,
                            const TestSelection& selection) {
  ErrorEstimate e;
  e.r1 = r1;
  e.m1 = m1;
  e.r2 = r2;
  e.m2 = m2;
  e.e1 = m1 ? static_cast<double>(r1) / static_cast<double>(m1) : 0.0;
  e.e2 = m2 ? static_cast<double>(r2) / static_cast<double>(m2) : 0.0;
  e.tested_positions = selection.rect;
  e.tested_positions.insert(e.tested_positions.end(), selection.diag.begin(), selection.diag.end());
  std::sort(e.tested_positions.begin(), e.tested_positions.end());
  return e;
}

std::optional<ErrorEstimate> refined_estimate(const SiftedData& sifted, std::uint64_t m1, std::uint64_t m2,
                                              Rng& rng) {
  const auto rect = positions_of(sifted.both_rect);
  const auto diag = positions_of(sifted.both_diag);
  auto selection = select_test_positions(rect, diag, m1, m2, rng);
  if (!selection) return std::nullopt;
  return make_estimate(mismatches(sifted.both_rect, selection->rect), m1,
                       mismatches(sifted.both_diag, selection->diag), m2, *selection);
}

bool passes_error_check(const ErrorEstimate& estimate, const ProtocolParams& params) {
  const double limit = params.acceptance_threshold();
  return estimate.e1 < limit && estimate.e2 < limit;
}

double naive_estimate(const SiftedData& sifted, std::uint64_t sample_size, Rng& rng) {
  std::vector<const SiftedEntry*> merged;
  merged.reserve(sifted.retained());
  for (const auto& e : sifted.both_rect) merged.push_back(&e);
  for (const auto& e : sifted.both_diag) merged.push_back(&e);
  if (merged.empty()) throw std::invalid_argument("naive_estimate: no sifted positions");
  const std::uint64_t m = std::min<std::uint64_t>(std::max<std::uint64_t>(sample_size, 1), merged.size());
  std::uint64_t errors = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto j = i + rng.below(merged.size() - i);
    std::swap(merged[i], merged[j]);
    if (merged[i]->alice_bit != merged[i]->bob_bit) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(m);
}

double predicted_naive_rate(double p, double p1, double p2) {
  const double rect = p * p;
  const double diag = (1.0 - p) * (1.0 - p);
  return (rect * p2 + diag * p1) / (2.0 * (rect + diag));
}

WeightedRates weighted_error_rates(double q, double e1, double e2) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("weighted_error_rates: q must lie in [0, 1]");
  return {q * e1 + (1.0 - q) * e2, q * e2 + (1.0 - q) * e1};
}

}  // namespace bb84
