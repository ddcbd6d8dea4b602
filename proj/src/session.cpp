#include "bb84/session.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

namespace bb84 {

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Accepted: return "accepted";
    case SessionStatus::AbortedErrorRate: return "aborted_error_rate";
    case SessionStatus::AbortedInsufficientSample: return "aborted_insufficient_sample";
    case SessionStatus::AbortedConnectionLost: return "aborted_connection_lost";
  }
  return "?";
}

Bytes encode_bases(std::span<const Basis> bases) {
  BitString bits(bases.size());
  for (std::size_t i = 0; i < bases.size(); ++i) bits[i] = bases[i] == Basis::Diagonal;
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(bases.size()));
  auto packed = pack_bits(bits);
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

std::vector<Basis> decode_bases(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto n = r.u32();
  const auto bits = r.bits(n);
  r.expect_end();
  std::vector<Basis> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = bits[i] ? Basis::Diagonal : Basis::Rectilinear;
  return out;
}

Bytes encode_qubits(std::span<const QubitSymbol> qubits) {
  BitString bases(qubits.size());
  BitString bits(qubits.size());
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    bases[i] = qubits[i].basis == Basis::Diagonal;
    bits[i] = qubits[i].bit;
  }
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(qubits.size()));
  for (const auto& part : {pack_bits(bases), pack_bits(bits)}) out.insert(out.end(), part.begin(), part.end());
  return out;
}

std::vector<QubitSymbol> decode_qubits(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto n = r.u32();
  const auto bases = r.bits(n);
  const auto bits = r.bits(n);
  r.expect_end();
  std::vector<QubitSymbol> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {bases[i] ? Basis::Diagonal : Basis::Rectilinear, bits[i]};
  return out;
}

namespace {

Bytes count_payload(std::size_t n) {
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(n));
  return out;
}

Bytes encode_indices(const TestSelection& s) {
  Bytes out;
  for (const auto* list : {&s.rect, &s.diag}) {
    put_u32(out, static_cast<std::uint32_t>(list->size()));
    for (auto pos : *list) put_u32(out, pos);
  }
  return out;
}

TestSelection decode_indices(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  TestSelection s;
  for (auto* list : {&s.rect, &s.diag}) {
    const auto m = r.u32();
    list->reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) list->push_back(r.u32());
  }
  r.expect_end();
  return s;
}

Bytes encode_decision(SessionStatus status, std::uint64_t blocks) {
  Bytes out{static_cast<std::uint8_t>(status)};
  put_u32(out, static_cast<std::uint32_t>(blocks));
  return out;
}

std::pair<SessionStatus, std::uint64_t> decode_decision(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto status = r.u8();
  const auto blocks = r.u32();
  r.expect_end();
  if (status > static_cast<std::uint8_t>(SessionStatus::AbortedInsufficientSample)) {
    throw ProtocolError("decision carries an unknown status");
  }
  return {static_cast<SessionStatus>(status), blocks};
}

Bytes encode_estimate(const ErrorEstimate& e) {
  Bytes out;
  for (auto v : {e.r1, e.m1, e.r2, e.m2}) put_u32(out, static_cast<std::uint32_t>(v));
  return out;
}

Message make(Actor from, EventKind kind, Bytes payload) { return {from, kind, std::move(payload), {}}; }

void expect(const Message& m, EventKind kind, std::string_view who) {
  if (m.kind != kind) {
    throw ProtocolError(fmt::format("{} expected {} but received {}", who, to_string(kind), to_string(m.kind)));
  }
}

std::vector<Basis> bases_of(std::span<const QubitSymbol> symbols) {
  std::vector<Basis> out(symbols.size());
  std::transform(symbols.begin(), symbols.end(), out.begin(), [](const QubitSymbol& q) { return q.basis; });
  return out;
}

std::vector<Basis> bases_of(std::span<const Measurement> results) {
  std::vector<Basis> out(results.size());
  std::transform(results.begin(), results.end(), out.begin(), [](const Measurement& m) { return m.basis; });
  return out;
}

std::uint64_t block_count(std::size_t pool, const ProtocolParams& params, std::size_t n) {
  std::uint64_t blocks = pool / n;
  if (params.max_blocks > 0) blocks = std::min<std::uint64_t>(blocks, params.max_blocks);
  return blocks;
}

void check_selection(const TestSelection& s, std::span<const Basis> alice, std::span<const Basis> bob,
                     const ProtocolParams& params) {
  if (s.rect.size() != params.m1 || s.diag.size() != params.m2) throw ProtocolError("test sample has the wrong size");
  auto check = [&](const std::vector<std::uint32_t>& list, Basis basis) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto pos = list[i];
      if (pos >= alice.size() || alice[pos] != basis || bob[pos] != basis || (i > 0 && list[i - 1] >= pos)) {
        throw ProtocolError("test positions do not match the sifted classes");
      }
    }
  };
  check(s.rect, Basis::Rectilinear);
  check(s.diag, Basis::Diagonal);
}

}  // namespace

std::vector<std::uint32_t> permuted_positions(std::span<const std::uint32_t> pool, std::uint64_t announced_seed) {
  const auto perm = Permutation::random(pool.size(), announced_seed);
  std::vector<std::uint32_t> out(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) out[i] = pool[perm.mapping()[i]];
  return out;
}

std::vector<std::uint32_t> raw_key_positions(std::span<const Basis> alice, std::span<const Basis> bob,
                                             const TestSelection& tested) {
  std::vector<std::uint32_t> out;
  auto t = tested.diag.begin();
  for (std::size_t i = 0; i < alice.size() && i < bob.size(); ++i) {
    if (alice[i] != Basis::Diagonal || bob[i] != Basis::Diagonal) continue;
    while (t != tested.diag.end() && *t < i) ++t;
    if (t != tested.diag.end() && *t == i) continue;
    out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

// ---------------------------------------------------------------- Alice

AliceEndpoint::AliceEndpoint(SessionConfig config, RngSeed seed) : config_(std::move(config)), seed_(seed) {
  validate(config_.params);
}

std::vector<Message> AliceEndpoint::start() {
  if (state_ != State::Idle) throw ProtocolError("Alice already started");
  Rng bases(seed_, Stream::AliceBases);
  Rng bits(seed_, Stream::AliceBits);
  symbols_ = alice_prepare(config_.params.N, config_.params.p, bases, bits);
  state_ = State::AwaitBobBases;
  Message m = make(Actor::Alice, EventKind::QubitsSent, count_payload(symbols_.size()));
  m.qubits = symbols_;
  return {std::move(m)};
}

std::vector<Message> AliceEndpoint::handle(const Message& message) {
  switch (state_) {
    case State::AwaitBobBases: {
      expect(message, EventKind::BasesAnnouncedBob, "Alice");
      bob_bases_ = decode_bases(message.payload);
      if (bob_bases_.size() != symbols_.size()) throw ProtocolError("Bob announced the wrong number of bases");
      state_ = State::AwaitTestIndices;
      return {make(Actor::Alice, EventKind::BasesAnnouncedAlice, encode_bases(bases_of(symbols_)))};
    }
    case State::AwaitTestIndices: {
      if (message.kind == EventKind::Decision) {
        outcome_.status = decode_decision(message.payload).first;
        state_ = State::Done;
        return {};
      }
      expect(message, EventKind::TestIndices, "Alice");
      selection_ = decode_indices(message.payload);
      check_selection(selection_, bases_of(symbols_), bob_bases_, config_.params);
      BitString disclosed;
      for (const auto* list : {&selection_.rect, &selection_.diag})
        for (auto pos : *list) disclosed.push_back(symbols_[pos].bit);
      Bytes payload = count_payload(disclosed.size());
      auto packed = pack_bits(disclosed);
      payload.insert(payload.end(), packed.begin(), packed.end());
      state_ = State::AwaitEstimate;
      return {make(Actor::Alice, EventKind::TestDisclosure, std::move(payload))};
    }
    case State::AwaitEstimate: {
      expect(message, EventKind::Estimate, "Alice");
      ByteReader r(message.payload);
      const auto r1 = r.u32(), m1 = r.u32(), r2 = r.u32(), m2 = r.u32();
      r.expect_end();
      if (m1 != selection_.rect.size() || m2 != selection_.diag.size() || r1 > m1 || r2 > m2) {
        throw ProtocolError("estimate is inconsistent with the test sample");
      }
      outcome_.estimate = make_estimate(r1, m1, r2, m2, selection_);
      state_ = State::AwaitDecision;
      return {};
    }
    case State::AwaitDecision: {
      expect(message, EventKind::Decision, "Alice");
      const auto [status, blocks] = decode_decision(message.payload);
      outcome_.status = status;
      if (status != SessionStatus::Accepted) {
        state_ = State::Done;
        return {};
      }
      if (outcome_.estimate && !passes_error_check(*outcome_.estimate, config_.params)) {
        throw ProtocolError("Bob accepted a session that fails the error check");
      }
      return reconcile(blocks);
    }
    case State::AwaitDigest: {
      expect(message, EventKind::KeyDigest, "Alice");
      outcome_.peer_digest = message.payload;
      state_ = State::Done;
      return {make(Actor::Alice, EventKind::KeyDigest, outcome_.own_digest)};
    }
    case State::Idle:
    case State::Done: break;
  }
  throw ProtocolError(fmt::format("Alice received {} outside of a session", to_string(message.kind)));
}

std::vector<Message> AliceEndpoint::reconcile(std::uint64_t blocks) {
  const auto& css = config_.css;
  const std::size_t n = css.n();
  const auto raw_pool = raw_key_positions(bases_of(symbols_), bob_bases_, selection_);
  if (blocks == 0 || blocks != block_count(raw_pool.size(), config_.params, n)) {
    throw ProtocolError("Bob's block count does not match the untested key material");
  }

  const std::uint64_t perm_seed = Rng(seed_, Stream::Permutation).next();
  const auto pool = permuted_positions(raw_pool, perm_seed);
  Rng codeword_rng(seed_, Stream::Codeword);
  BitString announcement;
  announcement.reserve(blocks * n);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    BitString v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = symbols_[pool[b * n + i]].bit;
    const auto rec = reconcile_alice(css, v, codeword_rng);
    announcement.insert(announcement.end(), rec.announcement.begin(), rec.announcement.end());
    outcome_.key.insert(outcome_.key.end(), rec.key.begin(), rec.key.end());
  }
  outcome_.blocks = blocks;
  outcome_.own_digest = key_digest(outcome_.key);

  Bytes seed_payload;
  put_u64(seed_payload, perm_seed);
  Bytes ann_payload;
  put_u32(ann_payload, static_cast<std::uint32_t>(blocks));
  put_u32(ann_payload, static_cast<std::uint32_t>(n));
  auto packed = pack_bits(announcement);
  ann_payload.insert(ann_payload.end(), packed.begin(), packed.end());

  state_ = State::AwaitDigest;
  return {make(Actor::Alice, EventKind::PermutationSeed, std::move(seed_payload)),
          make(Actor::Alice, EventKind::CodewordAnnouncement, std::move(ann_payload))};
}

// ---------------------------------------------------------------- Bob

BobEndpoint::BobEndpoint(SessionConfig config, RngSeed seed) : config_(std::move(config)), seed_(seed) {
  validate(config_.params);
}

std::vector<Message> BobEndpoint::handle(const Message& message) {
  const auto& params = config_.params;
  switch (state_) {
    case State::AwaitQubits: {
      expect(message, EventKind::QubitsSent, "Bob");
      if (message.qubits.size() != params.N) throw ProtocolError("received an unexpected number of qubits");
      Rng bases(seed_, Stream::BobBases);
      Rng outcomes(seed_, Stream::BobOutcomes);
      results_ = bob_measure(message.qubits, params.p, bases, outcomes);
      state_ = State::AwaitAliceBases;
      // Bases go out only after every measurement is recorded.
      return {make(Actor::Bob, EventKind::BasesAnnouncedBob, encode_bases(bases_of(results_)))};
    }
    case State::AwaitAliceBases: {
      expect(message, EventKind::BasesAnnouncedAlice, "Bob");
      alice_bases_ = decode_bases(message.payload);
      if (alice_bases_.size() != results_.size()) throw ProtocolError("Alice announced the wrong number of bases");
      std::vector<std::uint32_t> rect, diag;
      for (std::size_t i = 0; i < results_.size(); ++i) {
        if (alice_bases_[i] != results_[i].basis) continue;
        (results_[i].basis == Basis::Rectilinear ? rect : diag).push_back(static_cast<std::uint32_t>(i));
      }
      Rng rng(seed_, Stream::TestSelection);
      auto selection = select_test_positions(rect, diag, params.m1, params.m2, rng);
      if (!selection) {
        outcome_.status = SessionStatus::AbortedInsufficientSample;
        state_ = State::Done;
        return {make(Actor::Bob, EventKind::Decision, encode_decision(outcome_.status, 0))};
      }
      selection_ = std::move(*selection);
      state_ = State::AwaitDisclosure;
      return {make(Actor::Bob, EventKind::TestIndices, encode_indices(selection_))};
    }
    case State::AwaitDisclosure: {
      expect(message, EventKind::TestDisclosure, "Bob");
      ByteReader r(message.payload);
      const auto count = r.u32();
      if (count != selection_.rect.size() + selection_.diag.size()) throw ProtocolError("disclosure has the wrong size");
      const auto disclosed = r.bits(count);
      r.expect_end();
      std::uint64_t r1 = 0, r2 = 0;
      std::size_t i = 0;
      for (auto pos : selection_.rect) r1 += disclosed[i++] != results_[pos].bit;
      for (auto pos : selection_.diag) r2 += disclosed[i++] != results_[pos].bit;
      outcome_.estimate = make_estimate(r1, params.m1, r2, params.m2, selection_);

      std::vector<Message> out{make(Actor::Bob, EventKind::Estimate, encode_estimate(*outcome_.estimate))};
      if (!passes_error_check(*outcome_.estimate, params)) {
        outcome_.status = SessionStatus::AbortedErrorRate;
        state_ = State::Done;
        out.push_back(make(Actor::Bob, EventKind::Decision, encode_decision(outcome_.status, 0)));
        return out;
      }
      const auto pool = raw_key_positions(alice_bases_, bases_of(results_), selection_);
      const auto blocks = block_count(pool.size(), params, config_.css.n());
      if (blocks == 0) {
        outcome_.status = SessionStatus::AbortedInsufficientSample;
        state_ = State::Done;
      } else {
        outcome_.status = SessionStatus::Accepted;
        outcome_.blocks = blocks;
        state_ = State::AwaitPermutation;
      }
      out.push_back(make(Actor::Bob, EventKind::Decision, encode_decision(outcome_.status, blocks)));
      return out;
    }
    case State::AwaitPermutation: {
      expect(message, EventKind::PermutationSeed, "Bob");
      ByteReader r(message.payload);
      permutation_seed_ = r.u64();
      r.expect_end();
      state_ = State::AwaitCodewords;
      return {};
    }
    case State::AwaitCodewords: {
      expect(message, EventKind::CodewordAnnouncement, "Bob");
      const auto& css = config_.css;
      const std::size_t n = css.n();
      ByteReader r(message.payload);
      const auto blocks = r.u32();
      const auto block_len = r.u32();
      if (blocks != outcome_.blocks || block_len != n) throw ProtocolError("announcement does not match the block plan");
      const auto announcement = r.bits(static_cast<std::size_t>(blocks) * n);
      r.expect_end();

      const auto pool =
          permuted_positions(raw_key_positions(alice_bases_, bases_of(results_), selection_), permutation_seed_);
      for (std::uint64_t b = 0; b < blocks; ++b) {
        BitString w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = results_[pool[b * n + i]].bit;
        const std::span<const std::uint8_t> ann(announcement.data() + b * n, n);
        auto key = reconcile_bob(css, w, ann);
        if (!key) {
          ++outcome_.decode_failures;
          key = BitString(css.k, 0);
        }
        outcome_.key.insert(outcome_.key.end(), key->begin(), key->end());
      }
      outcome_.own_digest = key_digest(outcome_.key);
      state_ = State::AwaitDigest;
      return {make(Actor::Bob, EventKind::KeyDigest, outcome_.own_digest)};
    }
    case State::AwaitDigest: {
      expect(message, EventKind::KeyDigest, "Bob");
      outcome_.peer_digest = message.payload;
      state_ = State::Done;
      return {};
    }
    case State::Done: break;
  }
  throw ProtocolError(fmt::format("Bob received {} after the session ended", to_string(message.kind)));
}

// ---------------------------------------------------------------- driver

std::uint64_t SessionOutcome::blocks_matched() const {
  if (status != SessionStatus::Accepted || key_bits_per_block == 0) return 0;
  std::uint64_t matched = 0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto off = b * key_bits_per_block;
    if (std::equal(alice_key.begin() + off, alice_key.begin() + off + key_bits_per_block, bob_key.begin() + off)) {
      ++matched;
    }
  }
  return matched;
}

SessionOutcome run_session(const ProtocolParams& params, const AttackStrategy& strategy, const CssPair& css,
                           RngSeed seed) {
  validate(params);
  validate(strategy);
  const SessionConfig config{params, css};
  AliceEndpoint alice(config, seed);
  BobEndpoint bob(config, seed);
  Rng channel_rng(seed, channel_stream(strategy));

  SessionOutcome out;
  std::deque<Message> pending;
  for (auto& m : alice.start()) pending.push_back(std::move(m));
  while (!pending.empty()) {
    Message m = std::move(pending.front());
    pending.pop_front();
    out.transcript.append(m.from, m.kind, m.payload);
    std::vector<Message> replies;
    if (m.from == Actor::Alice) {
      if (m.kind == EventKind::QubitsSent) m.qubits = transmit(m.qubits, strategy, channel_rng);
      replies = bob.handle(m);
    } else {
      replies = alice.handle(m);
    }
    for (auto& r : replies) pending.push_back(std::move(r));
  }
  if (!alice.finished() || !bob.finished()) throw ProtocolError("session stalled before both parties finished");

  const auto& bob_view = bob.outcome();
  out.status = bob_view.status;
  out.estimate = bob_view.estimate;
  out.alice_key = alice.outcome().key;
  out.bob_key = bob_view.key;
  out.blocks = bob_view.blocks;
  out.key_bits_per_block = css.k;
  out.decode_failures = bob_view.decode_failures;

  const auto sifted = sift(alice.prepared(), bob.measurements());
  out.diagnostics.sifted_rect = sifted.both_rect.size();
  out.diagnostics.sifted_diag = sifted.both_diag.size();
  out.diagnostics.retained_fraction = sifted.retained_fraction();
  if (sifted.retained() > 0) {
    Rng naive_rng(seed, Stream::NaiveSample);
    out.diagnostics.naive_rate = naive_estimate(sifted, params.m1 + params.m2, naive_rng);
  }
  return out;
}

}  // namespace bb84
