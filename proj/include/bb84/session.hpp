#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "bb84/bits.hpp"
#include "bb84/channel.hpp"
#include "bb84/codes.hpp"
#include "bb84/protocol.hpp"
#include "bb84/rng.hpp"
#include "bb84/transcript.hpp"

namespace bb84 {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SessionStatus : std::uint8_t {
  Accepted = 0,
  AbortedErrorRate = 1,
  AbortedInsufficientSample = 2,
  AbortedConnectionLost = 3,
};

std::string_view to_string(SessionStatus s);

/// A public-channel message, or the quantum transmission (QubitsSent), whose
/// symbols travel in `qubits` while `payload` only records their count.
struct Message {
  Actor from = Actor::Alice;
  EventKind kind = EventKind::QubitsSent;
  Bytes payload;
  std::vector<QubitSymbol> qubits;
};

struct SessionConfig {
  ProtocolParams params;
  CssPair css;
};

/// What one party knows at the end of a session.
struct PartyOutcome {
  SessionStatus status = SessionStatus::AbortedConnectionLost;
  std::optional<ErrorEstimate> estimate;
  BitString key;
  std::uint64_t blocks = 0;
  std::uint64_t decode_failures = 0;
  Bytes own_digest;
  Bytes peer_digest;
};

/// Sender side of the protocol: prepares qubits, discloses bases and test
/// bits, then drives reconciliation.
class AliceEndpoint {
 public:
  AliceEndpoint(SessionConfig config, RngSeed seed);

  std::vector<Message> start();
  std::vector<Message> handle(const Message& message);

  bool finished() const { return state_ == State::Done; }
  const PartyOutcome& outcome() const { return outcome_; }
  const std::vector<QubitSymbol>& prepared() const { return symbols_; }

 private:
  enum class State { Idle, AwaitBobBases, AwaitTestIndices, AwaitEstimate, AwaitDecision, AwaitDigest, Done };

  std::vector<Message> reconcile(std::uint64_t blocks);

  SessionConfig config_;
  RngSeed seed_;
  State state_ = State::Idle;
  std::vector<QubitSymbol> symbols_;
  std::vector<Basis> bob_bases_;
  TestSelection selection_;
  PartyOutcome outcome_;
};

/// Receiver side: measures, announces bases first, picks the test sample,
/// decides, and decodes.
class BobEndpoint {
 public:
  BobEndpoint(SessionConfig config, RngSeed seed);

  std::vector<Message> handle(const Message& message);

  bool finished() const { return state_ == State::Done; }
  const PartyOutcome& outcome() const { return outcome_; }
  const std::vector<Measurement>& measurements() const { return results_; }

 private:
  enum class State { AwaitQubits, AwaitAliceBases, AwaitDisclosure, AwaitPermutation, AwaitCodewords, AwaitDigest, Done };

  SessionConfig config_;
  RngSeed seed_;
  State state_ = State::AwaitQubits;
  std::vector<Measurement> results_;
  std::vector<Basis> alice_bases_;
  TestSelection selection_;
  std::uint64_t permutation_seed_ = 0;
  PartyOutcome outcome_;
};

struct SessionDiagnostics {
  std::size_t sifted_rect = 0;
  std::size_t sifted_diag = 0;
  double retained_fraction = 0.0;
  std::optional<double> naive_rate;
};

struct SessionOutcome {
  SessionStatus status = SessionStatus::AbortedConnectionLost;
  std::optional<ErrorEstimate> estimate;
  BitString alice_key;
  BitString bob_key;
  std::uint64_t blocks = 0;
  std::uint64_t key_bits_per_block = 0;
  std::uint64_t decode_failures = 0;
  SessionTranscript transcript;
  SessionDiagnostics diagnostics;

  bool keys_match() const { return status == SessionStatus::Accepted && alice_key == bob_key; }
  std::uint64_t blocks_matched() const;
};

/// Prepare, transmit, measure, sift, estimate, then abort or reconcile, with
/// the strategy applied to the quantum transmission. Throws InvalidParams or
/// InvalidStrategy on bad input.
SessionOutcome run_session(const ProtocolParams& params, const AttackStrategy& strategy, const CssPair& css,
                           RngSeed seed);

/// The pool reordered by the permutation derived from the announced seed.
/// Reconciliation block b takes entries [b n, (b + 1) n), so a short pool is
/// truncated to whole blocks after permuting.
std::vector<std::uint32_t> permuted_positions(std::span<const std::uint32_t> pool, std::uint64_t announced_seed);

/// Untested positions where both parties used the diagonal basis, ascending.
std::vector<std::uint32_t> raw_key_positions(std::span<const Basis> alice, std::span<const Basis> bob,
                                             const TestSelection& tested);

// Payload codecs shared by the endpoints and the wire layer.
Bytes encode_bases(std::span<const Basis> bases);
std::vector<Basis> decode_bases(std::span<const std::uint8_t> payload);
Bytes encode_qubits(std::span<const QubitSymbol> qubits);
std::vector<QubitSymbol> decode_qubits(std::span<const std::uint8_t> payload);

}  // namespace bb84
