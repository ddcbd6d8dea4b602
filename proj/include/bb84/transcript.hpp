#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bb84/bits.hpp"

namespace bb84 {

enum class Actor : std::uint8_t { Alice = 0, Bob = 1, Channel = 2 };

/// Values double as wire tags.
enum class EventKind : std::uint8_t {
  QubitsSent = 1,
  BasesAnnouncedBob = 2,
  BasesAnnouncedAlice = 3,
  TestIndices = 4,
  TestDisclosure = 5,
  Estimate = 6,
  Decision = 7,
  CodewordAnnouncement = 8,
  PermutationSeed = 9,
  KeyDigest = 10,
};

std::string_view to_string(Actor a);
std::string_view to_string(EventKind k);
std::optional<Actor> parse_actor(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<EventKind> event_kind_from_tag(std::uint8_t tag);

struct TranscriptEvent {
  std::uint64_t seq = 0;
  Actor actor = Actor::Alice;
  EventKind kind = EventKind::QubitsSent;
  Bytes payload;

  friend bool operator==(const TranscriptEvent&, const TranscriptEvent&) = default;
};

/// Ordered record of the public-channel messages of one session.
class SessionTranscript {
 public:
  void append(Actor actor, EventKind kind, Bytes payload);
  void push(TranscriptEvent event);

  const std::vector<TranscriptEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  const TranscriptEvent* find(EventKind kind) const;

  /// Sequence numbers strictly increase and Bob's basis announcement comes
  /// before Alice's.
  bool well_ordered() const;

  friend bool operator==(const SessionTranscript&, const SessionTranscript&) = default;

 private:
  std::vector<TranscriptEvent> events_;
};

}  // namespace bb84
