#include "bb84/transcript.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace bb84 {

namespace {
constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKindNames{{
    {EventKind::QubitsSent, "QubitsSent"},
    {EventKind::BasesAnnouncedBob, "BasesAnnouncedBob"},
    {EventKind::BasesAnnouncedAlice, "BasesAnnouncedAlice"},
    {EventKind::TestIndices, "TestIndices"},
    {EventKind::TestDisclosure, "TestDisclosure"},
    {EventKind::Estimate, "Estimate"},
    {EventKind::Decision, "Decision"},
    {EventKind::CodewordAnnouncement, "CodewordAnnouncement"},
    {EventKind::PermutationSeed, "PermutationSeed"},
    {EventKind::KeyDigest, "KeyDigest"},
}};
}  // namespace

std::string_view to_string(Actor a) {
  switch (a) {
    case Actor::Alice: return "alice";
    case Actor::Bob: return "bob";
    case Actor::Channel: return "channel";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<Actor> parse_actor(std::string_view s) {
  if (s == "alice") return Actor::Alice;
  if (s == "bob") return Actor::Bob;
  if (s == "channel") return Actor::Channel;
  return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::optional<EventKind> event_kind_from_tag(std::uint8_t tag) {
  for (const auto& entry : kKindNames)
    if (static_cast<std::uint8_t>(entry.first) == tag) return entry.first;
  return std::nullopt;
}

void SessionTranscript::append(Actor actor, EventKind kind, Bytes payload) {
  const std::uint64_t seq = events_.empty() ? 0 : events_.back().seq + 1;
  events_.push_back({seq, actor, kind, std::move(payload)});
}

void SessionTranscript::push(TranscriptEvent event) {
  if (!events_.empty() && event.seq <= events_.back().seq) {
    throw std::invalid_argument("transcript sequence numbers must increase");
  }
  events_.push_back(std::move(event));
}

const TranscriptEvent* SessionTranscript::find(EventKind kind) const {
  for (const auto& e : events_)
    if (e.kind == kind) return &e;
  return nullptr;
}

bool SessionTranscript::well_ordered() const {
  for (std::size_t i = 1; i < events_.size(); ++i)
    if (events_[i].seq <= events_[i - 1].seq) return false;
  const auto* bob = find(EventKind::BasesAnnouncedBob);
  const auto* alice = find(EventKind::BasesAnnouncedAlice);
  if (alice && (!bob || bob->seq >= alice->seq)) return false;
  return true;
}

}  // namespace bb84
