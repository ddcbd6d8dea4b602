#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "bb84/bits.hpp"
#include "bb84/session.hpp"

namespace bb84::wire {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint8_t kHelloTag = 0x00;
constexpr std::uint8_t kProtocolVersion = 0x01;
/// Covers the tag and payload; generous enough for N = 2^32 - 1 qubits.
constexpr std::uint32_t kMaxFrameLength = (1u << 30) + 16;

/// Length (4 bytes, big endian, counts tag + payload), tag, payload.
struct Frame {
  std::uint8_t tag = 0;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

Bytes encode_frame(const Frame& frame);

/// Accumulates stream bytes and yields complete frames. Throws WireError on an
/// impossible length or a tag that is neither hello nor a transcript kind.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Frame> next();
  bool idle() const { return buffer_.empty(); }

 private:
  Bytes buffer_;
};

enum class Role : std::uint8_t { Alice = 0, Bob = 1, Relay = 2 };

struct Hello {
  std::uint8_t version = kProtocolVersion;
  Role role = Role::Alice;
  Bytes config_hash;
};

Frame encode_hello(Role role, std::span<const std::uint8_t> config_hash);
Hello decode_hello(const Frame& frame);

/// QubitsSent frames carry the symbols; every other kind carries its
/// transcript payload unchanged.
Frame to_frame(const Message& message);
Message from_frame(const Frame& frame, Actor sender);

}  // namespace bb84::wire
