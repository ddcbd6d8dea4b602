#include "bb84/wire.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace bb84::wire {

Bytes encode_frame(const Frame& frame) {
  if (frame.payload.size() + 1 > kMaxFrameLength) throw WireError("frame too large");
  Bytes out;
  out.reserve(frame.payload.size() + 5);
  put_u32(out, static_cast<std::uint32_t>(frame.payload.size() + 1));
  out.push_back(frame.tag);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

std::optional<Frame> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const std::uint32_t length = (std::uint32_t{buffer_[0]} << 24) | (std::uint32_t{buffer_[1]} << 16) |
                               (std::uint32_t{buffer_[2]} << 8) | std::uint32_t{buffer_[3]};
  if (length == 0 || length > kMaxFrameLength) throw WireError(fmt::format("invalid frame length {}", length));
  const std::uint8_t tag = buffer_.size() > 4 ? buffer_[4] : 0;
  if (buffer_.size() > 4 && tag != kHelloTag && !event_kind_from_tag(tag)) {
    throw WireError(fmt::format("unknown message tag {:#04x}", tag));
  }
  if (buffer_.size() < 4 + std::size_t{length}) return std::nullopt;
  Frame f{tag, Bytes(buffer_.begin() + 5, buffer_.begin() + 4 + length)};
  buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + length);
  return f;
}

Frame encode_hello(Role role, std::span<const std::uint8_t> config_hash) {
  Bytes payload(2 + config_hash.size());
  payload[0] = kProtocolVersion;
  payload[1] = static_cast<std::uint8_t>(role);
  std::copy(config_hash.begin(), config_hash.end(), payload.begin() + 2);
  return {kHelloTag, std::move(payload)};
}

Hello decode_hello(const Frame& frame) {
  if (frame.tag != kHelloTag) throw WireError("expected a hello frame");
  if (frame.payload.size() != 2 + 32) throw WireError("hello frame has the wrong size");
  Hello h;
  h.version = frame.payload[0];
  if (h.version != kProtocolVersion) throw WireError(fmt::format("unsupported protocol version {}", h.version));
  if (frame.payload[1] > static_cast<std::uint8_t>(Role::Relay)) throw WireError("hello frame names an unknown role");
  h.role = static_cast<Role>(frame.payload[1]);
  h.config_hash.assign(frame.payload.begin() + 2, frame.payload.end());
  return h;
}

Frame to_frame(const Message& message) {
  const auto tag = static_cast<std::uint8_t>(message.kind);
  if (message.kind == EventKind::QubitsSent) return {tag, encode_qubits(message.qubits)};
  return {tag, message.payload};
}

Message from_frame(const Frame& frame, Actor sender) {
  const auto kind = event_kind_from_tag(frame.tag);
  if (!kind) throw WireError(fmt::format("frame tag {:#04x} is not a protocol message", frame.tag));
  Message m{sender, *kind, frame.payload, {}};
  if (*kind == EventKind::QubitsSent) {
    try {
      m.qubits = decode_qubits(frame.payload);
    } catch (const std::exception& ex) {
      throw WireError(fmt::format("malformed qubit frame: {}", ex.what()));
    }
    m.payload.clear();
    put_u32(m.payload, static_cast<std::uint32_t>(m.qubits.size()));
  }
  return m;
}

}  // namespace bb84::wire
