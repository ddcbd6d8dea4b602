#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "bb84/session.hpp"
#include "bb84/transcript.hpp"
#include "bb84/wire.hpp"

namespace bb84::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Timeout = std::chrono::milliseconds;
inline constexpr Timeout kDefaultTimeout{60'000};

struct Address {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port"; an empty host means 127.0.0.1.
Address parse_address(const std::string& text);

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

class Listener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  static Listener open(const Address& address);

  std::uint16_t port() const { return port_; }
  Socket accept(Timeout timeout = kDefaultTimeout);
  void close() { socket_.close(); }

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

/// Retries refused connections until the timeout, so peers may start in any
/// order.
Socket connect(const Address& address, Timeout timeout = kDefaultTimeout);

/// Blocking framed stream.
class Connection {
 public:
  explicit Connection(Socket socket) : socket_(std::move(socket)) {}

  void send(const wire::Frame& frame);
  /// nullopt when the peer closed the stream cleanly between frames.
  std::optional<wire::Frame> receive(Timeout timeout = kDefaultTimeout);
  /// Frame already buffered, without touching the socket.
  std::optional<wire::Frame> buffered() { return decoder_.next(); }
  /// Reads whatever is available; false on end of stream.
  bool pump();
  void shutdown_write();

  int fd() const { return socket_.fd(); }

 private:
  Socket socket_;
  wire::FrameDecoder decoder_;
};

struct EndpointResult {
  PartyOutcome outcome;
  SessionTranscript transcript;
  std::string error;  // empty when the session ran to completion
};

struct RelayResult {
  SessionTranscript transcript;
  std::string error;
};

/// Exchanges hello frames, then runs the endpoint state machine over the
/// connection. Connection loss is reported as AbortedConnectionLost; a
/// configuration hash mismatch refuses the session before any qubits move.
EndpointResult run_alice(const SessionConfig& config, RngSeed seed, std::span<const std::uint8_t> config_hash,
                         Connection& peer, Timeout timeout = kDefaultTimeout);
EndpointResult run_bob(const SessionConfig& config, RngSeed seed, std::span<const std::uint8_t> config_hash,
                       Connection& peer, Timeout timeout = kDefaultTimeout);

/// Forwards frames between the two endpoints, applying the strategy to the
/// qubit frame and logging every message.
RelayResult run_relay(const AttackStrategy& strategy, RngSeed seed, std::span<const std::uint8_t> config_hash,
                      Connection& alice, Connection& bob, Timeout timeout = kDefaultTimeout);

}  // namespace bb84::net
