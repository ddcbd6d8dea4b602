#include "bb84/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <thread>

#include <fmt/format.h>

namespace bb84::net {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void fail(std::string_view what) { throw NetError(fmt::format("{}: {}", what, std::strerror(errno))); }

sockaddr_in resolve(const Address& address) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(address.port);
  const std::string host = address.host.empty() ? "127.0.0.1" : address.host;
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) == 1) return sa;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw NetError(fmt::format("cannot resolve host '{}'", host));
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return sa;
}

int wait_readable(int fd, Timeout timeout) {
  pollfd p{fd, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  } while (rc < 0 && errno == EINTR);
  if (rc < 0) fail("poll");
  return rc;
}

}  // namespace

Address parse_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw NetError(fmt::format("expected host:port, got '{}'", text));
  Address a;
  a.host = text.substr(0, colon);
  const auto port_text = text.substr(colon + 1);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw NetError(fmt::format("invalid port in '{}'", text));
  }
  if (port > 65535) throw NetError(fmt::format("invalid port in '{}'", text));
  a.port = static_cast<std::uint16_t>(port);
  return a;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

Listener Listener::open(const Address& address) {
  Listener l;
  l.socket_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!l.socket_.valid()) fail("socket");
  const int one = 1;
  ::setsockopt(l.socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto sa = resolve(address);
  if (::bind(l.socket_.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
    fail(fmt::format("bind {}:{}", address.host, address.port));
  }
  if (::listen(l.socket_.fd(), 4) < 0) fail("listen");
  socklen_t len = sizeof sa;
  if (::getsockname(l.socket_.fd(), reinterpret_cast<sockaddr*>(&sa), &len) < 0) fail("getsockname");
  l.port_ = ntohs(sa.sin_port);
  return l;
}

Socket Listener::accept(Timeout timeout) {
  if (wait_readable(socket_.fd(), timeout) == 0) throw NetError("timed out waiting for a peer to connect");
  Socket s(::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
  if (!s.valid()) fail("accept");
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

Socket connect(const Address& address, Timeout timeout) {
  const auto deadline = Clock::now() + timeout;
  const auto sa = resolve(address);
  while (true) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) fail("socket");
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    if ((errno != ECONNREFUSED && errno != EINTR) || Clock::now() >= deadline) {
      fail(fmt::format("connect {}:{}", address.host, address.port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

void Connection::send(const wire::Frame& frame) {
  const auto bytes = wire::encode_frame(frame);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(socket_.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool Connection::pump() {
  std::array<std::uint8_t, 1 << 16> buf;
  ssize_t n;
  do {
    n = ::recv(socket_.fd(), buf.data(), buf.size(), 0);
  } while (n < 0 && errno == EINTR);
  if (n < 0) {
    if (errno == ECONNRESET) return false;
    fail("recv");
  }
  if (n == 0) return false;
  decoder_.feed({buf.data(), static_cast<std::size_t>(n)});
  return true;
}

std::optional<wire::Frame> Connection::receive(Timeout timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (auto f = decoder_.next()) return f;
    const auto left = std::chrono::duration_cast<Timeout>(deadline - Clock::now());
    if (left.count() <= 0 || wait_readable(socket_.fd(), left) == 0) throw NetError("timed out waiting for a frame");
    if (!pump()) {
      if (!decoder_.idle()) throw NetError("connection closed in the middle of a frame");
      return std::nullopt;
    }
  }
}

void Connection::shutdown_write() { ::shutdown(socket_.fd(), SHUT_WR); }

namespace {

void check_hash(const wire::Hello& hello, std::span<const std::uint8_t> expected) {
  if (!std::equal(hello.config_hash.begin(), hello.config_hash.end(), expected.begin(), expected.end())) {
    throw NetError("configuration hash mismatch; refusing to start the session");
  }
}

wire::Hello receive_hello(Connection& c, Timeout timeout) {
  auto f = c.receive(timeout);
  if (!f) throw NetError("peer closed the connection during the handshake");
  return wire::decode_hello(*f);
}

template <typename Endpoint>
void drive(Endpoint& endpoint, std::vector<Message> initial, Actor peer_actor, Connection& peer, Timeout timeout,
           EndpointResult& result) {
  auto send_all = [&](std::vector<Message> messages) {
    for (auto& m : messages) {
      result.transcript.append(m.from, m.kind, m.payload);
      peer.send(wire::to_frame(m));
    }
  };
  send_all(std::move(initial));
  while (!endpoint.finished()) {
    auto frame = peer.receive(timeout);
    if (!frame) throw NetError("peer closed the connection before the session finished");
    const auto message = wire::from_frame(*frame, peer_actor);
    result.transcript.append(message.from, message.kind, message.payload);
    send_all(endpoint.handle(message));
  }
}

template <typename Body>
EndpointResult guarded(Body body) {
  EndpointResult result;
  try {
    body(result);
  } catch (const std::exception& ex) {
    result.error = ex.what();
    result.outcome.status = SessionStatus::AbortedConnectionLost;
  }
  return result;
}

}  // namespace

EndpointResult run_alice(const SessionConfig& config, RngSeed seed, std::span<const std::uint8_t> config_hash,
                         Connection& peer, Timeout timeout) {
  return guarded([&](EndpointResult& result) {
    AliceEndpoint alice(config, seed);
    peer.send(wire::encode_hello(wire::Role::Alice, config_hash));
    check_hash(receive_hello(peer, timeout), config_hash);
    drive(alice, alice.start(), Actor::Bob, peer, timeout, result);
    result.outcome = alice.outcome();
  });
}

EndpointResult run_bob(const SessionConfig& config, RngSeed seed, std::span<const std::uint8_t> config_hash,
                       Connection& peer, Timeout timeout) {
  return guarded([&](EndpointResult& result) {
    BobEndpoint bob(config, seed);
    check_hash(receive_hello(peer, timeout), config_hash);
    peer.send(wire::encode_hello(wire::Role::Bob, config_hash));
    drive(bob, {}, Actor::Alice, peer, timeout, result);
    result.outcome = bob.outcome();
  });
}

RelayResult run_relay(const AttackStrategy& strategy, RngSeed seed, std::span<const std::uint8_t> config_hash,
                      Connection& alice, Connection& bob, Timeout timeout) {
  RelayResult result;
  try {
    validate(strategy);
    check_hash(receive_hello(alice, timeout), config_hash);
    bob.send(wire::encode_hello(wire::Role::Relay, config_hash));
    check_hash(receive_hello(bob, timeout), config_hash);
    alice.send(wire::encode_hello(wire::Role::Relay, config_hash));

    Rng channel_rng(seed, channel_stream(strategy));
    struct Side {
      Connection* conn;
      Connection* other;
      Actor actor;
      bool open = true;
    };
    std::array<Side, 2> sides{{{&alice, &bob, Actor::Alice}, {&bob, &alice, Actor::Bob}}};

    auto forward = [&](Side& side, const wire::Frame& frame) {
      auto message = wire::from_frame(frame, side.actor);
      result.transcript.append(message.from, message.kind, message.payload);
      if (message.kind == EventKind::QubitsSent) {
        if (side.actor != Actor::Alice) throw NetError("qubits may only travel from Alice to Bob");
        message.qubits = transmit(message.qubits, strategy, channel_rng);
      }
      side.other->send(wire::to_frame(message));
    };

    while (sides[0].open || sides[1].open) {
      std::array<pollfd, 2> fds{};
      for (std::size_t i = 0; i < 2; ++i) fds[i] = {sides[i].open ? sides[i].conn->fd() : -1, POLLIN, 0};
      int rc;
      do {
        rc = ::poll(fds.data(), fds.size(), static_cast<int>(timeout.count()));
      } while (rc < 0 && errno == EINTR);
      if (rc < 0) fail("poll");
      if (rc == 0) throw NetError("relay timed out waiting for traffic");
      for (std::size_t i = 0; i < 2; ++i) {
        auto& side = sides[i];
        if (!side.open || fds[i].revents == 0) continue;
        const bool alive = side.conn->pump();
        while (auto frame = side.conn->buffered()) forward(side, *frame);
        if (!alive) {
          side.open = false;
          side.other->shutdown_write();
        }
      }
    }
  } catch (const std::exception& ex) {
    result.error = ex.what();
  }
  return result;
}

}  // namespace bb84::net
