#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "bb84/config.hpp"
#include "bb84/net.hpp"
#include "bb84/session.hpp"
#include "bb84/transcript_io.hpp"
#include "bb84/wire.hpp"

namespace bb84 {
namespace {

ProtocolParams small_params() { return ProtocolParams::with_test_size(30000, 0.1, 200); }

TEST(Session, PassiveSessionsAgree) {
  const auto css = steane_pair();
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto out = run_session(small_params(), Passive{}, css, RngSeed{s});
    ASSERT_EQ(out.status, SessionStatus::Accepted);
    EXPECT_TRUE(out.keys_match());
    EXPECT_GT(out.blocks, 0u);
    EXPECT_EQ(out.alice_key.size(), out.blocks * css.k);
    EXPECT_EQ(out.blocks_matched(), out.blocks);
    EXPECT_EQ(out.decode_failures, 0u);
    EXPECT_TRUE(out.transcript.well_ordered());
    const auto* a = out.transcript.find(EventKind::KeyDigest);
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->payload, key_digest(out.alice_key));
  }
}

TEST(Session, InterceptResendAborts) {
  const auto out = run_session(small_params(), BiasedInterceptResend{0, 1}, steane_pair(), RngSeed{3});
  EXPECT_EQ(out.status, SessionStatus::AbortedErrorRate);
  ASSERT_TRUE(out.estimate);
  EXPECT_GT(out.estimate->e1, 0.3);
  EXPECT_EQ(out.estimate->r2, 0u);
  EXPECT_TRUE(out.alice_key.empty());
  EXPECT_EQ(out.transcript.find(EventKind::CodewordAnnouncement), nullptr);
}

TEST(Session, InsufficientSampleAbortsBeforeTesting) {
  auto params = small_params();
  params.m2 = 29000;  // more than the diagonal class can hold
  const auto out = run_session(params, Passive{}, steane_pair(), RngSeed{4});
  EXPECT_EQ(out.status, SessionStatus::AbortedInsufficientSample);
  EXPECT_FALSE(out.estimate);
  EXPECT_EQ(out.transcript.find(EventKind::TestIndices), nullptr);
}

TEST(Session, MaxBlocksTruncates) {
  auto params = small_params();
  params.max_blocks = 3;
  const auto out = run_session(params, Passive{}, steane_pair(), RngSeed{5});
  EXPECT_EQ(out.blocks, 3u);
  EXPECT_EQ(out.alice_key.size(), 3u);
}

TEST(Session, DeterministicGivenSeed) {
  const auto strategy = DepolarizingPauli::symmetric(0.01);
  const auto a = run_session(small_params(), strategy, steane_pair(), RngSeed{9});
  const auto b = run_session(small_params(), strategy, steane_pair(), RngSeed{9});
  const auto c = run_session(small_params(), strategy, steane_pair(), RngSeed{10});
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.bob_key, b.bob_key);
  EXPECT_FALSE(a.transcript == c.transcript);
}

TEST(Session, RawKeyPositionsSkipTestedAndMismatched) {
  using B = Basis;
  std::vector<B> alice{B::Diagonal, B::Diagonal, B::Rectilinear, B::Diagonal, B::Diagonal};
  std::vector<B> bob{B::Diagonal, B::Rectilinear, B::Rectilinear, B::Diagonal, B::Diagonal};
  TestSelection tested{{2}, {3}};
  EXPECT_EQ(raw_key_positions(alice, bob, tested), (std::vector<std::uint32_t>{0, 4}));
  std::vector<std::uint32_t> pool{0, 4, 7, 9};
  auto shuffled = permuted_positions(pool, 42);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, pool);
}

TEST(Endpoints, RejectOutOfOrderMessages) {
  const SessionConfig config{small_params(), steane_pair()};
  AliceEndpoint alice(config, RngSeed{1});
  alice.start();
  Message bogus{Actor::Bob, EventKind::Estimate, {}, {}};
  EXPECT_THROW(alice.handle(bogus), ProtocolError);
  BobEndpoint bob(config, RngSeed{1});
  EXPECT_THROW(bob.handle(bogus), ProtocolError);
}

TEST(TranscriptIo, RoundTripAndReplay) {
  const auto out = run_session(small_params(), Passive{}, steane_pair(), RngSeed{12});
  std::stringstream buf;
  write_transcript(buf, out.transcript);
  const auto text = buf.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(out.transcript.size()));
  const auto back = read_transcript(buf);
  EXPECT_EQ(back, out.transcript);
  // Replaying the stored inputs reproduces the file byte for byte.
  std::stringstream again;
  write_transcript(again, run_session(small_params(), Passive{}, steane_pair(), RngSeed{12}).transcript);
  EXPECT_EQ(again.str(), text);
}

TEST(TranscriptIo, RejectsMalformedLines) {
  std::stringstream bad(R"({"actor":"eve","kind":"Estimate","payload":"","seq":0})");
  EXPECT_THROW(read_transcript(bad), std::runtime_error);
  std::stringstream out_of_order(
      "{\"actor\":\"bob\",\"kind\":\"Estimate\",\"payload\":\"\",\"seq\":3}\n"
      "{\"actor\":\"bob\",\"kind\":\"Estimate\",\"payload\":\"\",\"seq\":2}\n");
  EXPECT_THROW(read_transcript(out_of_order), std::runtime_error);
}

TEST(Transcript, OrderingCheck) {
  SessionTranscript t;
  t.append(Actor::Alice, EventKind::BasesAnnouncedAlice, {});
  t.append(Actor::Bob, EventKind::BasesAnnouncedBob, {});
  EXPECT_FALSE(t.well_ordered());
}

TEST(Wire, FrameRoundTrip) {
  const wire::Frame f{static_cast<std::uint8_t>(EventKind::Estimate), {1, 2, 3}};
  const auto bytes = wire::encode_frame(f);
  ASSERT_EQ(bytes.size(), 8u);
  EXPECT_EQ(bytes[3], 4);  // tag + 3 payload bytes
  wire::FrameDecoder d;
  d.feed({bytes.data(), 5});
  EXPECT_FALSE(d.next());
  d.feed({bytes.data() + 5, 3});
  EXPECT_EQ(d.next(), f);
  EXPECT_TRUE(d.idle());
}

TEST(Wire, RejectsUnknownTagsAndBadLengths) {
  wire::FrameDecoder unknown;
  unknown.feed(std::vector<std::uint8_t>{0, 0, 0, 1, 0x42});
  EXPECT_THROW(unknown.next(), wire::WireError);
  wire::FrameDecoder empty;
  empty.feed(std::vector<std::uint8_t>{0, 0, 0, 0});
  EXPECT_THROW(empty.next(), wire::WireError);
  wire::FrameDecoder huge;
  huge.feed(std::vector<std::uint8_t>{0xff, 0xff, 0xff, 0xff, 1});
  EXPECT_THROW(huge.next(), wire::WireError);
  EXPECT_THROW(wire::from_frame({0x00, {}}, Actor::Alice), wire::WireError);
  EXPECT_THROW(wire::from_frame({1, {0, 0, 0, 9, 0}}, Actor::Alice), wire::WireError);
}

TEST(Wire, HelloAndQubitFrames) {
  const Bytes hash(32, 7);
  const auto hello = wire::decode_hello(wire::encode_hello(wire::Role::Relay, hash));
  EXPECT_EQ(hello.role, wire::Role::Relay);
  EXPECT_EQ(hello.config_hash, hash);
  auto bad_version = wire::encode_hello(wire::Role::Alice, hash);
  bad_version.payload[0] = 2;
  EXPECT_THROW(wire::decode_hello(bad_version), wire::WireError);

  Message m{Actor::Alice, EventKind::QubitsSent, {0, 0, 0, 3}, {{Basis::Diagonal, 1}, {Basis::Rectilinear, 0}, {Basis::Diagonal, 0}}};
  const auto frame = wire::to_frame(m);
  EXPECT_EQ(frame.payload, (Bytes{0, 0, 0, 3, 0b10100000, 0b10000000}));
  const auto back = wire::from_frame(frame, Actor::Alice);
  EXPECT_EQ(back.qubits, m.qubits);
  EXPECT_EQ(back.payload, m.payload);
}

TEST(ConfigHash, SensitiveToEveryInput) {
  const auto css = steane_pair();
  const auto base = config_hash(small_params(), Passive{}, css, RngSeed{1});
  EXPECT_EQ(base.size(), 32u);
  EXPECT_EQ(base, config_hash(small_params(), Passive{}, css, RngSeed{1}));
  EXPECT_NE(base, config_hash(small_params(), Passive{}, css, RngSeed{2}));
  EXPECT_NE(base, config_hash(small_params(), BiasedInterceptResend{0, 1}, css, RngSeed{1}));
  auto p = small_params();
  p.m1 = 201;
  EXPECT_NE(base, config_hash(p, Passive{}, css, RngSeed{1}));
}

TEST(ConfigOptions, StrategyParsing) {
  EXPECT_EQ(parse_probability_pair("0.25,0.5"), (std::pair{0.25, 0.5}));
  EXPECT_THROW(parse_probability_pair("0.25"), std::invalid_argument);
  EXPECT_THROW(parse_probability_pair("a,b"), std::invalid_argument);
  EXPECT_TRUE(std::holds_alternative<Passive>(strategy_from_options({}, {})));
  EXPECT_THROW(strategy_from_options(std::pair{0.0, 1.0}, 0.01), InvalidStrategy);
  EXPECT_THROW(strategy_from_options(std::pair{0.7, 0.7}, {}), InvalidStrategy);
}

// Three endpoints on loopback, one thread each.
struct LoopbackRun {
  net::EndpointResult alice, bob;
  net::RelayResult relay;
};

LoopbackRun run_loopback(const ProtocolParams& params, const AttackStrategy& strategy, RngSeed seed,
                         RngSeed alice_seed) {
  const auto css = steane_pair();
  const SessionConfig config{params, css};
  const auto hash = config_hash(params, strategy, css, seed);
  const auto alice_hash = config_hash(params, strategy, css, alice_seed);
  auto bob_listener = net::Listener::open({"127.0.0.1", 0});
  auto relay_listener = net::Listener::open({"127.0.0.1", 0});
  LoopbackRun r;
  std::thread bob([&] {
    net::Connection c(bob_listener.accept());
    r.bob = net::run_bob(config, seed, hash, c);
  });
  std::thread relay([&] {
    net::Connection to_bob(net::connect({"127.0.0.1", bob_listener.port()}));
    net::Connection from_alice(relay_listener.accept());
    r.relay = net::run_relay(strategy, seed, hash, from_alice, to_bob);
  });
  {
    net::Connection c(net::connect({"127.0.0.1", relay_listener.port()}));
    r.alice = net::run_alice(config, alice_seed, alice_hash, c);
  }
  bob.join();
  relay.join();
  return r;
}

TEST(Network, LoopbackMatchesInProcess) {
  const auto params = small_params();
  for (const AttackStrategy& strategy : {AttackStrategy{Passive{}}, AttackStrategy{BiasedInterceptResend{0, 1}}}) {
    const auto r = run_loopback(params, strategy, RngSeed{21}, RngSeed{21});
    ASSERT_TRUE(r.alice.error.empty()) << r.alice.error;
    ASSERT_TRUE(r.bob.error.empty()) << r.bob.error;
    ASSERT_TRUE(r.relay.error.empty()) << r.relay.error;
    const auto local = run_session(params, strategy, steane_pair(), RngSeed{21});
    EXPECT_EQ(r.alice.transcript, local.transcript);
    EXPECT_EQ(r.bob.transcript, local.transcript);
    EXPECT_EQ(r.relay.transcript, local.transcript);
    EXPECT_EQ(r.alice.outcome.status, local.status);
    EXPECT_EQ(r.bob.outcome.status, local.status);
    EXPECT_EQ(r.alice.outcome.key, local.alice_key);
    EXPECT_EQ(r.bob.outcome.key, local.bob_key);
  }
}

TEST(Network, HashMismatchRefuses) {
  const auto r = run_loopback(small_params(), Passive{}, RngSeed{1}, RngSeed{2});
  EXPECT_EQ(r.alice.outcome.status, SessionStatus::AbortedConnectionLost);
  EXPECT_EQ(r.bob.outcome.status, SessionStatus::AbortedConnectionLost);
  EXPECT_NE(r.relay.error.find("hash mismatch"), std::string::npos);
  EXPECT_EQ(r.alice.transcript.size(), 0u);
}

TEST(Network, AddressParsing) {
  const auto a = net::parse_address("localhost:8080");
  EXPECT_EQ(a.host, "localhost");
  EXPECT_EQ(a.port, 8080);
  EXPECT_THROW(net::parse_address("nohost"), net::NetError);
  EXPECT_THROW(net::parse_address("h:99999"), net::NetError);
}

}  // namespace
}  // namespace bb84
