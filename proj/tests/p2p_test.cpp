#include "vanet/p2p.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "vanet/node.hpp"

namespace vanet {
namespace {

constexpr std::int64_t kT0 = 1'700'000'000'000;

EphemeralKeyPair random_ephemeral(std::mt19937_64& rng) {
    std::array<std::uint8_t, 32> s{};
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
    return ephemeral_from_secret(s);
}

std::pair<P2pSession, P2pSession> session_pair(std::mt19937_64& rng) {
    const auto a_id = testing::keypair_from(1).public_key;
    const auto b_id = testing::keypair_from(2).public_key;
    const auto ea = random_ephemeral(rng);
    const auto eb = random_ephemeral(rng);
    P2pSession a(b_id, true, ea);
    P2pSession b(a_id, false, eb);
    a.establish(eb.public_key);
    b.establish(ea.public_key);
    return {std::move(a), std::move(b)};
}

TEST(Handshake, EncodeDecode) {
    HandshakeMessage m{HandshakeKind::Response, testing::keypair_from(3).public_key, testing::keypair_from(4).public_key};
    const auto b = encode_handshake(m);
    ASSERT_EQ(b.size(), kHandshakePayloadBytes);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "P2P1");
    const auto back = decode_handshake(b);
    ASSERT_TRUE(back);
    EXPECT_EQ(back->kind, m.kind);
    EXPECT_EQ(back->addressed_to, m.addressed_to);
    EXPECT_EQ(back->ephemeral, m.ephemeral);
    EXPECT_FALSE(decode_handshake(ByteView(b).first(68)));
    auto bad = b;
    bad[4] = 3;
    EXPECT_FALSE(decode_handshake(bad));
    bad = b;
    bad[0] = 'Q';
    EXPECT_FALSE(decode_handshake(bad));
}

TEST(P2pSession, BothDirectionsRoundTrip) {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 1000; ++i) {
        auto [a, b] = session_pair(rng);
        const auto msg = testing::random_bytes(rng, rng() % 100);
        ASSERT_EQ(p2p_recv(b, p2p_send(a, msg)), msg);
        ASSERT_EQ(p2p_recv(a, p2p_send(b, msg)), msg);
    }
}

TEST(P2pSession, DirectionsUseDistinctKeys) {
    std::mt19937_64 rng(52);
    auto [a, b] = session_pair(rng);
    const Bytes msg{'s', 'a', 'm', 'e'};
    const auto from_a = a.send(msg);
    const auto from_b = b.send(msg);
    EXPECT_NE(from_a, from_b);  // same counter, different key
    EXPECT_FALSE(a.receive(from_a).has_value());  // own frame does not decrypt with the rx key
}

TEST(P2pSession, TamperAndReplayRejected) {
    std::mt19937_64 rng(53);
    auto [a, b] = session_pair(rng);
    const Bytes msg{'b', 'r', 'a', 'k', 'e'};
    const auto frame = a.send(msg);
    for (std::size_t bit = 0; bit < frame.size() * 8; ++bit) {
        auto t = frame;
        t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_FALSE(b.receive(t).has_value()) << bit;
    }
    ASSERT_EQ(b.receive(frame), msg);
    EXPECT_FALSE(b.receive(frame).has_value());  // counter already consumed
    EXPECT_FALSE(b.receive(ByteView(frame).first(8)).has_value());
}

TEST(P2pSession, OutOfOrderSkipsAhead) {
    std::mt19937_64 rng(54);
    auto [a, b] = session_pair(rng);
    const auto f0 = a.send(Bytes{0});
    const auto f1 = a.send(Bytes{1});
    EXPECT_EQ(b.receive(f1), Bytes{1});
    EXPECT_FALSE(b.receive(f0).has_value());
}

TEST(P2pSession, SendBeforeEstablishThrows) {
    std::mt19937_64 rng(55);
    P2pSession s(testing::keypair_from(1).public_key, true, random_ephemeral(rng));
    EXPECT_THROW(s.send(Bytes{1}), std::logic_error);
    EXPECT_THROW(s.establish(PublicKey{}), CryptoError);
}

class NodeHandshake : public ::testing::Test {
protected:
    NodeConfig config(std::uint8_t tag, Position pos) {
        NodeConfig c;
        c.keypair = testing::keypair_from(tag);
        c.position = pos;
        return c;
    }

    Node a{config(1, {0, 0})};
    Node b{config(2, {0, -10})};
    Node c{config(3, {0, -20})};

    void SetUp() override {
        a.pool().observe(b.public_key(), {0, -10}, {}, kT0);
        b.pool().observe(a.public_key(), {0, 0}, {}, kT0);
        b.pool().observe(c.public_key(), {0, -20}, {}, kT0);
    }
};

TEST_F(NodeHandshake, EstablishesAndExchanges) {
    auto opened = a.open_p2p_session(b.public_key(), kT0 + 10);
    auto accepted = b.accept_p2p(opened.handshake, kT0 + 20);
    ASSERT_TRUE(std::holds_alternative<P2pOpened>(accepted));
    auto& responder = std::get<P2pOpened>(accepted);
    EXPECT_FALSE(a.complete_p2p(opened.session, responder.handshake, kT0 + 30).has_value());
    ASSERT_TRUE(opened.session.established());

    const Bytes msg{'h', 'i'};
    EXPECT_EQ(p2p_recv(responder.session, p2p_send(opened.session, msg)), msg);
    EXPECT_EQ(p2p_recv(opened.session, p2p_send(responder.session, msg)), msg);
}

TEST_F(NodeHandshake, ReplayedHandshakeRejectedByDedup) {
    auto opened = a.open_p2p_session(b.public_key(), kT0 + 10);
    ASSERT_TRUE(std::holds_alternative<P2pOpened>(b.accept_p2p(opened.handshake, kT0 + 20)));
    // C captured A's handshake and plays it to B again
    const auto replay = b.accept_p2p(opened.handshake, kT0 + 500);
    ASSERT_TRUE(std::holds_alternative<P2pFailure>(replay));
    EXPECT_EQ(std::get<P2pFailure>(replay).code, P2pErrc::Rejected);
    EXPECT_EQ(std::get<P2pFailure>(replay).verdict, RejectReason::Duplicate);
}

TEST_F(NodeHandshake, MisaddressedAndForeignResponses) {
    auto to_c = a.open_p2p_session(c.public_key(), kT0);
    const auto r = b.accept_p2p(to_c.handshake, kT0);
    ASSERT_TRUE(std::holds_alternative<P2pFailure>(r));
    EXPECT_EQ(std::get<P2pFailure>(r).code, P2pErrc::NotAddressedToUs);

    const auto not_hs = a.broadcast(Bytes{'x'}, kT0).bytes;
    EXPECT_EQ(std::get<P2pFailure>(b.accept_p2p(not_hs, kT0)).code, P2pErrc::NotHandshake);
    EXPECT_EQ(std::get<P2pFailure>(b.accept_p2p(Bytes{1, 2}, kT0)).code, P2pErrc::Malformed);

    auto opened = a.open_p2p_session(b.public_key(), kT0 + 1);
    // C answers instead of B
    auto from_c = c.open_p2p_session(a.public_key(), kT0 + 2);
    auto fail = a.complete_p2p(opened.session, from_c.handshake, kT0 + 3);
    ASSERT_TRUE(fail);
    EXPECT_EQ(fail->code, P2pErrc::NotHandshake);

    // a well-formed response, but from C rather than the session peer B
    BroadcastPacket resp;
    resp.header.packet_id = 77;
    resp.header.timestamp_ms = kT0 + 4;
    resp.header.sender = c.public_key();
    resp.payload = encode_handshake({HandshakeKind::Response, a.public_key(), testing::keypair_from(8).public_key});
    sign_packet(resp, testing::keypair_from(3));
    fail = a.complete_p2p(opened.session, encode_broadcast(resp), kT0 + 5);
    ASSERT_TRUE(fail);
    EXPECT_EQ(fail->code, P2pErrc::UnexpectedPeer);
    EXPECT_FALSE(opened.session.established());
}

TEST_F(NodeHandshake, LowOrderEphemeralRejected) {
    BroadcastPacket p;
    p.header.packet_id = 99;
    p.header.timestamp_ms = kT0;
    p.header.sender = a.public_key();
    p.payload = encode_handshake({HandshakeKind::Init, b.public_key(), PublicKey{}});
    sign_packet(p, testing::keypair_from(1));
    const auto r = b.accept_p2p(encode_broadcast(p), kT0);
    ASSERT_TRUE(std::holds_alternative<P2pFailure>(r));
    EXPECT_EQ(std::get<P2pFailure>(r).code, P2pErrc::InvalidEphemeralKey);
}

TEST_F(NodeHandshake, UnsensedInitiatorRejected) {
    auto opened = c.open_p2p_session(a.public_key(), kT0);
    const auto r = a.accept_p2p(opened.handshake, kT0);
    ASSERT_TRUE(std::holds_alternative<P2pFailure>(r));
    EXPECT_EQ(std::get<P2pFailure>(r).verdict, RejectReason::SenderNotSensed);
}

}  // namespace
}  // namespace vanet
