#include "vanet/node.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace vanet {
namespace {

constexpr std::int64_t kT0 = 1'700'000'000'000;

template <class E>
std::vector<E> events_of(const NodeOutput& out) {
    std::vector<E> found;
    for (const auto& e : out.events) {
        if (auto* x = std::get_if<E>(&e)) found.push_back(*x);
    }
    return found;
}

std::vector<std::string> names(const NodeOutput& out) {
    std::vector<std::string> n;
    for (const auto& e : out.events) n.push_back(event_name(e));
    return n;
}

NodeConfig config(std::uint8_t tag, Position pos) {
    NodeConfig c;
    c.keypair = testing::keypair_from(tag);
    c.position = pos;
    return c;
}

// A (origin) -- B and D -- C: C sees B and D but not A.
class Relay : public ::testing::Test {
protected:
    Node a{config(1, {0, 0})};
    Node b{config(2, {0, -10})};
    Node d{config(4, {5, -10})};
    Node c{config(3, {0, -20})};

    void SetUp() override {
        for (Node* n : {&b, &d}) n->pool().observe(a.public_key(), {0, 0}, {}, kT0);
        c.pool().observe(b.public_key(), {0, -10}, {}, kT0);
        c.pool().observe(d.public_key(), {5, -10}, {}, kT0);
    }
};

TEST_F(Relay, BroadcastIdsIncreaseAndVerify) {
    const auto e1 = a.broadcast(Bytes{'x'}, kT0);
    const auto e2 = a.broadcast(Bytes{'y'}, kT0);
    EXPECT_EQ(e2.packet.header.packet_id, e1.packet.header.packet_id + 1);
    EXPECT_EQ(e1.bytes.size(), kBroadcastHeaderBytes + 1);
    const auto p = decode_broadcast(e1.bytes);
    EXPECT_TRUE(verify(a.public_key(), signed_region(p), p.header.signature));
}

TEST_F(Relay, DirectVerificationEmitsConfirmation) {
    const auto m = a.broadcast(Bytes{'s', 't', 'o', 'p'}, kT0);
    const auto out = b.handle_incoming(m.bytes, kT0 + 8);
    EXPECT_EQ(names(out), (std::vector<std::string>{"DIRECT_VERIFIED", "CONFIRMATION_EMITTED"}));
    ASSERT_EQ(out.outgoing.size(), 1u);
    const auto conf = decode_confirmation(out.outgoing[0]);
    EXPECT_EQ(conf.target(), m.packet.header.ref());
    EXPECT_EQ(conf.relative, (RelativePosition{0, 1000}));
    EXPECT_TRUE(verify(b.public_key(), signed_region(conf), conf.header.signature));
    const auto dv = events_of<event::DirectVerified>(out).at(0);
    EXPECT_EQ(dv.sender_position, (Position{0, 0}));

    // the same bytes again are a duplicate and emit nothing
    const auto again = b.handle_incoming(m.bytes, kT0 + 9);
    ASSERT_EQ(events_of<event::Dropped>(again).size(), 1u);
    EXPECT_EQ(events_of<event::Dropped>(again)[0].reason, DropReason::Duplicate);
    EXPECT_TRUE(again.outgoing.empty());
}

TEST_F(Relay, TwoDepthOneConfirmationsGiveIndirectAcceptance) {
    const auto m = a.broadcast(Bytes{'s', 't', 'o', 'p'}, kT0);
    const auto from_b = b.handle_incoming(m.bytes, kT0 + 5).outgoing.at(0);
    const auto from_d = d.handle_incoming(m.bytes, kT0 + 6).outgoing.at(0);

    auto held = c.handle_incoming(m.bytes, kT0 + 7);
    EXPECT_EQ(names(held), (std::vector<std::string>{"ORIGIN_HELD"}));

    auto first = c.handle_incoming(from_b, kT0 + 8);
    EXPECT_TRUE(events_of<event::IndirectAccepted>(first).empty());
    ASSERT_EQ(events_of<event::ConfirmationRecorded>(first).size(), 1u);
    EXPECT_EQ(events_of<event::ConfirmationRecorded>(first)[0].depth, 1u);
    // C re-confirms B's confirmation (depth 2)
    ASSERT_EQ(first.outgoing.size(), 1u);
    EXPECT_EQ(decode_confirmation(first.outgoing[0]).relative, (RelativePosition{0, 1000}));

    auto second = c.handle_incoming(from_d, kT0 + 9);
    const auto acc = events_of<event::IndirectAccepted>(second);
    ASSERT_EQ(acc.size(), 1u);
    EXPECT_DOUBLE_EQ(acc[0].confidence, 1.0);
    EXPECT_EQ(acc[0].hop_count, 2u);
    EXPECT_EQ(acc[0].deepest, 1u);
    EXPECT_EQ(acc[0].contributors, 2u);
    ASSERT_TRUE(acc[0].estimated_position);
    EXPECT_NEAR(acc[0].estimated_position->east, 0.0, 1e-9);
    EXPECT_NEAR(acc[0].estimated_position->north, 0.0, 1e-9);
    EXPECT_EQ(acc[0].origin, m.packet.header.ref());
    // the indirectly accepted original is never confirmed by C itself
    for (const auto& bytes : second.outgoing) EXPECT_NE(decode_confirmation(bytes).target(), m.packet.header.ref());
}

TEST_F(Relay, AtMostOneIndirectAcceptancePerOrigin) {
    Node e{config(5, {-5, -10})};
    e.pool().observe(a.public_key(), {0, 0}, {}, kT0);
    c.pool().observe(e.public_key(), {-5, -10}, {}, kT0);
    const auto m = a.broadcast(Bytes{'z'}, kT0);
    std::size_t accepted = 0;
    auto feed = [&](const NodeOutput& o) { accepted += events_of<event::IndirectAccepted>(o).size(); };
    feed(c.handle_incoming(m.bytes, kT0 + 1));
    for (Node* n : {&b, &d, &e}) feed(c.handle_incoming(n->handle_incoming(m.bytes, kT0 + 2).outgoing.at(0), kT0 + 3));
    EXPECT_EQ(accepted, 1u);
}

TEST_F(Relay, ConfirmationBeforeOriginalIsBuffered) {
    const auto m = a.broadcast(Bytes{'q'}, kT0);
    const auto from_b = b.handle_incoming(m.bytes, kT0 + 1).outgoing.at(0);
    auto early = c.handle_incoming(from_b, kT0 + 2);
    EXPECT_EQ(names(early), (std::vector<std::string>{"CONFIRMATION_BUFFERED"}));
    auto later = c.handle_incoming(m.bytes, kT0 + 3);
    EXPECT_EQ(events_of<event::ConfirmationRecorded>(later).size(), 1u);
    ASSERT_NE(c.graph_for(m.packet.header.ref()), nullptr);
    EXPECT_DOUBLE_EQ(c.graph_for(m.packet.header.ref())->confidence(ConfidenceFunction::Harmonic), 0.5);
}

TEST_F(Relay, BufferedConfirmationExpires) {
    const auto m = a.broadcast(Bytes{'q'}, kT0);
    const auto from_b = b.handle_incoming(m.bytes, kT0 + 1).outgoing.at(0);
    c.handle_incoming(from_b, kT0 + 2);
    EXPECT_TRUE(events_of<event::Dropped>(c.tick(kT0 + 2 + 5'000)).empty());
    const auto dropped = events_of<event::Dropped>(c.tick(kT0 + 2 + 5'001));
    ASSERT_EQ(dropped.size(), 1u);
    EXPECT_EQ(dropped[0].reason, DropReason::UnknownTarget);
}

TEST_F(Relay, MaxDepthCapsEmission) {
    auto cfg = config(3, {0, -20});
    cfg.max_confirmation_depth = 1;
    Node capped(cfg);
    capped.pool().observe(b.public_key(), {0, -10}, {}, kT0);
    const auto m = a.broadcast(Bytes{'q'}, kT0);
    capped.handle_incoming(m.bytes, kT0 + 1);
    const auto out = capped.handle_incoming(b.handle_incoming(m.bytes, kT0 + 1).outgoing.at(0), kT0 + 2);
    EXPECT_TRUE(out.outgoing.empty());  // a depth-2 confirmation would exceed the cap
}

TEST_F(Relay, ConfirmConfirmationsOff) {
    auto cfg = config(3, {0, -20});
    cfg.confirm_confirmations = false;
    Node quiet(cfg);
    quiet.pool().observe(b.public_key(), {0, -10}, {}, kT0);
    const auto m = a.broadcast(Bytes{'q'}, kT0);
    quiet.handle_incoming(m.bytes, kT0 + 1);
    const auto out = quiet.handle_incoming(b.handle_incoming(m.bytes, kT0 + 1).outgoing.at(0), kT0 + 2);
    EXPECT_EQ(events_of<event::ConfirmationRecorded>(out).size(), 1u);
    EXPECT_TRUE(out.outgoing.empty());
}

TEST_F(Relay, EveryInputProducesAnEvent) {
    EXPECT_FALSE(c.handle_incoming(Bytes{}, kT0).events.empty());
    EXPECT_FALSE(c.handle_incoming(Bytes{0x01, 0x02}, kT0).events.empty());
    const auto own = c.broadcast(Bytes{}, kT0);
    const auto out = c.handle_incoming(own.bytes, kT0);
    ASSERT_EQ(events_of<event::Dropped>(out).size(), 1u);
    EXPECT_EQ(events_of<event::Dropped>(out)[0].reason, DropReason::OwnPacket);
}

TEST(RateLimit, FloodingSenderIsBlacklisted) {
    auto cfg = config(2, {0, 0});
    cfg.rate_limit.tokens_per_second = 10;
    cfg.rate_limit.bucket_size = 5;
    Node receiver(cfg);
    const auto flooder = testing::keypair_from(1);
    receiver.pool().observe(flooder.public_key, {0, 10}, {}, kT0);

    std::size_t limited = 0, blacklisted = 0, verified = 0;
    for (std::uint32_t i = 0; i < 100; ++i) {
        const auto t = kT0 + i * 10;  // 100 packets within one second
        const auto out = receiver.handle_incoming(encode_broadcast(testing::signed_broadcast(flooder, i, t)), t);
        for (const auto& d : events_of<event::Dropped>(out)) limited += d.reason == DropReason::RateLimited;
        blacklisted += events_of<event::BlacklistedSender>(out).size();
        verified += events_of<event::DirectVerified>(out).size();
    }
    EXPECT_GE(limited, 90u);
    EXPECT_EQ(blacklisted, 1u);
    EXPECT_EQ(verified + limited, 100u);
    EXPECT_TRUE(receiver.rate_limiter().is_blacklisted(flooder.public_key));
    // later, well-behaved traffic from the same key is still refused
    const auto late = kT0 + 120'000;
    const auto out = receiver.handle_incoming(encode_broadcast(testing::signed_broadcast(flooder, 500, late)), late);
    EXPECT_EQ(events_of<event::Dropped>(out).at(0).reason, DropReason::RateLimited);
}

TEST(RateLimit, TokenBucketArithmetic) {
    RateLimiter limiter({true, 10.0, 2.0, 3, 60'000});
    const auto k = testing::keypair_from(1).public_key;
    EXPECT_EQ(limiter.admit(k, 0), RateLimiter::Decision::Allow);
    EXPECT_EQ(limiter.admit(k, 0), RateLimiter::Decision::Allow);
    EXPECT_EQ(limiter.admit(k, 0), RateLimiter::Decision::Limited);
    EXPECT_EQ(limiter.admit(k, 100), RateLimiter::Decision::Allow);  // one token refilled
    EXPECT_EQ(limiter.admit(k, 100), RateLimiter::Decision::Limited);
    EXPECT_EQ(limiter.admit(k, 61'000), RateLimiter::Decision::Allow);
    EXPECT_EQ(limiter.admit(k, 61'000), RateLimiter::Decision::Allow);
    EXPECT_EQ(limiter.admit(k, 61'000), RateLimiter::Decision::Limited);  // older exhaustions aged out
    EXPECT_FALSE(limiter.is_blacklisted(k));
    EXPECT_EQ(limiter.admit(k, 61'000), RateLimiter::Decision::Limited);
    EXPECT_EQ(limiter.admit(k, 61'000), RateLimiter::Decision::NewlyBlacklisted);
    EXPECT_EQ(limiter.admit(k, 200'000), RateLimiter::Decision::Blacklisted);
}

TEST(NodeConfig, Validation) {
    auto cfg = config(1, {});
    cfg.replay_window_ms = 0;
    EXPECT_THROW(Node{cfg}, std::invalid_argument);
    cfg = config(1, {});
    cfg.acceptance_threshold = 0;
    EXPECT_THROW(Node{cfg}, std::invalid_argument);
    cfg = config(1, {});
    cfg.rate_limit.bucket_size = 0.5;
    EXPECT_THROW(Node{cfg}, std::invalid_argument);
}

TEST(NodeDeterminism, SameInputsSameOutputs) {
    auto run = [] {
        Node n(config(2, {0, 0}));
        const auto sender = testing::keypair_from(1);
        n.pool().observe(sender.public_key, {0, 10}, {}, kT0);
        std::vector<Bytes> outgoing;
        for (std::uint32_t i = 0; i < 5; ++i) {
            auto out = n.handle_incoming(encode_broadcast(testing::signed_broadcast(sender, i, kT0 + i)), kT0 + i);
            for (auto& o : out.outgoing) outgoing.push_back(o);
        }
        return outgoing;
    };
    EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace vanet
