#pragma once

// One vehicle's protocol state machine: signs broadcasts, runs incoming packets through the
// verifier and the confirmation engine, emits confirmations, and rate-limits senders.
// Time is injected by the caller in milliseconds.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "vanet/confirmation.hpp"
#include "vanet/key_pool.hpp"
#include "vanet/p2p.hpp"
#include "vanet/verifier.hpp"
#include "vanet/wire.hpp"

namespace vanet {

struct RateLimitConfig {
    bool enabled = true;
    double tokens_per_second = 10.0;
    double bucket_size = 20.0;
    unsigned exhaustions_to_blacklist = 3;
    std::int64_t exhaustion_window_ms = 60'000;
};

/// Per-sender token bucket; repeated exhaustion blacklists the sender for good.
class RateLimiter {
public:
    enum class Decision { Allow, Limited, NewlyBlacklisted, Blacklisted };

    explicit RateLimiter(RateLimitConfig config = {});

    Decision admit(const PublicKey& sender, std::int64_t now_ms);
    bool is_blacklisted(const PublicKey& sender) const { return blacklist_.contains(sender); }
    const std::unordered_map<PublicKey, std::int64_t>& blacklist() const noexcept { return blacklist_; }

private:
    struct Bucket {
        double tokens = 0.0;
        std::int64_t last_ms = 0;
        std::vector<std::int64_t> exhaustions;
    };

    RateLimitConfig config_;
    std::unordered_map<PublicKey, Bucket> buckets_;
    std::unordered_map<PublicKey, std::int64_t> blacklist_;
};

struct NodeConfig {
    KeyPair keypair;
    Position position;
    std::int64_t replay_window_ms = 5'000;
    std::int64_t pkp_ttl_ms = 60'000;
    ConfidenceFunction confidence_function = ConfidenceFunction::Harmonic;
    double acceptance_threshold = 1.0;
    std::optional<unsigned> max_confirmation_depth;
    RateLimitConfig rate_limit;
    bool confirm_confirmations = true;

    /// Throws std::invalid_argument on non-positive durations or threshold.
    void validate() const;
};

enum class DropReason {
    Duplicate,
    Expired,
    TooNew,
    OwnPacket,
    SenderNotSensed,
    BadSignature,
    Malformed,
    RateLimited,
    Cycle,
    DepthCap,
    DuplicateConfirmation,
    UnknownTarget,
};

const char* to_string(DropReason r);
DropReason drop_reason(RejectReason r);

namespace event {

struct Sent {
    PacketRef packet;
    PacketType type;
};
struct DirectVerified {
    PacketRef origin;
    Position sender_position;
    std::int64_t t_receive_ms;
    std::int64_t t_verified_ms;
};
/// An original whose sender is not sensed; held until confirmations vouch for it.
struct OriginHeld {
    PacketRef origin;
};
struct ConfirmationRecorded {
    PacketRef origin;
    PacketRef confirmation;
    unsigned depth;
    bool contributes;
};
struct ConfirmationBuffered {
    PacketRef confirmation;
    PacketRef target;
};
struct IndirectAccepted {
    PacketRef origin;
    std::optional<Position> estimated_position;
    double confidence;
    unsigned hop_count;      // 1 + shallowest contributing depth
    unsigned deepest;        // deepest contributing depth
    std::size_t contributors;
};
struct ConfirmationEmitted {
    PacketRef target;
    PacketRef confirmation;
};
struct Dropped {
    DropReason reason;
    std::optional<PacketRef> packet;
};
struct BlacklistedSender {
    PublicKey key;
};

}  // namespace event

using NodeEvent = std::variant<event::Sent, event::DirectVerified, event::OriginHeld,
                               event::ConfirmationRecorded, event::ConfirmationBuffered,
                               event::IndirectAccepted, event::ConfirmationEmitted, event::Dropped,
                               event::BlacklistedSender>;

const char* event_name(const NodeEvent& e);

struct NodeOutput {
    std::vector<NodeEvent> events;
    std::vector<Bytes> outgoing;
};

struct Emission {
    BroadcastPacket packet;
    Bytes bytes;
};

struct P2pOpened {
    P2pSession session;
    Bytes handshake;
};

using P2pAcceptResult = std::variant<P2pOpened, P2pFailure>;

class Node {
public:
    explicit Node(NodeConfig config, SignatureVerifier verifier = {});

    const PublicKey& public_key() const noexcept { return config_.keypair.public_key; }
    const NodeConfig& config() const noexcept { return config_; }
    PublicKeyPool& pool() noexcept { return pool_; }
    const RateLimiter& rate_limiter() const noexcept { return limiter_; }

    /// Signs and returns a new original packet carrying `payload`.
    Emission broadcast(ByteView payload, std::int64_t now_ms);

    NodeOutput handle_incoming(ByteView bytes, std::int64_t now_ms);

    /// Drops buffered confirmations older than the replay window and stale origin state.
    NodeOutput tick(std::int64_t now_ms);

    P2pOpened open_p2p_session(const PublicKey& peer, std::int64_t now_ms);
    P2pAcceptResult accept_p2p(ByteView handshake, std::int64_t now_ms);
    std::optional<P2pFailure> complete_p2p(P2pSession& session, ByteView response, std::int64_t now_ms);

    /// Confirmation graph of a known origin, if still retained.
    const ConfirmationGraph* graph_for(const PacketRef& origin) const;
    std::uint32_t next_packet_id() const noexcept { return next_packet_id_; }

private:
    enum class OriginStatus { Own, Direct, Held, Indirect };

    struct OriginState {
        OriginStatus status;
        ConfirmationGraph graph;
        std::int64_t origin_timestamp_ms;
        std::unordered_map<PacketRef, RelativePosition> offsets;
    };

    struct BufferedConfirmation {
        ConfirmationPacket packet;
        bool sensed;
        std::int64_t received_ms;
    };

    void process_broadcast(const BroadcastPacket& p, std::int64_t now_ms, NodeOutput& out);
    void process_confirmation(const ConfirmationPacket& p, std::int64_t now_ms, NodeOutput& out);
    void place_confirmation(const ConfirmationPacket& p, bool sensed, std::int64_t now_ms, NodeOutput& out);
    void release_buffered(const PacketRef& now_known, std::int64_t now_ms, NodeOutput& out);
    void emit_confirmation(OriginState& state, const PacketRef& target, const Position& target_position,
                           std::int64_t now_ms, NodeOutput& out);
    void try_indirect_accept(OriginState& state, std::int64_t now_ms, NodeOutput& out);
    OriginState& register_origin(const PacketRef& origin, OriginStatus status, std::uint64_t timestamp_ms);
    std::optional<PacketRef> origin_of(const PacketRef& packet) const;
    bool signature_ok(const PacketHeader& h, const Bytes& region) const;
    void housekeeping(std::int64_t now_ms, NodeOutput& out);
    EphemeralKeyPair next_ephemeral();

    NodeConfig config_;
    VerifierSettings verifier_;
    AcceptancePolicy policy_;
    PublicKeyPool pool_;
    DedupStore dedup_;
    RateLimiter limiter_;
    std::uint32_t next_packet_id_ = 0;
    std::uint64_t p2p_sessions_ = 0;
    std::unordered_map<PacketRef, OriginState> origins_;
    std::unordered_map<PacketRef, PacketRef> packet_origin_;  // recorded confirmation -> origin
    std::vector<BufferedConfirmation> buffered_;
    std::int64_t last_housekeeping_ms_ = 0;
};

}  // namespace vanet
