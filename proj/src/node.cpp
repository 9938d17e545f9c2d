#include "vanet/node.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vanet {

// ---------------------------------------------------------------------------- rate limiting

RateLimiter::RateLimiter(RateLimitConfig config) : config_(config) {
    if (config_.enabled && (config_.tokens_per_second <= 0.0 || config_.bucket_size < 1.0)) {
        throw std::invalid_argument("rate limit needs a positive rate and a bucket of at least one token");
    }
}

RateLimiter::Decision RateLimiter::admit(const PublicKey& sender, std::int64_t now_ms) {
    if (blacklist_.contains(sender)) return Decision::Blacklisted;
    if (!config_.enabled) return Decision::Allow;

    auto [it, fresh] = buckets_.try_emplace(sender);
    auto& b = it->second;
    if (fresh) {
        b.tokens = config_.bucket_size;
    } else if (now_ms > b.last_ms) {
        b.tokens = std::min(config_.bucket_size,
                            b.tokens + static_cast<double>(now_ms - b.last_ms) * config_.tokens_per_second / 1000.0);
    }
    b.last_ms = std::max(b.last_ms, now_ms);

    if (b.tokens >= 1.0) {
        b.tokens -= 1.0;
        return Decision::Allow;
    }
    std::erase_if(b.exhaustions, [&](std::int64_t t) { return t <= now_ms - config_.exhaustion_window_ms; });
    b.exhaustions.push_back(now_ms);
    if (b.exhaustions.size() >= config_.exhaustions_to_blacklist) {
        blacklist_.emplace(sender, now_ms);
        buckets_.erase(it);
        return Decision::NewlyBlacklisted;
    }
    return Decision::Limited;
}

// ---------------------------------------------------------------------------- config / events

void NodeConfig::validate() const {
    if (replay_window_ms <= 0) throw std::invalid_argument("replay window must be positive");
    if (pkp_ttl_ms <= 0) throw std::invalid_argument("PKP ttl must be positive");
    if (!(acceptance_threshold > 0.0)) throw std::invalid_argument("acceptance threshold must be positive");
    if (rate_limit.enabled && rate_limit.exhaustion_window_ms <= 0) {
        throw std::invalid_argument("rate-limit exhaustion window must be positive");
    }
}

const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::Duplicate: return "Duplicate";
        case DropReason::Expired: return "Expired";
        case DropReason::TooNew: return "TooNew";
        case DropReason::OwnPacket: return "OwnPacket";
        case DropReason::SenderNotSensed: return "SenderNotSensed";
        case DropReason::BadSignature: return "BadSignature";
        case DropReason::Malformed: return "Malformed";
        case DropReason::RateLimited: return "RateLimited";
        case DropReason::Cycle: return "Cycle";
        case DropReason::DepthCap: return "DepthCap";
        case DropReason::DuplicateConfirmation: return "DuplicateConfirmation";
        case DropReason::UnknownTarget: return "UnknownTarget";
    }
    return "?";
}

DropReason drop_reason(RejectReason r) {
    switch (r) {
        case RejectReason::Duplicate: return DropReason::Duplicate;
        case RejectReason::Expired: return DropReason::Expired;
        case RejectReason::TooNew: return DropReason::TooNew;
        case RejectReason::OwnPacket: return DropReason::OwnPacket;
        case RejectReason::SenderNotSensed: return DropReason::SenderNotSensed;
        case RejectReason::BadSignature: return DropReason::BadSignature;
        case RejectReason::Malformed: return DropReason::Malformed;
    }
    return DropReason::Malformed;
}

namespace {

DropReason drop_reason(RecordStatus s) {
    switch (s) {
        case RecordStatus::RejectedCycle: return DropReason::Cycle;
        case RecordStatus::RejectedDepthCap: return DropReason::DepthCap;
        case RecordStatus::RejectedDuplicate: return DropReason::DuplicateConfirmation;
        case RecordStatus::RejectedUnknownTarget:
        case RecordStatus::Accepted: break;
    }
    return DropReason::UnknownTarget;
}

std::int32_t to_cm(double metres) { return static_cast<std::int32_t>(std::lround(metres * 100.0)); }

}  // namespace

const char* event_name(const NodeEvent& e) {
    struct Visitor {
        const char* operator()(const event::Sent&) const { return "SENT"; }
        const char* operator()(const event::DirectVerified&) const { return "DIRECT_VERIFIED"; }
        const char* operator()(const event::OriginHeld&) const { return "ORIGIN_HELD"; }
        const char* operator()(const event::ConfirmationRecorded&) const { return "CONFIRMATION_RECORDED"; }
        const char* operator()(const event::ConfirmationBuffered&) const { return "CONFIRMATION_BUFFERED"; }
        const char* operator()(const event::IndirectAccepted&) const { return "INDIRECT_ACCEPTED"; }
        const char* operator()(const event::ConfirmationEmitted&) const { return "CONFIRMATION_EMITTED"; }
        const char* operator()(const event::Dropped&) const { return "DROPPED"; }
        const char* operator()(const event::BlacklistedSender&) const { return "BLACKLISTED"; }
    };
    return std::visit(Visitor{}, e);
}

// ---------------------------------------------------------------------------- node

Node::Node(NodeConfig config, SignatureVerifier verifier)
    : config_(std::move(config)),
      pool_((config_.validate(), config_.pkp_ttl_ms)),
      dedup_(2 * config_.replay_window_ms),
      limiter_(config_.rate_limit) {
    verifier_.window_ms = config_.replay_window_ms;
    verifier_.signature_verifier = verifier ? std::move(verifier) : default_signature_verifier();
    policy_.threshold = config_.acceptance_threshold;
    policy_.max_depth = config_.max_confirmation_depth;
}

Emission Node::broadcast(ByteView payload, std::int64_t now_ms) {
    Emission e;
    e.packet.header.packet_id = next_packet_id_++;
    e.packet.header.timestamp_ms = static_cast<std::uint64_t>(now_ms);
    e.packet.header.sender = public_key();
    e.packet.payload.assign(payload.begin(), payload.end());
    sign_packet(e.packet, config_.keypair);
    e.bytes = encode_broadcast(e.packet);
    register_origin(e.packet.header.ref(), OriginStatus::Own, e.packet.header.timestamp_ms);
    return e;
}

NodeOutput Node::handle_incoming(ByteView bytes, std::int64_t now_ms) {
    NodeOutput out;
    housekeeping(now_ms, out);

    Packet packet;
    try {
        packet = decode_packet(bytes);
    } catch (const DecodeError&) {
        out.events.push_back(event::Dropped{DropReason::Malformed, std::nullopt});
        return out;
    }

    const PacketHeader& h = std::visit([](const auto& p) -> const PacketHeader& { return p.header; }, packet);
    if (h.sender != public_key()) {
        switch (limiter_.admit(h.sender, now_ms)) {
            case RateLimiter::Decision::Allow: break;
            case RateLimiter::Decision::NewlyBlacklisted:
                out.events.push_back(event::Dropped{DropReason::RateLimited, h.ref()});
                out.events.push_back(event::BlacklistedSender{h.sender});
                return out;
            case RateLimiter::Decision::Limited:
            case RateLimiter::Decision::Blacklisted:
                out.events.push_back(event::Dropped{DropReason::RateLimited, h.ref()});
                return out;
        }
    }

    if (auto* b = std::get_if<BroadcastPacket>(&packet)) {
        process_broadcast(*b, now_ms, out);
    } else {
        process_confirmation(std::get<ConfirmationPacket>(packet), now_ms, out);
    }
    return out;
}

NodeOutput Node::tick(std::int64_t now_ms) {
    NodeOutput out;
    last_housekeeping_ms_ = std::numeric_limits<std::int64_t>::min() / 2;
    housekeeping(now_ms, out);
    return out;
}

bool Node::signature_ok(const PacketHeader& h, const Bytes& region) const {
    return verifier_.signature_verifier(h.sender, region, h.signature);
}

void Node::process_broadcast(const BroadcastPacket& p, std::int64_t now_ms, NodeOutput& out) {
    const auto ref = p.header.ref();
    auto verdict = check(p, now_ms, pool_, dedup_, public_key(), verifier_);
    if (auto* ok = std::get_if<DirectlyVerified>(&verdict)) {
        auto& state = register_origin(ref, OriginStatus::Direct, p.header.timestamp_ms);
        out.events.push_back(event::DirectVerified{ref, ok->sender_position, now_ms, now_ms});
        emit_confirmation(state, ref, ok->sender_position, now_ms, out);
        release_buffered(ref, now_ms, out);
        return;
    }
    const auto reason = std::get<Rejected>(verdict).reason;
    if (reason != RejectReason::SenderNotSensed) {
        out.events.push_back(event::Dropped{drop_reason(reason), ref});
        return;
    }
    // Unseen sender: hold the payload if it is self-consistently signed, and wait for confirmations.
    if (!signature_ok(p.header, signed_region(p))) {
        out.events.push_back(event::Dropped{DropReason::BadSignature, ref});
        return;
    }
    dedup_.record_seen(p.header.sender, p.header.packet_id, now_ms);
    register_origin(ref, OriginStatus::Held, p.header.timestamp_ms);
    out.events.push_back(event::OriginHeld{ref});
    release_buffered(ref, now_ms, out);
    if (auto it = origins_.find(ref); it != origins_.end()) try_indirect_accept(it->second, now_ms, out);
}

void Node::process_confirmation(const ConfirmationPacket& p, std::int64_t now_ms, NodeOutput& out) {
    auto verdict = check(p, now_ms, pool_, dedup_, public_key(), verifier_);
    if (is_verified(verdict)) {
        place_confirmation(p, true, now_ms, out);
        return;
    }
    const auto reason = std::get<Rejected>(verdict).reason;
    if (reason != RejectReason::SenderNotSensed) {
        out.events.push_back(event::Dropped{drop_reason(reason), p.header.ref()});
        return;
    }
    // Structure only: an unsensed confirmer cannot vouch, but its packet links deeper chains.
    if (!signature_ok(p.header, signed_region(p))) {
        out.events.push_back(event::Dropped{DropReason::BadSignature, p.header.ref()});
        return;
    }
    dedup_.record_seen(p.header.sender, p.header.packet_id, now_ms);
    place_confirmation(p, false, now_ms, out);
}

std::optional<PacketRef> Node::origin_of(const PacketRef& packet) const {
    if (origins_.contains(packet)) return packet;
    if (auto it = packet_origin_.find(packet); it != packet_origin_.end()) return it->second;
    return std::nullopt;
}

void Node::place_confirmation(const ConfirmationPacket& p, bool sensed, std::int64_t now_ms, NodeOutput& out) {
    const auto ref = p.header.ref();
    const auto target = p.target();
    const auto origin = origin_of(target);
    if (!origin) {
        buffered_.push_back({p, sensed, now_ms});
        out.events.push_back(event::ConfirmationBuffered{ref, target});
        return;
    }

    auto& state = origins_.at(*origin);
    const auto outcome = state.graph.record_confirmation(ref, target, sensed);
    if (!outcome.accepted()) {
        out.events.push_back(event::Dropped{drop_reason(outcome.status), ref});
        return;
    }
    packet_origin_.emplace(ref, *origin);
    state.offsets.emplace(ref, p.relative);
    out.events.push_back(event::ConfirmationRecorded{*origin, ref, outcome.depth, sensed});

    try_indirect_accept(state, now_ms, out);

    const bool attestable = state.status == OriginStatus::Held || state.status == OriginStatus::Indirect;
    if (sensed && config_.confirm_confirmations && attestable) {
        if (auto pos = pool_.localize(p.header.sender, now_ms)) {
            emit_confirmation(state, ref, *pos, now_ms, out);
        }
    }
    release_buffered(ref, now_ms, out);
}

void Node::release_buffered(const PacketRef& now_known, std::int64_t now_ms, NodeOutput& out) {
    std::vector<BufferedConfirmation> ready;
    std::erase_if(buffered_, [&](const BufferedConfirmation& b) {
        if (b.packet.target() != now_known) return false;
        ready.push_back(b);
        return true;
    });
    for (const auto& b : ready) place_confirmation(b.packet, b.sensed, now_ms, out);
}

void Node::emit_confirmation(OriginState& state, const PacketRef& target, const Position& target_position,
                             std::int64_t now_ms, NodeOutput& out) {
    const PacketRef own{public_key(), next_packet_id_};
    if (!state.graph.record_confirmation(own, target, false).accepted()) return;
    ++next_packet_id_;

    ConfirmationPacket c;
    c.header.packet_id = own.packet_id;
    c.header.timestamp_ms = static_cast<std::uint64_t>(now_ms);
    c.header.sender = public_key();
    c.confirmed_packet_id = target.packet_id;
    c.confirmed_sender = target.sender;
    c.relative = {to_cm(target_position.east - config_.position.east),
                  to_cm(target_position.north - config_.position.north)};
    sign_packet(c, config_.keypair);

    packet_origin_.emplace(own, state.graph.origin());
    state.offsets.emplace(own, c.relative);
    out.outgoing.push_back(encode_confirmation(c));
    out.events.push_back(event::ConfirmationEmitted{target, own});
}

void Node::try_indirect_accept(OriginState& state, std::int64_t now_ms, NodeOutput& out) {
    if (state.status != OriginStatus::Held) return;
    const double confidence = state.graph.confidence(config_.confidence_function);
    if (!state.graph.is_accepted(config_.confidence_function, policy_)) return;
    state.status = OriginStatus::Indirect;

    const auto& origin = state.graph.origin();
    unsigned shallowest = std::numeric_limits<unsigned>::max();
    unsigned deepest = 0;
    std::size_t contributors = 0;
    double east = 0.0, north = 0.0;
    std::size_t located = 0;
    for (const auto& c : state.graph.confirmations()) {
        if (!c.contributes) continue;
        ++contributors;
        shallowest = std::min(shallowest, c.depth);
        deepest = std::max(deepest, c.depth);
        auto confirmer = pool_.localize(c.packet.sender, now_ms);
        if (!confirmer) continue;
        // walk the chain of relative offsets back to the original sender
        std::int64_t de = 0, dn = 0;
        for (PacketRef cur = c.packet; cur != origin; cur = *state.graph.target_of(cur)) {
            const auto& off = state.offsets.at(cur);
            de += off.east_cm;
            dn += off.north_cm;
        }
        east += confirmer->east + static_cast<double>(de) / 100.0;
        north += confirmer->north + static_cast<double>(dn) / 100.0;
        ++located;
    }
    std::optional<Position> estimate;
    if (located > 0) estimate = Position{east / static_cast<double>(located), north / static_cast<double>(located)};
    out.events.push_back(event::IndirectAccepted{origin, estimate, confidence, shallowest + 1, deepest, contributors});
}

Node::OriginState& Node::register_origin(const PacketRef& origin, OriginStatus status, std::uint64_t timestamp_ms) {
    auto [it, inserted] = origins_.try_emplace(
        origin, OriginState{status, ConfirmationGraph(origin, config_.max_confirmation_depth),
                            static_cast<std::int64_t>(timestamp_ms), {}});
    if (!inserted) it->second.status = status;
    return it->second;
}

const ConfirmationGraph* Node::graph_for(const PacketRef& origin) const {
    auto it = origins_.find(origin);
    return it == origins_.end() ? nullptr : &it->second.graph;
}

void Node::housekeeping(std::int64_t now_ms, NodeOutput& out) {
    const auto window = config_.replay_window_ms;
    if (!buffered_.empty()) {
        std::vector<PacketRef> expired;
        std::erase_if(buffered_, [&](const BufferedConfirmation& b) {
            if (now_ms - b.received_ms <= window) return false;
            expired.push_back(b.packet.header.ref());
            return true;
        });
        for (const auto& ref : expired) out.events.push_back(event::Dropped{DropReason::UnknownTarget, ref});
    }

    if (now_ms - last_housekeeping_ms_ < 1000) return;
    last_housekeeping_ms_ = now_ms;
    const auto retention = 2 * window;
    std::erase_if(origins_, [&](const auto& kv) {
        if (kv.second.origin_timestamp_ms >= now_ms - retention) return false;
        for (const auto& c : kv.second.graph.confirmations()) packet_origin_.erase(c.packet);
        return true;
    });
}

// ---------------------------------------------------------------------------- point-to-point

EphemeralKeyPair Node::next_ephemeral() {
    Bytes info{'v', 'a', 'n', 'e', 't', '-', 'p', '2', 'p', '-', 'e', 'p', 'h'};
    for (int i = 0; i < 8; ++i) info.push_back(static_cast<std::uint8_t>(p2p_sessions_ >> (8 * i)));
    ++p2p_sessions_;
    const auto secret = hash32(info, config_.keypair.private_key.bytes);
    return ephemeral_from_secret(secret);
}

P2pOpened Node::open_p2p_session(const PublicKey& peer, std::int64_t now_ms) {
    auto eph = next_ephemeral();
    auto emission = broadcast(encode_handshake({HandshakeKind::Init, peer, eph.public_key}), now_ms);
    return P2pOpened{P2pSession(peer, true, eph), std::move(emission.bytes)};
}

P2pAcceptResult Node::accept_p2p(ByteView handshake, std::int64_t now_ms) {
    BroadcastPacket p;
    try {
        p = decode_broadcast(handshake);
    } catch (const DecodeError&) {
        return P2pFailure{P2pErrc::Malformed, std::nullopt};
    }
    auto hs = decode_handshake(p.payload);
    if (!hs || hs->kind != HandshakeKind::Init) return P2pFailure{P2pErrc::NotHandshake, std::nullopt};
    if (hs->addressed_to != public_key()) return P2pFailure{P2pErrc::NotAddressedToUs, std::nullopt};

    auto verdict = check(p, now_ms, pool_, dedup_, public_key(), verifier_);
    if (auto reason = reject_reason(verdict)) return P2pFailure{P2pErrc::Rejected, reason};

    auto eph = next_ephemeral();
    P2pSession session(p.header.sender, false, eph);
    try {
        session.establish(hs->ephemeral);
    } catch (const CryptoError&) {
        return P2pFailure{P2pErrc::InvalidEphemeralKey, std::nullopt};
    }
    auto response = broadcast(encode_handshake({HandshakeKind::Response, p.header.sender, eph.public_key}), now_ms);
    return P2pOpened{std::move(session), std::move(response.bytes)};
}

std::optional<P2pFailure> Node::complete_p2p(P2pSession& session, ByteView response, std::int64_t now_ms) {
    BroadcastPacket p;
    try {
        p = decode_broadcast(response);
    } catch (const DecodeError&) {
        return P2pFailure{P2pErrc::Malformed, std::nullopt};
    }
    auto hs = decode_handshake(p.payload);
    if (!hs || hs->kind != HandshakeKind::Response) return P2pFailure{P2pErrc::NotHandshake, std::nullopt};
    if (hs->addressed_to != public_key()) return P2pFailure{P2pErrc::NotAddressedToUs, std::nullopt};
    if (p.header.sender != session.peer()) return P2pFailure{P2pErrc::UnexpectedPeer, std::nullopt};

    auto verdict = check(p, now_ms, pool_, dedup_, public_key(), verifier_);
    if (auto reason = reject_reason(verdict)) return P2pFailure{P2pErrc::Rejected, reason};
    try {
        session.establish(hs->ephemeral);
    } catch (const CryptoError&) {
        return P2pFailure{P2pErrc::InvalidEphemeralKey, std::nullopt};
    }
    return std::nullopt;
}

}  // namespace vanet
