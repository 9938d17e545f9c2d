#include "vanet/verifier.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace vanet {

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::Duplicate: return "Duplicate";
        case RejectReason::Expired: return "Expired";
        case RejectReason::TooNew: return "TooNew";
        case RejectReason::OwnPacket: return "OwnPacket";
        case RejectReason::SenderNotSensed: return "SenderNotSensed";
        case RejectReason::BadSignature: return "BadSignature";
        case RejectReason::Malformed: return "Malformed";
    }
    return "?";
}

SignatureVerifier default_signature_verifier() {
    return [](const PublicKey& k, ByteView m, const Signature& s) { return verify(k, m, s); };
}

bool VerificationCache::verify(const PublicKey& key, ByteView message, const Signature& sig) {
    std::string id;
    id.reserve(key.bytes.size() + sig.bytes.size() + message.size());
    id.append(reinterpret_cast<const char*>(key.bytes.data()), key.bytes.size());
    id.append(reinterpret_cast<const char*>(sig.bytes.data()), sig.bytes.size());
    id.append(reinterpret_cast<const char*>(message.data()), message.size());
    if (auto it = results_.find(id); it != results_.end()) return it->second;
    auto start = std::chrono::steady_clock::now();
    bool ok = vanet::verify(key, message, sig);
    verify_ns_ += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
    ++misses_;
    results_.emplace(std::move(id), ok);
    return ok;
}

SignatureVerifier VerificationCache::as_verifier() {
    return [this](const PublicKey& k, ByteView m, const Signature& s) { return verify(k, m, s); };
}

DedupStore::DedupStore(std::int64_t retention_ms) : retention_ms_(retention_ms) {
    if (retention_ms <= 0) throw std::invalid_argument("dedup retention must be positive");
}

void DedupStore::record_seen(const PublicKey& sender, std::uint32_t packet_id, std::int64_t now_ms) {
    PacketRef ref{sender, packet_id};
    if (seen_.insert(ref).second) order_.emplace_back(now_ms, ref);
}

bool DedupStore::seen(const PublicKey& sender, std::uint32_t packet_id) const {
    return seen_.contains(PacketRef{sender, packet_id});
}

std::size_t DedupStore::prune(std::int64_t now_ms) {
    std::size_t dropped = 0;
    while (!order_.empty() && order_.front().first < now_ms - retention_ms_) {
        seen_.erase(order_.front().second);
        order_.pop_front();
        ++dropped;
    }
    return dropped;
}

namespace {

Verdict run_checklist(const PacketHeader& h, const Bytes& region, std::int64_t now_ms,
                      PublicKeyPool& pool, DedupStore& dedup, const PublicKey& own_key,
                      const VerifierSettings& settings) {
    dedup.prune(now_ms);
    if (dedup.seen(h.sender, h.packet_id)) return Rejected{RejectReason::Duplicate};

    if (h.timestamp_ms > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        return Rejected{RejectReason::TooNew};
    }
    const auto ts = static_cast<std::int64_t>(h.timestamp_ms);
    if (now_ms - ts > settings.window_ms) return Rejected{RejectReason::Expired};
    if (ts - now_ms > settings.window_ms) return Rejected{RejectReason::TooNew};

    if (h.sender == own_key) return Rejected{RejectReason::OwnPacket};

    auto entry = pool.lookup(h.sender, now_ms);
    if (!entry) return Rejected{RejectReason::SenderNotSensed};

    bool ok = settings.signature_verifier ? settings.signature_verifier(h.sender, region, h.signature)
                                          : verify(h.sender, region, h.signature);
    if (!ok) return Rejected{RejectReason::BadSignature};

    dedup.record_seen(h.sender, h.packet_id, now_ms);
    return DirectlyVerified{entry->position};
}

}  // namespace

Verdict check(const BroadcastPacket& packet, std::int64_t now_ms, PublicKeyPool& pool,
              DedupStore& dedup, const PublicKey& own_key, const VerifierSettings& settings) {
    return run_checklist(packet.header, signed_region(packet), now_ms, pool, dedup, own_key, settings);
}

Verdict check(const ConfirmationPacket& packet, std::int64_t now_ms, PublicKeyPool& pool,
              DedupStore& dedup, const PublicKey& own_key, const VerifierSettings& settings) {
    return run_checklist(packet.header, signed_region(packet), now_ms, pool, dedup, own_key, settings);
}

}  // namespace vanet
