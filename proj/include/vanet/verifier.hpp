#pragma once

// The receive-side checklist: duplicate, time window, foreign sender, VAB-sensed sender,
// signature. Checks run in that order and the first failure decides the verdict.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "vanet/key_pool.hpp"
#include "vanet/wire.hpp"

namespace vanet {

enum class RejectReason {
    Duplicate,
    Expired,
    TooNew,
    OwnPacket,
    SenderNotSensed,
    BadSignature,
    Malformed,
};

const char* to_string(RejectReason r);

struct DirectlyVerified {
    Position sender_position;
};

struct Rejected {
    RejectReason reason;
};

using Verdict = std::variant<DirectlyVerified, Rejected>;

inline bool is_verified(const Verdict& v) { return std::holds_alternative<DirectlyVerified>(v); }
inline std::optional<RejectReason> reject_reason(const Verdict& v) {
    if (auto* r = std::get_if<Rejected>(&v)) return r->reason;
    return std::nullopt;
}

using SignatureVerifier = std::function<bool(const PublicKey&, ByteView, const Signature&)>;

/// Plain Ed25519 check.
SignatureVerifier default_signature_verifier();

/// Memoises verification results keyed by the full (key, message, signature) triple.
/// Shared by the simulated vehicles, which all check the same broadcast bytes.
class VerificationCache {
public:
    bool verify(const PublicKey& key, ByteView message, const Signature& sig);

    std::size_t size() const noexcept { return results_.size(); }
    std::uint64_t misses() const noexcept { return misses_; }
    /// Wall-clock nanoseconds spent in real (uncached) verifications.
    std::uint64_t verify_ns() const noexcept { return verify_ns_; }

    SignatureVerifier as_verifier();

private:
    std::unordered_map<std::string, bool> results_;
    std::uint64_t misses_ = 0;
    std::uint64_t verify_ns_ = 0;
};

/// Recently seen (sender, packet id) pairs, kept for `retention_ms` after insertion.
class DedupStore {
public:
    explicit DedupStore(std::int64_t retention_ms);

    void record_seen(const PublicKey& sender, std::uint32_t packet_id, std::int64_t now_ms);
    bool seen(const PublicKey& sender, std::uint32_t packet_id) const;
    /// Drops entries inserted strictly before now - retention. Returns the number dropped.
    std::size_t prune(std::int64_t now_ms);

    std::size_t size() const noexcept { return seen_.size(); }
    std::int64_t retention_ms() const noexcept { return retention_ms_; }

private:
    std::int64_t retention_ms_;
    std::unordered_set<PacketRef> seen_;
    std::deque<std::pair<std::int64_t, PacketRef>> order_;
};

struct VerifierSettings {
    std::int64_t window_ms = 5'000;
    SignatureVerifier signature_verifier;  // empty means default_signature_verifier()
};

Verdict check(const BroadcastPacket& packet, std::int64_t now_ms, PublicKeyPool& pool,
              DedupStore& dedup, const PublicKey& own_key, const VerifierSettings& settings = {});

Verdict check(const ConfirmationPacket& packet, std::int64_t now_ms, PublicKeyPool& pool,
              DedupStore& dedup, const PublicKey& own_key, const VerifierSettings& settings = {});

}  // namespace vanet
