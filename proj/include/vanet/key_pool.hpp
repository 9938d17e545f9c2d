#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "vanet/crypto.hpp"

namespace vanet {

/// Metres in the local east/north frame.
struct Position {
    double east = 0.0;
    double north = 0.0;
    bool operator==(const Position&) const = default;
};

using VehicleSignature = std::array<std::uint8_t, 32>;

struct PkpEntry {
    PublicKey public_key;
    Position position;
    VehicleSignature vehicle_signature{};
    std::int64_t observed_at_ms = 0;
};

/// Cache of VAB-sensed public keys. An entry observed at t is visible for lookups at
/// now in [t, t + ttl). Expired entries are evicted lazily by lookup or by evict_expired.
class PublicKeyPool {
public:
    static constexpr std::int64_t kDefaultTtlMs = 60'000;

    explicit PublicKeyPool(std::int64_t ttl_ms = kDefaultTtlMs);

    void observe(const PublicKey& key, Position position, const VehicleSignature& vehicle_signature,
                 std::int64_t now_ms);
    std::optional<PkpEntry> lookup(const PublicKey& key, std::int64_t now_ms);
    std::optional<Position> localize(const PublicKey& key, std::int64_t now_ms);
    void remove(const PublicKey& key);
    std::size_t evict_expired(std::int64_t now_ms);

    std::size_t size() const noexcept { return entries_.size(); }
    std::int64_t ttl_ms() const noexcept { return ttl_ms_; }

private:
    bool expired(const PkpEntry& e, std::int64_t now_ms) const noexcept {
        return now_ms - e.observed_at_ms >= ttl_ms_;
    }

    std::int64_t ttl_ms_;
    std::unordered_map<PublicKey, PkpEntry> entries_;
};

}  // namespace vanet
