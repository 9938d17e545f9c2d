#include "vanet/key_pool.hpp"

#include <stdexcept>

namespace vanet {

PublicKeyPool::PublicKeyPool(std::int64_t ttl_ms) : ttl_ms_(ttl_ms) {
    if (ttl_ms <= 0) throw std::invalid_argument("PKP ttl must be positive");
}

void PublicKeyPool::observe(const PublicKey& key, Position position,
                            const VehicleSignature& vehicle_signature, std::int64_t now_ms) {
    auto& e = entries_[key];
    e.public_key = key;
    e.position = position;
    e.vehicle_signature = vehicle_signature;
    e.observed_at_ms = now_ms;
}

std::optional<PkpEntry> PublicKeyPool::lookup(const PublicKey& key, std::int64_t now_ms) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    if (expired(it->second, now_ms)) {
        entries_.erase(it);
        return std::nullopt;
    }
    // observed "in the future" relative to the query: not yet visible
    if (it->second.observed_at_ms > now_ms) return std::nullopt;
    return it->second;
}

std::optional<Position> PublicKeyPool::localize(const PublicKey& key, std::int64_t now_ms) {
    auto e = lookup(key, now_ms);
    if (!e) return std::nullopt;
    return e->position;
}

void PublicKeyPool::remove(const PublicKey& key) { entries_.erase(key); }

std::size_t PublicKeyPool::evict_expired(std::int64_t now_ms) {
    return std::erase_if(entries_, [&](const auto& kv) { return expired(kv.second, now_ms); });
}

}  // namespace vanet
