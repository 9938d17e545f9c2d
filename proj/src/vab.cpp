#include "vanet/vab.hpp"

#include <cmath>
#include <numbers>

namespace vanet {

std::string encode_vab(const PublicKey& key) {
    std::string out(kVabPrefix);
    out += to_hex(key.bytes);
    return out;
}

PublicKey decode_vab(std::string_view payload) {
    if (payload.substr(0, kVabPrefix.size()) != kVabPrefix) {
        throw VabError(VabErrc::BadPrefix, "VAB payload must start with \"VAB1:\"");
    }
    if (payload.size() != kVabPayloadChars) {
        throw VabError(VabErrc::BadLength, "VAB payload must be 69 characters, got " +
                                               std::to_string(payload.size()));
    }
    PublicKey key;
    auto hex = payload.substr(kVabPrefix.size());
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    for (std::size_t i = 0; i < key.bytes.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw VabError(VabErrc::NonHex, "VAB payload contains a non lowercase-hex character");
        }
        key.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return key;
}

int qr_modules_for_key(std::size_t key_bytes) {
    if (key_bytes != kPublicKeyBytes) {
        throw std::invalid_argument("only 32-byte keys are supported, got " + std::to_string(key_bytes));
    }
    constexpr int version2_side = 25;
    constexpr int quiet_zone = 4;
    return version2_side + 2 * quiet_zone;
}

void validate(const QrGeometry& g) {
    if (!(g.fov_deg > 0.0 && g.fov_deg < 180.0)) throw std::invalid_argument("fov must be in (0, 180) degrees");
    if (!(g.distance_m >= 0.0) || !std::isfinite(g.distance_m)) throw std::invalid_argument("distance must be >= 0");
    if (!(g.resolution_px > 0.0)) throw std::invalid_argument("resolution must be > 0");
    if (!(g.aspect_ratio > 0.0)) throw std::invalid_argument("aspect ratio must be > 0");
    if (!(g.modules > 0.0)) throw std::invalid_argument("module count must be > 0");
    if (!(g.px_per_module > 0.0)) throw std::invalid_argument("pixels per module must be > 0");
}

double qr_physical_size(const QrGeometry& g) {
    validate(g);
    const double theta = g.fov_deg * std::numbers::pi / 180.0;
    const double view_width = 2.0 * std::tan(theta / 2.0) * g.distance_m;
    const double pixels_across = std::sqrt(g.resolution_px / g.aspect_ratio);
    return view_width / pixels_across * g.modules * g.px_per_module;
}

}  // namespace vanet
