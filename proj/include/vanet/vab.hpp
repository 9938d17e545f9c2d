#pragma once

// Visual authentication beacon payload ("VAB1:" + 64 lowercase hex digits) and the
// physical QR size needed for a camera to resolve it.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vanet/crypto.hpp"

namespace vanet {

inline constexpr std::string_view kVabPrefix = "VAB1:";
inline constexpr std::size_t kVabPayloadChars = 69;

enum class VabErrc { BadPrefix, BadLength, NonHex };

class VabError : public std::runtime_error {
public:
    VabError(VabErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    VabErrc code() const noexcept { return code_; }

private:
    VabErrc code_;
};

std::string encode_vab(const PublicKey& key);
PublicKey decode_vab(std::string_view payload);

/// QR version 2 (25x25) plus a 4-module quiet zone on each side. Only 32-byte keys are supported.
int qr_modules_for_key(std::size_t key_bytes);

struct QrGeometry {
    double fov_deg = 30.0;        // camera field of view
    double distance_m = 3.0;      // camera to code
    double resolution_px = 8e6;   // total sensor pixels
    double aspect_ratio = 0.75;   // width:height as one number
    double modules = 33.0;        // modules per side incl. quiet zone
    double px_per_module = 3.0;   // minimum pixels to resolve one module
};

/// Throws std::invalid_argument when the geometry is out of domain.
void validate(const QrGeometry& g);

/// Edge length in metres of the smallest recognisable code:
///   2 tan(fov/2) l / sqrt(res / aspect) * modules * px_per_module
double qr_physical_size(const QrGeometry& g);

}  // namespace vanet
