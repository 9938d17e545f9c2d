#pragma once

// Textbook X25519 (Montgomery ladder over GF(2^255 - 19)) in arbitrary precision.
// Slow and not constant-time; used only to cross-check the production implementation.

#include <array>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace vanet::testing {

using boost::multiprecision::cpp_int;

inline const cpp_int& field_prime() {
    static const cpp_int p = (cpp_int(1) << 255) - 19;
    return p;
}

inline cpp_int from_le(const std::array<std::uint8_t, 32>& b) {
    cpp_int v = 0;
    for (int i = 31; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

inline std::array<std::uint8_t, 32> to_le(cpp_int v) {
    std::array<std::uint8_t, 32> out{};
    for (auto& b : out) {
        b = static_cast<std::uint8_t>(static_cast<unsigned>(v & 0xff));
        v >>= 8;
    }
    return out;
}

inline cpp_int fmod(const cpp_int& v) {
    cpp_int r = v % field_prime();
    return r < 0 ? r + field_prime() : r;
}

inline cpp_int fpow(cpp_int base, cpp_int exp) {
    cpp_int result = 1;
    base = fmod(base);
    while (exp > 0) {
        if ((exp & 1) != 0) result = fmod(result * base);
        base = fmod(base * base);
        exp >>= 1;
    }
    return result;
}

inline std::array<std::uint8_t, 32> x25519_oracle(std::array<std::uint8_t, 32> scalar,
                                                  std::array<std::uint8_t, 32> u_bytes) {
    scalar[0] &= 248;
    scalar[31] &= 127;
    scalar[31] |= 64;
    u_bytes[31] &= 127;
    const cpp_int k = from_le(scalar);
    const cpp_int x1 = fmod(from_le(u_bytes));
    const cpp_int a24 = 121665;

    cpp_int x2 = 1, z2 = 0, x3 = x1, z3 = 1;
    int swap = 0;
    for (int t = 254; t >= 0; --t) {
        const int kt = static_cast<int>(static_cast<unsigned>((k >> t) & 1));
        if (swap ^ kt) {
            std::swap(x2, x3);
            std::swap(z2, z3);
        }
        swap = kt;
        const cpp_int a = fmod(x2 + z2), aa = fmod(a * a);
        const cpp_int b = fmod(x2 - z2), bb = fmod(b * b);
        const cpp_int e = fmod(aa - bb);
        const cpp_int c = fmod(x3 + z3), d = fmod(x3 - z3);
        const cpp_int da = fmod(d * a), cb = fmod(c * b);
        x3 = fmod((da + cb) * (da + cb));
        z3 = fmod(x1 * fmod((da - cb) * (da - cb)));
        x2 = fmod(aa * bb);
        z2 = fmod(e * (aa + a24 * e));
    }
    if (swap) {
        std::swap(x2, x3);
        std::swap(z2, z3);
    }
    return to_le(fmod(x2 * fpow(z2, field_prime() - 2)));
}

inline std::array<std::uint8_t, 32> x25519_base_oracle(const std::array<std::uint8_t, 32>& scalar) {
    std::array<std::uint8_t, 32> nine{};
    nine[0] = 9;
    return x25519_oracle(scalar, nine);
}

}  // namespace vanet::testing
