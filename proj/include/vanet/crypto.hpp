#pragma once

// Signing identities, key agreement and the AEAD used by point-to-point channels.
// All functions are pure; libsodium is initialised lazily on first use.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vanet {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kPublicKeyBytes = 32;
inline constexpr std::size_t kSeedBytes = 32;
inline constexpr std::size_t kSignatureBytes = 64;
inline constexpr std::size_t kSymmetricKeyBytes = 32;
inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kAeadTagBytes = 16;

struct PublicKey {
    std::array<std::uint8_t, kPublicKeyBytes> bytes{};
    auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
    std::array<std::uint8_t, kSignatureBytes> bytes{};
    auto operator<=>(const Signature&) const = default;
};

struct Seed {
    std::array<std::uint8_t, kSeedBytes> bytes{};
    bool operator==(const Seed&) const = default;
};

/// Long-term signing identity. The private half is the 32-byte Ed25519 seed.
struct KeyPair {
    Seed private_key;
    PublicKey public_key;
};

struct SymmetricKey {
    std::array<std::uint8_t, kSymmetricKeyBytes> bytes{};
    bool operator==(const SymmetricKey&) const = default;
};

using Nonce = std::array<std::uint8_t, kNonceBytes>;

/// X25519 key material used for one channel handshake only.
struct EphemeralKeyPair {
    std::array<std::uint8_t, 32> secret{};
    PublicKey public_key;
};

enum class CryptoErrc {
    MalformedInput,     // wrong key / seed / signature length
    InvalidPublicKey,   // low-order or otherwise unusable DH point
};

class CryptoError : public std::runtime_error {
public:
    CryptoError(CryptoErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    CryptoErrc code() const noexcept { return code_; }

private:
    CryptoErrc code_;
};

KeyPair generate_keypair(ByteView seed);
KeyPair generate_keypair(const Seed& seed);
/// Fresh identity from the OS entropy source.
KeyPair random_keypair();

Signature sign(const KeyPair& keys, ByteView message);

bool verify(const PublicKey& key, ByteView message, const Signature& sig);
/// Length-checked variant; throws CryptoError(MalformedInput) rather than returning false.
bool verify(ByteView key, ByteView message, ByteView sig);

EphemeralKeyPair ephemeral_from_secret(std::span<const std::uint8_t, 32> secret);

/// Raw X25519 output. Throws CryptoError(InvalidPublicKey) for low-order peers.
SymmetricKey derive_shared_key(const EphemeralKeyPair& own, const PublicKey& peer);

Nonce counter_nonce(std::uint64_t counter);

Bytes seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext);
/// nullopt when authentication fails (tampering or wrong key).
std::optional<Bytes> open(const SymmetricKey& key, const Nonce& nonce, ByteView ciphertext);

/// 32-byte keyed BLAKE2b; `key` may be empty.
std::array<std::uint8_t, 32> hash32(ByteView data, ByteView key = {});

void random_bytes(std::span<std::uint8_t> out);

std::string to_hex(ByteView bytes);
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(const PublicKey& k) { return k.bytes; }
inline ByteView as_bytes(const Signature& s) { return s.bytes; }

}  // namespace vanet

template <>
struct std::hash<vanet::PublicKey> {
    std::size_t operator()(const vanet::PublicKey& k) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | k.bytes[i];
        return h;
    }
};
