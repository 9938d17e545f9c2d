#include "vanet/crypto.hpp"

#include <sodium.h>

#include <algorithm>

namespace vanet {
namespace {

void ensure_sodium() {
    static const bool ready = [] { return sodium_init() >= 0; }();
    if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded_secret(const KeyPair& keys) {
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    std::copy(keys.private_key.bytes.begin(), keys.private_key.bytes.end(), sk.begin());
    std::copy(keys.public_key.bytes.begin(), keys.public_key.bytes.end(), sk.begin() + kSeedBytes);
    return sk;
}

static_assert(crypto_sign_PUBLICKEYBYTES == kPublicKeyBytes);
static_assert(crypto_sign_BYTES == kSignatureBytes);
static_assert(crypto_sign_SEEDBYTES == kSeedBytes);
static_assert(crypto_scalarmult_BYTES == kSymmetricKeyBytes);
static_assert(crypto_aead_chacha20poly1305_ietf_NPUBBYTES == kNonceBytes);
static_assert(crypto_aead_chacha20poly1305_ietf_ABYTES == kAeadTagBytes);

}  // namespace

KeyPair generate_keypair(ByteView seed) {
    if (seed.size() != kSeedBytes) {
        throw CryptoError(CryptoErrc::MalformedInput,
                          "seed must be 32 bytes, got " + std::to_string(seed.size()));
    }
    Seed s;
    std::copy(seed.begin(), seed.end(), s.bytes.begin());
    return generate_keypair(s);
}

KeyPair generate_keypair(const Seed& seed) {
    ensure_sodium();
    KeyPair kp;
    kp.private_key = seed;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(kp.public_key.bytes.data(), sk.data(), seed.bytes.data());
    sodium_memzero(sk.data(), sk.size());
    return kp;
}

KeyPair random_keypair() {
    Seed seed;
    random_bytes(seed.bytes);
    return generate_keypair(seed);
}

Signature sign(const KeyPair& keys, ByteView message) {
    ensure_sodium();
    auto sk = expanded_secret(keys);
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk.data());
    sodium_memzero(sk.data(), sk.size());
    return sig;
}

bool verify(const PublicKey& key, ByteView message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                       key.bytes.data()) == 0;
}

bool verify(ByteView key, ByteView message, ByteView sig) {
    if (key.size() != kPublicKeyBytes) {
        throw CryptoError(CryptoErrc::MalformedInput,
                          "public key must be 32 bytes, got " + std::to_string(key.size()));
    }
    if (sig.size() != kSignatureBytes) {
        throw CryptoError(CryptoErrc::MalformedInput,
                          "signature must be 64 bytes, got " + std::to_string(sig.size()));
    }
    PublicKey k;
    Signature s;
    std::copy(key.begin(), key.end(), k.bytes.begin());
    std::copy(sig.begin(), sig.end(), s.bytes.begin());
    return verify(k, message, s);
}

EphemeralKeyPair ephemeral_from_secret(std::span<const std::uint8_t, 32> secret) {
    ensure_sodium();
    EphemeralKeyPair eph;
    std::copy(secret.begin(), secret.end(), eph.secret.begin());
    crypto_scalarmult_base(eph.public_key.bytes.data(), eph.secret.data());
    return eph;
}

SymmetricKey derive_shared_key(const EphemeralKeyPair& own, const PublicKey& peer) {
    ensure_sodium();
    SymmetricKey out;
    // libsodium rejects peers whose shared point is the identity (all low-order inputs).
    if (crypto_scalarmult(out.bytes.data(), own.secret.data(), peer.bytes.data()) != 0) {
        throw CryptoError(CryptoErrc::InvalidPublicKey, "peer ephemeral key has low order");
    }
    return out;
}

Nonce counter_nonce(std::uint64_t counter) {
    Nonce n{};
    for (int i = 0; i < 8; ++i) n[kNonceBytes - 1 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
    return n;
}

Bytes seal(const SymmetricKey& key, const Nonce& nonce, ByteView plaintext) {
    ensure_sodium();
    Bytes out(plaintext.size() + kAeadTagBytes);
    unsigned long long len = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &len, plaintext.data(), plaintext.size(),
                                              nullptr, 0, nullptr, nonce.data(), key.bytes.data());
    out.resize(len);
    return out;
}

std::optional<Bytes> open(const SymmetricKey& key, const Nonce& nonce, ByteView ciphertext) {
    ensure_sodium();
    if (ciphertext.size() < kAeadTagBytes) return std::nullopt;
    Bytes out(ciphertext.size() - kAeadTagBytes);
    unsigned long long len = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &len, nullptr, ciphertext.data(),
                                                  ciphertext.size(), nullptr, 0, nonce.data(),
                                                  key.bytes.data()) != 0) {
        return std::nullopt;
    }
    out.resize(len);
    return out;
}

std::array<std::uint8_t, 32> hash32(ByteView data, ByteView key) {
    ensure_sodium();
    std::array<std::uint8_t, 32> out{};
    crypto_generichash(out.data(), out.size(), data.data(), data.size(),
                       key.empty() ? nullptr : key.data(), key.size());
    return out;
}

void random_bytes(std::span<std::uint8_t> out) {
    ensure_sodium();
    randombytes_buf(out.data(), out.size());
}

std::string to_hex(ByteView bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0x0f]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument(std::string("not a hex digit: '") + c + "'");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

}  // namespace vanet
