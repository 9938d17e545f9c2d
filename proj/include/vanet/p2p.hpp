#pragma once

// Point-to-point channel between two vehicles. The handshake is a pair of signed
// broadcast packets carrying fresh X25519 keys; afterwards each direction uses its
// own AEAD key with a message counter starting at 0.
//
// handshake payload : "P2P1" | kind(1) 0x01 init / 0x02 response | addressed_to(32) | ephemeral(32)
// data frame        : counter(8, big-endian) | ciphertext | tag(16)

#include <cstdint>
#include <optional>

#include "vanet/crypto.hpp"
#include "vanet/verifier.hpp"

namespace vanet {

inline constexpr std::size_t kHandshakePayloadBytes = 69;

enum class HandshakeKind : std::uint8_t { Init = 0x01, Response = 0x02 };

struct HandshakeMessage {
    HandshakeKind kind = HandshakeKind::Init;
    PublicKey addressed_to;
    PublicKey ephemeral;
};

Bytes encode_handshake(const HandshakeMessage& m);
std::optional<HandshakeMessage> decode_handshake(ByteView payload);

class P2pSession {
public:
    P2pSession(PublicKey peer, bool initiator, EphemeralKeyPair ephemeral);

    const PublicKey& peer() const noexcept { return peer_; }
    bool initiator() const noexcept { return initiator_; }
    bool established() const noexcept { return established_; }
    const PublicKey& ephemeral_public() const noexcept { return ephemeral_.public_key; }

    /// Derives both direction keys. Throws CryptoError for a low-order peer key.
    void establish(const PublicKey& peer_ephemeral);

    /// Throws std::logic_error before the handshake completes.
    Bytes send(ByteView plaintext);
    /// nullopt on authentication failure, malformed frame or a counter already consumed.
    std::optional<Bytes> receive(ByteView frame);

private:
    PublicKey peer_;
    bool initiator_;
    EphemeralKeyPair ephemeral_;
    bool established_ = false;
    SymmetricKey tx_key_;
    SymmetricKey rx_key_;
    std::uint64_t tx_counter_ = 0;
    std::uint64_t rx_next_ = 0;
};

inline Bytes p2p_send(P2pSession& session, ByteView plaintext) { return session.send(plaintext); }
inline std::optional<Bytes> p2p_recv(P2pSession& session, ByteView frame) { return session.receive(frame); }

enum class P2pErrc {
    Malformed,          // not a broadcast packet
    Rejected,           // failed the verification checklist; see `verdict`
    NotHandshake,       // payload is not a handshake of the expected kind
    NotAddressedToUs,
    UnexpectedPeer,     // response from someone other than the session peer
    InvalidEphemeralKey,
};

const char* to_string(P2pErrc e);

struct P2pFailure {
    P2pErrc code;
    std::optional<RejectReason> verdict;
};

}  // namespace vanet
