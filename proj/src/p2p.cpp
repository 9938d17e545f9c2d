#include "vanet/p2p.hpp"

#include <algorithm>
#include <stdexcept>
#include <string_view>

namespace vanet {
namespace {

constexpr std::string_view kMagic = "P2P1";

SymmetricKey direction_key(const SymmetricKey& shared, std::string_view label, const PublicKey& init_eph,
                           const PublicKey& resp_eph) {
    Bytes info(label.begin(), label.end());
    info.insert(info.end(), init_eph.bytes.begin(), init_eph.bytes.end());
    info.insert(info.end(), resp_eph.bytes.begin(), resp_eph.bytes.end());
    SymmetricKey k;
    k.bytes = hash32(info, shared.bytes);
    return k;
}

}  // namespace

const char* to_string(P2pErrc e) {
    switch (e) {
        case P2pErrc::Malformed: return "Malformed";
        case P2pErrc::Rejected: return "Rejected";
        case P2pErrc::NotHandshake: return "NotHandshake";
        case P2pErrc::NotAddressedToUs: return "NotAddressedToUs";
        case P2pErrc::UnexpectedPeer: return "UnexpectedPeer";
        case P2pErrc::InvalidEphemeralKey: return "InvalidEphemeralKey";
    }
    return "?";
}

Bytes encode_handshake(const HandshakeMessage& m) {
    Bytes out(kMagic.begin(), kMagic.end());
    out.push_back(static_cast<std::uint8_t>(m.kind));
    out.insert(out.end(), m.addressed_to.bytes.begin(), m.addressed_to.bytes.end());
    out.insert(out.end(), m.ephemeral.bytes.begin(), m.ephemeral.bytes.end());
    return out;
}

std::optional<HandshakeMessage> decode_handshake(ByteView payload) {
    if (payload.size() != kHandshakePayloadBytes) return std::nullopt;
    if (!std::equal(kMagic.begin(), kMagic.end(), payload.begin())) return std::nullopt;
    HandshakeMessage m;
    auto kind = payload[4];
    if (kind != static_cast<std::uint8_t>(HandshakeKind::Init) &&
        kind != static_cast<std::uint8_t>(HandshakeKind::Response)) {
        return std::nullopt;
    }
    m.kind = static_cast<HandshakeKind>(kind);
    std::copy_n(payload.begin() + 5, 32, m.addressed_to.bytes.begin());
    std::copy_n(payload.begin() + 37, 32, m.ephemeral.bytes.begin());
    return m;
}

P2pSession::P2pSession(PublicKey peer, bool initiator, EphemeralKeyPair ephemeral)
    : peer_(peer), initiator_(initiator), ephemeral_(ephemeral) {}

void P2pSession::establish(const PublicKey& peer_ephemeral) {
    const auto shared = derive_shared_key(ephemeral_, peer_ephemeral);
    const auto& init_eph = initiator_ ? ephemeral_.public_key : peer_ephemeral;
    const auto& resp_eph = initiator_ ? peer_ephemeral : ephemeral_.public_key;
    const auto i2r = direction_key(shared, "vanet-p2p i2r", init_eph, resp_eph);
    const auto r2i = direction_key(shared, "vanet-p2p r2i", init_eph, resp_eph);
    tx_key_ = initiator_ ? i2r : r2i;
    rx_key_ = initiator_ ? r2i : i2r;
    ephemeral_.secret.fill(0);
    established_ = true;
}

Bytes P2pSession::send(ByteView plaintext) {
    if (!established_) throw std::logic_error("p2p session is not established");
    const auto counter = tx_counter_++;
    Bytes frame(8);
    for (int i = 0; i < 8; ++i) frame[7 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
    auto ct = seal(tx_key_, counter_nonce(counter), plaintext);
    frame.insert(frame.end(), ct.begin(), ct.end());
    return frame;
}

std::optional<Bytes> P2pSession::receive(ByteView frame) {
    if (!established_ || frame.size() < 8 + kAeadTagBytes) return std::nullopt;
    std::uint64_t counter = 0;
    for (int i = 0; i < 8; ++i) counter = (counter << 8) | frame[i];
    if (counter < rx_next_) return std::nullopt;
    auto pt = open(rx_key_, counter_nonce(counter), frame.subspan(8));
    if (pt) rx_next_ = counter + 1;
    return pt;
}

}  // namespace vanet
