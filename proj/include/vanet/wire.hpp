#pragma once

// Byte layouts of the two protocol packets. All integers are big-endian.
//
//   broadcast     : type(1)=0x01 | packet_id(4) | timestamp_ms(8) | sender_key(32) | signature(64)
//                   | payload(...)
//   confirmation  : type(1)=0x02 | packet_id(4) | timestamp_ms(8) | sender_key(32) | signature(64)
//                   | confirmed_packet_id(4) | confirmed_sender_key(32) | east_cm(4) | north_cm(4)
//
// The signature covers every field except itself, in encoding order.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

#include "vanet/crypto.hpp"

namespace vanet {

enum class PacketType : std::uint8_t { Broadcast = 0x01, Confirmation = 0x02 };

inline constexpr std::size_t kBroadcastHeaderBytes = 109;
inline constexpr std::size_t kConfirmationHeaderBytes = 113;
inline constexpr std::size_t kConfirmationMetadataBytes = 40;
inline constexpr std::size_t kConfirmationPacketBytes =
    kConfirmationHeaderBytes + kConfirmationMetadataBytes;

/// Globally unique packet identity; packet ids are only unique per sender.
struct PacketRef {
    PublicKey sender;
    std::uint32_t packet_id = 0;
    auto operator<=>(const PacketRef&) const = default;
};

struct PacketHeader {
    std::uint32_t packet_id = 0;
    std::uint64_t timestamp_ms = 0;
    PublicKey sender;
    Signature signature;
    bool operator==(const PacketHeader&) const = default;

    PacketRef ref() const { return {sender, packet_id}; }
};

struct BroadcastPacket {
    PacketHeader header;
    Bytes payload;
    bool operator==(const BroadcastPacket&) const = default;
};

/// Offset from the confirmer to the confirmed sender, centimetres in a local east/north frame.
struct RelativePosition {
    std::int32_t east_cm = 0;
    std::int32_t north_cm = 0;
    bool operator==(const RelativePosition&) const = default;
};

struct ConfirmationPacket {
    PacketHeader header;
    std::uint32_t confirmed_packet_id = 0;
    PublicKey confirmed_sender;
    RelativePosition relative;
    bool operator==(const ConfirmationPacket&) const = default;

    PacketRef target() const { return {confirmed_sender, confirmed_packet_id}; }
};

using Packet = std::variant<BroadcastPacket, ConfirmationPacket>;

enum class DecodeErrc { Truncated, UnknownType, UnexpectedType, TrailingBytes };

const char* to_string(DecodeErrc e);

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    DecodeErrc code() const noexcept { return code_; }

private:
    DecodeErrc code_;
};

Bytes encode_broadcast(const BroadcastPacket& p);
BroadcastPacket decode_broadcast(ByteView bytes);

Bytes encode_confirmation(const ConfirmationPacket& p);
ConfirmationPacket decode_confirmation(ByteView bytes);

/// Dispatches on the type byte.
Packet decode_packet(ByteView bytes);
Bytes encode_packet(const Packet& p);

/// The exact bytes a packet's signature is computed over.
Bytes signed_region(const BroadcastPacket& p);
Bytes signed_region(const ConfirmationPacket& p);

/// Fill in header.signature for the packet using `keys` (the sender key must already match).
void sign_packet(BroadcastPacket& p, const KeyPair& keys);
void sign_packet(ConfirmationPacket& p, const KeyPair& keys);

}  // namespace vanet

template <>
struct std::hash<vanet::PacketRef> {
    std::size_t operator()(const vanet::PacketRef& r) const noexcept {
        return std::hash<vanet::PublicKey>{}(r.sender) ^ (std::size_t{r.packet_id} * 0x9e3779b97f4a7c15ULL);
    }
};
