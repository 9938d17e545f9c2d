#include "vanet/wire.hpp"

#include <algorithm>

namespace vanet {
namespace {

class Writer {
public:
    explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }

    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView in) : in_(in) {}

    std::uint8_t u8() { return in_[pos_++]; }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    template <std::size_t N>
    void raw(std::array<std::uint8_t, N>& dst) {
        std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), N, dst.begin());
        pos_ += N;
    }
    ByteView rest() const { return in_.subspan(pos_); }

private:
    ByteView in_;
    std::size_t pos_ = 0;
};

void check_type(ByteView bytes, PacketType expected) {
    if (bytes.empty()) throw DecodeError(DecodeErrc::Truncated, "empty packet");
    auto t = bytes[0];
    if (t != static_cast<std::uint8_t>(PacketType::Broadcast) &&
        t != static_cast<std::uint8_t>(PacketType::Confirmation)) {
        throw DecodeError(DecodeErrc::UnknownType, "unknown packet type " + std::to_string(t));
    }
    if (t != static_cast<std::uint8_t>(expected)) {
        throw DecodeError(DecodeErrc::UnexpectedType, "packet type " + std::to_string(t) +
                                                          " does not match the requested decoder");
    }
}

void write_prefix(Writer& w, PacketType type, const PacketHeader& h) {
    w.u8(static_cast<std::uint8_t>(type));
    w.u32(h.packet_id);
    w.u64(h.timestamp_ms);
    w.raw(h.sender.bytes);
}

void read_header(Reader& r, PacketHeader& h) {
    r.u8();
    h.packet_id = r.u32();
    h.timestamp_ms = r.u64();
    r.raw(h.sender.bytes);
    r.raw(h.signature.bytes);
}

}  // namespace

const char* to_string(DecodeErrc e) {
    switch (e) {
        case DecodeErrc::Truncated: return "Truncated";
        case DecodeErrc::UnknownType: return "UnknownType";
        case DecodeErrc::UnexpectedType: return "UnexpectedType";
        case DecodeErrc::TrailingBytes: return "TrailingBytes";
    }
    return "?";
}

Bytes encode_broadcast(const BroadcastPacket& p) {
    Writer w(kBroadcastHeaderBytes + p.payload.size());
    write_prefix(w, PacketType::Broadcast, p.header);
    w.raw(p.header.signature.bytes);
    w.raw(p.payload);
    return w.take();
}

BroadcastPacket decode_broadcast(ByteView bytes) {
    check_type(bytes, PacketType::Broadcast);
    if (bytes.size() < kBroadcastHeaderBytes) {
        throw DecodeError(DecodeErrc::Truncated, "broadcast packet needs at least 109 bytes, got " +
                                                     std::to_string(bytes.size()));
    }
    Reader r(bytes);
    BroadcastPacket p;
    read_header(r, p.header);
    auto rest = r.rest();
    p.payload.assign(rest.begin(), rest.end());
    return p;
}

Bytes encode_confirmation(const ConfirmationPacket& p) {
    Writer w(kConfirmationPacketBytes);
    write_prefix(w, PacketType::Confirmation, p.header);
    w.raw(p.header.signature.bytes);
    w.u32(p.confirmed_packet_id);
    w.raw(p.confirmed_sender.bytes);
    w.i32(p.relative.east_cm);
    w.i32(p.relative.north_cm);
    return w.take();
}

ConfirmationPacket decode_confirmation(ByteView bytes) {
    check_type(bytes, PacketType::Confirmation);
    if (bytes.size() < kConfirmationPacketBytes) {
        throw DecodeError(DecodeErrc::Truncated, "confirmation packet needs 153 bytes, got " +
                                                     std::to_string(bytes.size()));
    }
    if (bytes.size() > kConfirmationPacketBytes) {
        throw DecodeError(DecodeErrc::TrailingBytes, "confirmation packet has " +
                                                         std::to_string(bytes.size() - kConfirmationPacketBytes) +
                                                         " trailing bytes");
    }
    Reader r(bytes);
    ConfirmationPacket p;
    read_header(r, p.header);
    p.confirmed_packet_id = r.u32();
    r.raw(p.confirmed_sender.bytes);
    p.relative.east_cm = r.i32();
    p.relative.north_cm = r.i32();
    return p;
}

Packet decode_packet(ByteView bytes) {
    if (bytes.empty()) throw DecodeError(DecodeErrc::Truncated, "empty packet");
    switch (bytes[0]) {
        case static_cast<std::uint8_t>(PacketType::Broadcast): return decode_broadcast(bytes);
        case static_cast<std::uint8_t>(PacketType::Confirmation): return decode_confirmation(bytes);
        default:
            throw DecodeError(DecodeErrc::UnknownType, "unknown packet type " + std::to_string(bytes[0]));
    }
}

Bytes encode_packet(const Packet& p) {
    return std::visit(
        [](const auto& pkt) -> Bytes {
            if constexpr (std::is_same_v<std::decay_t<decltype(pkt)>, BroadcastPacket>) {
                return encode_broadcast(pkt);
            } else {
                return encode_confirmation(pkt);
            }
        },
        p);
}

Bytes signed_region(const BroadcastPacket& p) {
    Writer w(45 + p.payload.size());
    write_prefix(w, PacketType::Broadcast, p.header);
    w.raw(p.payload);
    return w.take();
}

Bytes signed_region(const ConfirmationPacket& p) {
    Writer w(kConfirmationPacketBytes - kSignatureBytes);
    write_prefix(w, PacketType::Confirmation, p.header);
    w.u32(p.confirmed_packet_id);
    w.raw(p.confirmed_sender.bytes);
    w.i32(p.relative.east_cm);
    w.i32(p.relative.north_cm);
    return w.take();
}

void sign_packet(BroadcastPacket& p, const KeyPair& keys) {
    p.header.signature = sign(keys, signed_region(p));
}

void sign_packet(ConfirmationPacket& p, const KeyPair& keys) {
    p.header.signature = sign(keys, signed_region(p));
}

}  // namespace vanet
