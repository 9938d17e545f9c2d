#pragma once

// Deterministic discrete-event simulation of a small VANET. Visibility graphs decide who
// senses whose VAB; a propagation model decides who hears whose radio. Virtual time is in
// microseconds; all randomness comes from one seed.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vanet/node.hpp"

namespace vanet::sim {

enum class GraphKind { TriangularLattice, Line, Complete, Custom };

const char* to_string(GraphKind k);
std::optional<GraphKind> parse_graph_kind(std::string_view s);

struct VisibilityGraph {
    GraphKind kind = GraphKind::Custom;
    std::size_t node_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // undirected, a < b
    std::vector<std::vector<std::uint32_t>> adjacency;           // sorted
    std::vector<Position> positions;

    std::size_t degree(std::uint32_t v) const { return adjacency.at(v).size(); }
    bool connected() const;
};

/// Throws std::invalid_argument for n < 2 or kind == Custom.
VisibilityGraph make_graph(GraphKind kind, std::size_t n);
/// Throws std::invalid_argument on self-loops, duplicate or out-of-range edges.
VisibilityGraph make_custom_graph(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

struct PropagationModel {
    enum class Kind { AdjacencyOnly, GlobalPubSub, FloodingTTL };

    Kind kind = Kind::GlobalPubSub;
    unsigned flood_ttl = 0;               // hops, FloodingTTL only
    std::int64_t base_latency_us = 5'000;
    std::int64_t jitter_us = 5'000;       // uniform in [0, jitter]
    double loss_probability = 0.0;

    static PropagationModel adjacency_only() { return {Kind::AdjacencyOnly}; }
    static PropagationModel global_pubsub() { return {Kind::GlobalPubSub}; }
    static PropagationModel flooding(unsigned ttl) { return {Kind::FloodingTTL, ttl}; }

    void validate() const;
    std::string describe() const;
};

struct LoadProfile {
    unsigned packets_per_node = 5;
    std::int64_t window_ms = 60'000;
    std::vector<std::uint32_t> senders;  // empty: every vehicle sends

    static LoadProfile low() { return {5, 60'000, {}}; }
    static LoadProfile high() { return {60, 60'000, {}}; }
};

struct SimOptions {
    /// Protocol parameters shared by every vehicle; keypair and position are assigned per node.
    NodeConfig node;
    std::int64_t verify_delay_us = 1'000;
    std::size_t payload_bytes = 20;
    std::int64_t epoch_ms = 1'600'000'000'000;
    /// Memoise signature checks across vehicles (results are identical, only faster).
    bool share_signature_cache = true;
};

// ---------------------------------------------------------------------------- event log

struct NetSend {
    PacketRef packet;
    PacketType type;
    std::size_t bytes;
};
struct NetDeliver {
    std::uint32_t from;
    PacketRef packet;
};
struct NetLoss {
    std::uint32_t to;
    PacketRef packet;
};

using RecordBody = std::variant<NetSend, NetDeliver, NetLoss, NodeEvent>;

struct LogRecord {
    std::int64_t time_us = 0;
    std::uint32_t node = 0;
    std::int64_t received_us = 0;  // delivery time of the packet that caused this record
    RecordBody body;
};

struct EventLog {
    std::vector<PublicKey> node_keys;
    std::vector<LogRecord> records;

    /// One line per record: time_ms<TAB>node<TAB>KIND<TAB>fields
    void write(std::ostream& os) const;
    std::string to_text() const;
    std::optional<std::uint32_t> node_of(const PublicKey& key) const;
};

struct VerificationStats {
    std::uint64_t signature_checks = 0;  // real Ed25519 verifications performed
    std::uint64_t verify_ns = 0;         // wall-clock spent in them
    double mean_verify_us() const {
        return signature_checks ? static_cast<double>(verify_ns) / 1000.0 / static_cast<double>(signature_checks) : 0.0;
    }
};

struct SimResult {
    EventLog log;
    VerificationStats verification;  // wall-clock; deliberately not part of the log
};

/// Throws std::invalid_argument on inconsistent configuration (e.g. FloodingTTL(0)).
SimResult run_simulation(const VisibilityGraph& graph, const PropagationModel& propagation,
                         const LoadProfile& load, const SimOptions& options, std::uint64_t seed);

KeyPair node_keypair(std::uint64_t seed, std::uint32_t index);

}  // namespace vanet::sim
