#pragma once

// Per-origin confirmation graph. Vertices are vehicles; an edge (s, s') records that s
// confirmed a packet sent by s'. The graph stays acyclic: a confirmation whose edge would
// close a cycle is refused and leaves the graph untouched.
//
// Depth: the origin has depth 0, a confirmation of p has depth(p) + 1.
// Confidence sums a per-confirmation weight over contributing confirmations:
//   Harmonic  1 / (depth + 1)
//   Geometric 1 / 2^depth

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vanet/wire.hpp"

namespace vanet {

enum class ConfidenceFunction { Harmonic, Geometric };

const char* to_string(ConfidenceFunction f);

double confidence_weight(ConfidenceFunction f, unsigned depth);

struct AcceptancePolicy {
    double threshold = 1.0;
    std::optional<unsigned> max_depth;
};

enum class RecordStatus {
    Accepted,
    RejectedCycle,
    RejectedUnknownTarget,
    RejectedDepthCap,
    RejectedDuplicate,  // same confirmation packet, or an existing (confirmer, confirmed-sender) edge
};

const char* to_string(RecordStatus s);

struct RecordOutcome {
    RecordStatus status;
    unsigned depth = 0;  // meaningful when Accepted
    bool accepted() const noexcept { return status == RecordStatus::Accepted; }
};

struct RecordedConfirmation {
    PacketRef packet;
    PacketRef target;
    unsigned depth = 0;
    bool contributes = true;
};

class ConfirmationGraph {
public:
    explicit ConfirmationGraph(PacketRef origin, std::optional<unsigned> max_depth = std::nullopt);

    /// `contributes` = false records structure (depth, edges) without adding confidence.
    RecordOutcome record_confirmation(const PacketRef& confirmation, const PacketRef& target,
                                      bool contributes = true);

    bool contains(const PacketRef& packet) const;
    /// Throws std::out_of_range for packets unknown to the graph.
    unsigned depth(const PacketRef& packet) const;
    /// The packet `packet` confirms; nullopt for the origin. Throws for unknown packets.
    std::optional<PacketRef> target_of(const PacketRef& packet) const;

    double confidence(ConfidenceFunction f) const;
    bool is_accepted(ConfidenceFunction f, const AcceptancePolicy& policy) const;

    const PacketRef& origin() const noexcept { return origin_; }
    const std::vector<RecordedConfirmation>& confirmations() const noexcept { return confirmations_; }
    const std::vector<PublicKey>& vertices() const noexcept { return vertices_; }
    /// Edges as (confirmer, confirmed-sender) vertex indices.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;
    std::size_t edge_count() const noexcept { return edge_count_; }

private:
    std::optional<std::uint32_t> vertex_index(const PublicKey& key) const;
    std::uint32_t ensure_vertex(const PublicKey& key);
    bool reaches(std::uint32_t from, std::uint32_t to) const;
    bool has_edge(std::uint32_t from, std::uint32_t to) const;

    PacketRef origin_;
    std::optional<unsigned> max_depth_;
    std::vector<PublicKey> vertices_;
    std::vector<std::vector<std::uint32_t>> out_edges_;
    std::size_t edge_count_ = 0;
    std::vector<RecordedConfirmation> confirmations_;
    std::unordered_map<PacketRef, std::size_t> index_;  // confirmation packet -> position
};

}  // namespace vanet
