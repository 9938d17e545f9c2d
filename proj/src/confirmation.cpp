#include "vanet/confirmation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vanet {

const char* to_string(ConfidenceFunction f) {
    return f == ConfidenceFunction::Harmonic ? "harmonic" : "geometric";
}

double confidence_weight(ConfidenceFunction f, unsigned depth) {
    switch (f) {
        case ConfidenceFunction::Harmonic: return 1.0 / (static_cast<double>(depth) + 1.0);
        case ConfidenceFunction::Geometric: return std::ldexp(1.0, -static_cast<int>(depth));
    }
    return 0.0;
}

const char* to_string(RecordStatus s) {
    switch (s) {
        case RecordStatus::Accepted: return "Accepted";
        case RecordStatus::RejectedCycle: return "Cycle";
        case RecordStatus::RejectedUnknownTarget: return "UnknownTarget";
        case RecordStatus::RejectedDepthCap: return "DepthCap";
        case RecordStatus::RejectedDuplicate: return "DuplicateConfirmation";
    }
    return "?";
}

ConfirmationGraph::ConfirmationGraph(PacketRef origin, std::optional<unsigned> max_depth)
    : origin_(origin), max_depth_(max_depth) {
    ensure_vertex(origin.sender);
}

std::optional<std::uint32_t> ConfirmationGraph::vertex_index(const PublicKey& key) const {
    auto it = std::find(vertices_.begin(), vertices_.end(), key);
    if (it == vertices_.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it - vertices_.begin());
}

std::uint32_t ConfirmationGraph::ensure_vertex(const PublicKey& key) {
    if (auto idx = vertex_index(key)) return *idx;
    vertices_.push_back(key);
    out_edges_.emplace_back();
    return static_cast<std::uint32_t>(vertices_.size() - 1);
}

bool ConfirmationGraph::has_edge(std::uint32_t from, std::uint32_t to) const {
    const auto& out = out_edges_[from];
    return std::find(out.begin(), out.end(), to) != out.end();
}

bool ConfirmationGraph::reaches(std::uint32_t from, std::uint32_t to) const {
    if (from == to) return true;
    std::vector<char> visited(vertices_.size(), 0);
    std::vector<std::uint32_t> stack{from};
    visited[from] = 1;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto w : out_edges_[v]) {
            if (w == to) return true;
            if (!visited[w]) {
                visited[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return false;
}

RecordOutcome ConfirmationGraph::record_confirmation(const PacketRef& confirmation,
                                                     const PacketRef& target, bool contributes) {
    if (!contains(target)) return {RecordStatus::RejectedUnknownTarget};
    if (contains(confirmation)) return {RecordStatus::RejectedDuplicate};

    const unsigned d = depth(target) + 1;
    if (max_depth_ && d > *max_depth_) return {RecordStatus::RejectedDepthCap};

    const auto confirmer = vertex_index(confirmation.sender);
    const auto confirmed = *vertex_index(target.sender);
    if (confirmer) {
        if (has_edge(*confirmer, confirmed)) return {RecordStatus::RejectedDuplicate};
        // adding confirmer -> confirmed closes a cycle iff confirmed already reaches confirmer
        if (reaches(confirmed, *confirmer)) return {RecordStatus::RejectedCycle};
    } else if (confirmation.sender == target.sender) {
        return {RecordStatus::RejectedCycle};
    }

    const auto from = ensure_vertex(confirmation.sender);
    out_edges_[from].push_back(confirmed);
    ++edge_count_;
    index_.emplace(confirmation, confirmations_.size());
    confirmations_.push_back({confirmation, target, d, contributes});
    return {RecordStatus::Accepted, d};
}

bool ConfirmationGraph::contains(const PacketRef& packet) const {
    return packet == origin_ || index_.contains(packet);
}

unsigned ConfirmationGraph::depth(const PacketRef& packet) const {
    if (packet == origin_) return 0;
    auto it = index_.find(packet);
    if (it == index_.end()) throw std::out_of_range("packet is not part of this confirmation graph");
    return confirmations_[it->second].depth;
}

std::optional<PacketRef> ConfirmationGraph::target_of(const PacketRef& packet) const {
    if (packet == origin_) return std::nullopt;
    auto it = index_.find(packet);
    if (it == index_.end()) throw std::out_of_range("packet is not part of this confirmation graph");
    return confirmations_[it->second].target;
}

double ConfirmationGraph::confidence(ConfidenceFunction f) const {
    double total = 0.0;
    for (const auto& c : confirmations_) {
        if (c.contributes) total += confidence_weight(f, c.depth);
    }
    return total;
}

bool ConfirmationGraph::is_accepted(ConfidenceFunction f, const AcceptancePolicy& policy) const {
    // 1/3 + 1/3 + 1/3 must meet a threshold of 1 despite rounding
    constexpr double kSlack = 1e-12;
    return confidence(f) >= policy.threshold - kSlack;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ConfirmationGraph::edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(edge_count_);
    for (std::uint32_t v = 0; v < out_edges_.size(); ++v) {
        for (auto w : out_edges_[v]) out.emplace_back(v, w);
    }
    return out;
}

}  // namespace vanet
