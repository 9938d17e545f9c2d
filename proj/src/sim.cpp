#include "vanet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace vanet::sim {

const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::TriangularLattice: return "triangular";
        case GraphKind::Line: return "line";
        case GraphKind::Complete: return "complete";
        case GraphKind::Custom: return "custom";
    }
    return "?";
}

std::optional<GraphKind> parse_graph_kind(std::string_view s) {
    if (s == "triangular" || s == "triangular_lattice" || s == "lattice") return GraphKind::TriangularLattice;
    if (s == "line") return GraphKind::Line;
    if (s == "complete") return GraphKind::Complete;
    return std::nullopt;
}

bool VisibilityGraph::connected() const {
    if (node_count == 0) return true;
    std::vector<char> seen(node_count, 0);
    std::vector<std::uint32_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto w : adjacency[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == node_count;
}

namespace {

void finish(VisibilityGraph& g) {
    g.adjacency.assign(g.node_count, {});
    for (auto& [a, b] : g.edges) {
        if (a > b) std::swap(a, b);
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
    }
    std::sort(g.edges.begin(), g.edges.end());
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
}

// Staggered rows alternating 4 and 3 vehicles: every vehicle sees its lane neighbours and the
// two vehicles diagonally in front and behind. For 21 vehicles this is the 6-row lattice
// 4-3-4-3-4-3. Coordinates use half-lane units so adjacency is |dx| = 2 in a row, |dx| = 1
// between consecutive rows.
VisibilityGraph triangular_lattice(std::size_t n) {
    constexpr int kWideRow = 4;
    constexpr double kLaneWidthM = 3.5;
    constexpr double kRowGapM = 8.0;

    VisibilityGraph g;
    g.kind = GraphKind::TriangularLattice;
    g.node_count = n;
    std::vector<std::pair<int, int>> cell;  // (row, doubled x)
    for (int row = 0; cell.size() < n; ++row) {
        const int width = row % 2 == 0 ? kWideRow : kWideRow - 1;
        for (int i = 0; i < width && cell.size() < n; ++i) cell.emplace_back(row, 2 * i + row % 2);
    }
    for (const auto& [row, x2] : cell) {
        g.positions.push_back({x2 * kLaneWidthM / 2.0, -row * kRowGapM});
    }
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            const int dr = std::abs(cell[a].first - cell[b].first);
            const int dx = std::abs(cell[a].second - cell[b].second);
            if ((dr == 0 && dx == 2) || (dr == 1 && dx == 1)) g.edges.emplace_back(a, b);
        }
    }
    finish(g);
    return g;
}

}  // namespace

VisibilityGraph make_graph(GraphKind kind, std::size_t n) {
    if (n < 2) throw std::invalid_argument("a visibility graph needs at least 2 vehicles");
    VisibilityGraph g;
    switch (kind) {
        case GraphKind::TriangularLattice: return triangular_lattice(n);
        case GraphKind::Line:
            g.kind = kind;
            g.node_count = n;
            for (std::uint32_t i = 0; i < n; ++i) g.positions.push_back({0.0, -10.0 * i});
            for (std::uint32_t i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
            break;
        case GraphKind::Complete:
            g.kind = kind;
            g.node_count = n;
            for (std::uint32_t i = 0; i < n; ++i) {
                const double a = 2.0 * std::numbers::pi * i / static_cast<double>(n);
                g.positions.push_back({20.0 * std::cos(a), 20.0 * std::sin(a)});
                for (std::uint32_t j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
            }
            break;
        case GraphKind::Custom:
            throw std::invalid_argument("use make_custom_graph for custom edge lists");
    }
    finish(g);
    return g;
}

VisibilityGraph make_custom_graph(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
    if (n < 2) throw std::invalid_argument("a visibility graph needs at least 2 vehicles");
    VisibilityGraph g;
    g.kind = GraphKind::Custom;
    g.node_count = n;
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-loops are not allowed");
        g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(g.edges.begin(), g.edges.end());
    if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end()) {
        throw std::invalid_argument("duplicate edge");
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / static_cast<double>(n);
        g.positions.push_back({20.0 * std::cos(a), 20.0 * std::sin(a)});
    }
    finish(g);
    return g;
}

void PropagationModel::validate() const {
    if (kind == Kind::FloodingTTL && flood_ttl == 0) throw std::invalid_argument("flooding TTL must be at least 1");
    if (base_latency_us < 0 || jitter_us < 0) throw std::invalid_argument("latencies must be non-negative");
    if (!(loss_probability >= 0.0 && loss_probability < 1.0)) {
        throw std::invalid_argument("loss probability must be in [0, 1)");
    }
}

std::string PropagationModel::describe() const {
    switch (kind) {
        case Kind::AdjacencyOnly: return "adjacency";
        case Kind::GlobalPubSub: return "global";
        case Kind::FloodingTTL: return "flood:" + std::to_string(flood_ttl);
    }
    return "?";
}

KeyPair node_keypair(std::uint64_t seed, std::uint32_t index) {
    Bytes info{'v', 'a', 'n', 'e', 't', '-', 's', 'i', 'm', '-', 'n', 'o', 'd', 'e'};
    for (int i = 0; i < 8; ++i) info.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    for (int i = 0; i < 4; ++i) info.push_back(static_cast<std::uint8_t>(index >> (8 * i)));
    Seed s;
    s.bytes = hash32(info);
    return generate_keypair(s);
}

// ---------------------------------------------------------------------------- event log

std::optional<std::uint32_t> EventLog::node_of(const PublicKey& key) const {
    auto it = std::find(node_keys.begin(), node_keys.end(), key);
    if (it == node_keys.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it - node_keys.begin());
}

namespace {

class RecordPrinter {
public:
    RecordPrinter(const EventLog& log, std::ostream& os) : os_(os) {
        for (std::uint32_t i = 0; i < log.node_keys.size(); ++i) index_.emplace(log.node_keys[i], i);
    }

    void operator()(const NetSend& s) {
        os_ << "NET_SEND\tpkt=" << ref(s.packet) << " type=" << type(s.type) << " bytes=" << s.bytes;
    }
    void operator()(const NetDeliver& d) { os_ << "NET_DELIVER\tfrom=" << d.from << " pkt=" << ref(d.packet); }
    void operator()(const NetLoss& l) { os_ << "NET_LOSS\tto=" << l.to << " pkt=" << ref(l.packet); }
    void operator()(const NodeEvent& e) {
        os_ << event_name(e) << '\t';
        std::visit(*this, e);
    }

    void operator()(const event::Sent& e) { os_ << "pkt=" << ref(e.packet) << " type=" << type(e.type); }
    void operator()(const event::DirectVerified& e) {
        os_ << "origin=" << ref(e.origin) << " pos=" << pos(e.sender_position);
    }
    void operator()(const event::OriginHeld& e) { os_ << "origin=" << ref(e.origin); }
    void operator()(const event::ConfirmationRecorded& e) {
        os_ << "origin=" << ref(e.origin) << " conf=" << ref(e.confirmation) << " depth=" << e.depth
            << " contributes=" << (e.contributes ? 1 : 0);
    }
    void operator()(const event::ConfirmationBuffered& e) {
        os_ << "conf=" << ref(e.confirmation) << " target=" << ref(e.target);
    }
    void operator()(const event::IndirectAccepted& e) {
        char conf[32];
        std::snprintf(conf, sizeof conf, "%.6f", e.confidence);
        os_ << "origin=" << ref(e.origin) << " pos=" << (e.estimated_position ? pos(*e.estimated_position) : "-")
            << " confidence=" << conf << " hops=" << e.hop_count << " deepest=" << e.deepest
            << " contributors=" << e.contributors;
    }
    void operator()(const event::ConfirmationEmitted& e) {
        os_ << "target=" << ref(e.target) << " conf=" << ref(e.confirmation);
    }
    void operator()(const event::Dropped& e) {
        os_ << "reason=" << to_string(e.reason) << " pkt=" << (e.packet ? ref(*e.packet) : "-");
    }
    void operator()(const event::BlacklistedSender& e) { os_ << "sender=" << key(e.key); }

private:
    std::string key(const PublicKey& k) const {
        if (auto it = index_.find(k); it != index_.end()) return "n" + std::to_string(it->second);
        return "k" + to_hex(ByteView(k.bytes).first(4));
    }
    std::string ref(const PacketRef& r) const { return key(r.sender) + "#" + std::to_string(r.packet_id); }
    static const char* type(PacketType t) { return t == PacketType::Broadcast ? "broadcast" : "confirmation"; }
    static std::string pos(const Position& p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f", p.east + 0.0, p.north + 0.0);  // no "-0.00"
        return buf;
    }

    std::ostream& os_;
    std::unordered_map<PublicKey, std::uint32_t> index_;
};

}  // namespace

void EventLog::write(std::ostream& os) const {
    RecordPrinter printer(*this, os);
    char buf[48];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%lld.%03lld\t%u\t", static_cast<long long>(r.time_us / 1000),
                      static_cast<long long>(r.time_us % 1000), r.node);
        os << buf;
        std::visit(printer, r.body);
        os << '\n';
    }
}

std::string EventLog::to_text() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

// ---------------------------------------------------------------------------- simulation

namespace {

struct QueueItem {
    enum class Kind { Originate, Deliver, Process };

    std::int64_t time_us;
    std::uint64_t seq;
    Kind kind;
    std::uint32_t node;
    std::uint32_t from;
    std::int64_t delivered_us;
    std::shared_ptr<const Bytes> bytes;

    bool operator>(const QueueItem& o) const {
        return time_us != o.time_us ? time_us > o.time_us : seq > o.seq;
    }
};

class Simulation {
public:
    Simulation(const VisibilityGraph& graph, const PropagationModel& prop, const LoadProfile& load,
               const SimOptions& options, std::uint64_t seed)
        : graph_(graph), prop_(prop), load_(load), options_(options), rng_(seed) {
        const auto n = graph.node_count;
        if (options.share_signature_cache) cache_ = std::make_unique<VerificationCache>();
        for (std::uint32_t i = 0; i < n; ++i) {
            NodeConfig cfg = options.node;
            cfg.keypair = node_keypair(seed, i);
            cfg.position = graph.positions.at(i);
            log_.node_keys.push_back(cfg.keypair.public_key);
            nodes_.emplace_back(std::move(cfg), cache_ ? cache_->as_verifier() : SignatureVerifier{});
            Bytes tag{'v', 'e', 'h', 'i', 'c', 'l', 'e'};
            for (int b = 0; b < 4; ++b) tag.push_back(static_cast<std::uint8_t>(i >> (8 * b)));
            appearance_.push_back(hash32(tag));
        }
        last_refresh_us_.assign(n, -1);
        fifo_.assign(n, std::vector<std::int64_t>(n, 0));
        if (prop.kind == PropagationModel::Kind::FloodingTTL) hop_distance_ = all_pairs_hops();
    }

    SimResult run() {
        schedule_originals();
        std::int64_t end_us = 0;
        while (!queue_.empty()) {
            auto item = queue_.top();
            queue_.pop();
            end_us = item.time_us;
            switch (item.kind) {
                case QueueItem::Kind::Originate: originate(item.node, item.time_us); break;
                case QueueItem::Kind::Deliver: deliver(item); break;
                case QueueItem::Kind::Process: process(item); break;
            }
        }
        // flush buffered confirmations that can no longer be placed
        const auto final_us = end_us + (options_.node.replay_window_ms + 1) * 1000;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            auto out = nodes_[i].tick(now_ms(final_us));
            for (auto& e : out.events) log_.records.push_back({final_us, i, final_us, std::move(e)});
        }

        SimResult result;
        result.log = std::move(log_);
        if (cache_) {
            result.verification = {cache_->misses(), cache_->verify_ns()};
        }
        return result;
    }

private:
    std::int64_t now_ms(std::int64_t t_us) const { return options_.epoch_ms + t_us / 1000; }

    std::uint64_t uniform(std::uint64_t bound) { return bound == 0 ? 0 : rng_() % (bound + 1); }
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    void schedule_originals() {
        const auto window_us = static_cast<std::uint64_t>(load_.window_ms) * 1000;
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            if (!load_.senders.empty() && std::find(load_.senders.begin(), load_.senders.end(), i) == load_.senders.end()) {
                continue;
            }
            for (unsigned k = 0; k < load_.packets_per_node; ++k) {
                const auto at = static_cast<std::int64_t>(rng_() % window_us);
                push({at, 0, QueueItem::Kind::Originate, i, i, at, nullptr});
            }
        }
    }

    void push(QueueItem item) {
        item.seq = seq_++;
        queue_.push(std::move(item));
    }

    void refresh_sensing(std::uint32_t node, std::int64_t t_us) {
        if (last_refresh_us_[node] >= 0 && t_us - last_refresh_us_[node] < 1'000'000) return;
        last_refresh_us_[node] = t_us;
        auto& pool = nodes_[node].pool();
        for (auto nb : graph_.adjacency[node]) {
            pool.observe(log_.node_keys[nb], graph_.positions[nb], appearance_[nb], now_ms(t_us));
        }
    }

    void originate(std::uint32_t node, std::int64_t t_us) {
        refresh_sensing(node, t_us);
        Bytes payload(options_.payload_bytes, 0);
        const auto id = nodes_[node].next_packet_id();
        for (std::size_t b = 0; b < payload.size() && b < 8; ++b) {
            payload[b] = static_cast<std::uint8_t>((b < 4 ? node : id) >> (8 * (b % 4)));
        }
        auto e = nodes_[node].broadcast(payload, now_ms(t_us));
        const auto ref = e.packet.header.ref();
        log_.records.push_back({t_us, node, t_us, NodeEvent{event::Sent{ref, PacketType::Broadcast}}});
        send(node, ref, PacketType::Broadcast, std::make_shared<const Bytes>(std::move(e.bytes)), t_us);
    }

    void deliver(const QueueItem& item) {
        log_.records.push_back({item.time_us, item.node, item.time_us, NetDeliver{item.from, peek_ref(*item.bytes)}});
        push({item.time_us + options_.verify_delay_us, 0, QueueItem::Kind::Process, item.node, item.from, item.time_us,
              item.bytes});
    }

    // Verification finishes a fixed virtual delay after delivery.
    void process(const QueueItem& item) {
        const auto to = item.node;
        const auto done_us = item.time_us;
        refresh_sensing(to, done_us);
        auto out = nodes_[to].handle_incoming(*item.bytes, now_ms(done_us));
        for (auto& e : out.events) log_.records.push_back({done_us, to, item.delivered_us, std::move(e)});
        for (auto& o : out.outgoing) {
            const auto ref = peek_ref(o);
            const auto type = static_cast<PacketType>(o.at(0));
            send(to, ref, type, std::make_shared<const Bytes>(std::move(o)), done_us);
        }
    }

    static PacketRef peek_ref(const Bytes& b) {
        PacketRef r;
        if (b.size() < 45) return r;
        for (int i = 0; i < 4; ++i) r.packet_id = (r.packet_id << 8) | b[1 + i];
        std::copy_n(b.begin() + 13, 32, r.sender.bytes.begin());
        return r;
    }

    void send(std::uint32_t from, const PacketRef& ref, PacketType type, std::shared_ptr<const Bytes> bytes,
              std::int64_t t_us) {
        log_.records.push_back({t_us, from, t_us, NetSend{ref, type, bytes->size()}});
        for (std::uint32_t to = 0; to < nodes_.size(); ++to) {
            if (to == from) continue;
            unsigned hops = 1;
            switch (prop_.kind) {
                case PropagationModel::Kind::AdjacencyOnly:
                    if (!std::binary_search(graph_.adjacency[from].begin(), graph_.adjacency[from].end(), to)) continue;
                    break;
                case PropagationModel::Kind::GlobalPubSub: break;
                case PropagationModel::Kind::FloodingTTL:
                    hops = hop_distance_[from][to];
                    if (hops == 0 || hops > prop_.flood_ttl) continue;
                    break;
            }
            if (prop_.loss_probability > 0.0 && unit() < prop_.loss_probability) {
                log_.records.push_back({t_us, from, t_us, NetLoss{to, ref}});
                continue;
            }
            std::int64_t latency = 0;
            for (unsigned h = 0; h < hops; ++h) {
                latency += prop_.base_latency_us + static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(prop_.jitter_us)));
            }
            auto& last = fifo_[from][to];
            const auto at = std::max(t_us + latency, last);
            last = at;
            push({at, 0, QueueItem::Kind::Deliver, to, from, at, bytes});
        }
    }

    std::vector<std::vector<unsigned>> all_pairs_hops() const {
        const auto n = graph_.node_count;
        std::vector<std::vector<unsigned>> dist(n, std::vector<unsigned>(n, 0));
        for (std::uint32_t s = 0; s < n; ++s) {
            std::vector<std::uint32_t> frontier{s};
            std::vector<char> seen(n, 0);
            seen[s] = 1;
            for (unsigned d = 1; !frontier.empty(); ++d) {
                std::vector<std::uint32_t> next;
                for (auto v : frontier) {
                    for (auto w : graph_.adjacency[v]) {
                        if (!seen[w]) {
                            seen[w] = 1;
                            dist[s][w] = d;
                            next.push_back(w);
                        }
                    }
                }
                frontier = std::move(next);
            }
        }
        return dist;
    }

    const VisibilityGraph& graph_;
    PropagationModel prop_;
    LoadProfile load_;
    SimOptions options_;
    std::mt19937_64 rng_;
    std::unique_ptr<VerificationCache> cache_;
    std::vector<Node> nodes_;
    std::vector<VehicleSignature> appearance_;
    std::vector<std::int64_t> last_refresh_us_;
    std::vector<std::vector<std::int64_t>> fifo_;
    std::vector<std::vector<unsigned>> hop_distance_;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    EventLog log_;
};

}  // namespace

SimResult run_simulation(const VisibilityGraph& graph, const PropagationModel& propagation,
                         const LoadProfile& load, const SimOptions& options, std::uint64_t seed) {
    propagation.validate();
    options.node.validate();
    if (graph.node_count < 2 || graph.positions.size() != graph.node_count) {
        throw std::invalid_argument("graph is not initialised");
    }
    if (load.window_ms <= 0) throw std::invalid_argument("load window must be positive");
    for (auto s : load.senders) {
        if (s >= graph.node_count) throw std::invalid_argument("sender index out of range");
    }
    if (options.verify_delay_us < 0) throw std::invalid_argument("verification delay must be non-negative");
    return Simulation(graph, propagation, load, options, seed).run();
}

}  // namespace vanet::sim
