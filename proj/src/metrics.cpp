#include "vanet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <unordered_map>

namespace vanet::sim {

namespace {

struct Reception {
    std::int64_t created_us;
    std::int64_t delivered_us;
    std::int64_t verified_us;
    unsigned hops;
    bool indirect;
    unsigned deepest;
};

std::vector<Reception> receptions(const EventLog& log, std::size_t& originals) {
    std::unordered_map<PacketRef, std::int64_t> created;
    std::set<std::pair<std::uint32_t, PacketRef>> decided;
    std::vector<Reception> out;
    originals = 0;
    for (const auto& r : log.records) {
        const auto* ev = std::get_if<NodeEvent>(&r.body);
        if (!ev) continue;
        if (const auto* s = std::get_if<event::Sent>(ev)) {
            if (s->type == PacketType::Broadcast) {
                ++originals;
                created.emplace(s->packet, r.time_us);
            }
            continue;
        }
        PacketRef origin;
        unsigned hops = 1;
        unsigned deepest = 0;
        bool indirect = false;
        if (const auto* d = std::get_if<event::DirectVerified>(ev)) {
            origin = d->origin;
        } else if (const auto* a = std::get_if<event::IndirectAccepted>(ev)) {
            origin = a->origin;
            hops = a->hop_count;
            deepest = a->deepest;
            indirect = true;
        } else {
            continue;
        }
        auto c = created.find(origin);
        if (c == created.end()) continue;
        if (!decided.emplace(r.node, origin).second) continue;
        out.push_back({c->second, r.received_us, r.time_us, hops, indirect, deepest});
    }
    return out;
}

}  // namespace

MetricsReport compute_metrics(const EventLog& log, const LoadProfile& load) {
    MetricsReport rep;
    rep.load = load.packets_per_node == LoadProfile::high().packets_per_node ? "high"
               : load.packets_per_node == LoadProfile::low().packets_per_node ? "low"
                                                                               : std::to_string(load.packets_per_node);
    const auto recs = receptions(log, rep.originals_sent);
    rep.receptions = recs.size();
    double t = 0.0, tn = 0.0, tv = 0.0, hops = 0.0;
    std::map<unsigned, double> delay_sum;
    for (const auto& r : recs) {
        const double total = static_cast<double>(r.verified_us - r.created_us) / 1000.0;
        t += total;
        tn += static_cast<double>(r.delivered_us - r.created_us) / 1000.0;
        tv += static_cast<double>(r.verified_us - r.delivered_us) / 1000.0;
        hops += r.hops;
        ++rep.hop_histogram[r.hops];
        delay_sum[r.hops] += total;
        if (r.indirect) {
            ++rep.indirect;
            if (r.deepest > 3) ++rep.deep_acceptances;
        } else {
            ++rep.direct;
        }
    }
    if (!recs.empty()) {
        const auto n = static_cast<double>(recs.size());
        rep.mean_processing_delay_ms = t / n;
        rep.mean_network_delay_ms = tn / n;
        rep.mean_verification_delay_ms = tv / n;
        rep.mean_hops = hops / n;
    }
    for (const auto& [h, sum] : delay_sum) {
        rep.delay_by_hop_ms[h] = sum / static_cast<double>(rep.hop_histogram[h]);
    }
    if (rep.originals_sent) {
        rep.reachability = static_cast<double>(rep.receptions) / static_cast<double>(rep.originals_sent);
    }
    return rep;
}

std::map<unsigned, std::size_t> hop_histogram(const EventLog& log) {
    std::size_t originals = 0;
    std::map<unsigned, std::size_t> h;
    for (const auto& r : receptions(log, originals)) ++h[r.hops];
    return h;
}

void normalize_reachability(std::vector<MetricsReport>& group) {
    double best = 0.0;
    for (const auto& r : group) best = std::max(best, r.reachability);
    for (auto& r : group) r.relative_reachability = best > 0.0 ? 100.0 * r.reachability / best : 0.0;
}

void write_csv_header(std::ostream& os) { os << "load,graph,mu_t_ms,mu_tN_ms,mu_H,R,R_pct\n"; }

void write_csv_row(std::ostream& os, const MetricsReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.2f,%.2f,%.2f", r.mean_processing_delay_ms, r.mean_network_delay_ms,
                  r.mean_hops, r.reachability, r.relative_reachability);
    os << r.load << ',' << r.label << ',' << buf << '\n';
}

void write_hops_csv(std::ostream& os, const std::vector<MetricsReport>& reports) {
    os << "load,graph,hops,receptions,mean_delay_ms\n";
    char buf[64];
    for (const auto& r : reports) {
        for (const auto& [h, count] : r.hop_histogram) {
            std::snprintf(buf, sizeof buf, "%.3f", r.delay_by_hop_ms.at(h));
            os << r.load << ',' << r.label << ',' << h << ',' << count << ',' << buf << '\n';
        }
    }
}

void write_table(std::ostream& os, const std::vector<MetricsReport>& reports) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-6s %-11s %12s %12s %10s %7s %8s %8s\n", "load", "graph", "mu_t (ms)",
                  "mu_tN (ms)", "mu_tV (ms)", "mu_H", "R", "R_%");
    os << buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-6s %-11s %12.3f %12.3f %10.3f %7.2f %8.2f %7.2f%%\n", r.load.c_str(),
                      r.label.c_str(), r.mean_processing_delay_ms, r.mean_network_delay_ms,
                      r.mean_verification_delay_ms, r.mean_hops, r.reachability, r.relative_reachability);
        os << buf;
    }
}

}  // namespace vanet::sim
