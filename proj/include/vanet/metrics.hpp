#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vanet/sim.hpp"

namespace vanet::sim {

struct MetricsReport {
    std::string label;            // graph name
    std::string load;             // load name
    std::size_t originals_sent = 0;
    std::size_t receptions = 0;   // first verified reception per (receiver, original)
    std::size_t direct = 0;
    std::size_t indirect = 0;

    double mean_processing_delay_ms = 0.0;    // creation -> verified
    double mean_network_delay_ms = 0.0;       // creation -> delivery of the deciding packet
    double mean_verification_delay_ms = 0.0;  // delivery -> verified
    double mean_hops = 0.0;
    double reachability = 0.0;                // receptions / originals_sent
    double relative_reachability = 0.0;       // percent of the best reachability at this load

    std::map<unsigned, std::size_t> hop_histogram;
    std::map<unsigned, double> delay_by_hop_ms;

    std::size_t deep_acceptances = 0;  // indirect acceptances with a contributor deeper than 3
    double deep_fraction() const {
        return indirect ? static_cast<double>(deep_acceptances) / static_cast<double>(indirect) : 0.0;
    }
};

MetricsReport compute_metrics(const EventLog& log, const LoadProfile& load);

std::map<unsigned, std::size_t> hop_histogram(const EventLog& log);

/// Sets relative_reachability for each report against the maximum in the group.
void normalize_reachability(std::vector<MetricsReport>& group);

/// Columns: load, graph, mu_t_ms, mu_tN_ms, mu_H, R, R_pct.
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const MetricsReport& r);
void write_hops_csv(std::ostream& os, const std::vector<MetricsReport>& reports);
void write_table(std::ostream& os, const std::vector<MetricsReport>& reports);

}  // namespace vanet::sim
