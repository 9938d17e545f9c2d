#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "vanet/metrics.hpp"

namespace vanet::cli {

struct RunOutcome {
    sim::MetricsReport report;
    sim::VerificationStats verification;
};

/// Runs one scenario and writes report.csv, hops.csv and events.log under its out_dir.
RunOutcome run_scenario(const Scenario& sc);

/// All three graphs at both loads. Writes suite.csv, hops.csv and events/<load>-<graph>.log.
std::vector<RunOutcome> run_suite(const Scenario& base);

/// Entry point; returns the process exit code (0 ok, 1 runtime failure, 2 usage/config error).
int main(int argc, char** argv);

}  // namespace vanet::cli
