#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "vanet/crypto.hpp"
#include "vanet/vab.hpp"

namespace vanet::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

sim::MetricsReport simulate(const Scenario& sc, sim::GraphKind kind, const std::string& load_name,
                            const fs::path& events_path, sim::VerificationStats& stats) {
    const auto graph = sim::make_graph(kind, sc.nodes);
    auto result = sim::run_simulation(graph, sc.propagation, sc.load, sc.options, sc.seed);
    {
        auto out = open_out(events_path);
        result.log.write(out);
    }
    auto report = sim::compute_metrics(result.log, sc.load);
    report.label = sim::to_string(kind);
    report.load = load_name;
    stats = result.verification;
    return report;
}

void print_diagnostics(const std::vector<RunOutcome>& runs) {
    for (const auto& r : runs) {
        std::printf("%-5s %-10s direct=%zu indirect=%zu deep(>3)=%.2f%% verify_wall=%.1fus\n", r.report.load.c_str(),
                    r.report.label.c_str(), r.report.direct, r.report.indirect, 100.0 * r.report.deep_fraction(),
                    r.verification.mean_verify_us());
    }
}

/// Registers one --key-with-dashes option per config key, collected into `flags`.
void add_setting_flags(CLI::App& app, std::map<std::string, std::string>& flags, bool with_graph) {
    for (const auto& key : known_keys()) {
        if (!with_graph && (key == "graph")) continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        app.add_option(flag, flags[key], "config key '" + key + "'");
    }
}

Scenario resolve(const std::string& config_path, const std::map<std::string, std::string>& flags) {
    Settings settings;
    if (!config_path.empty()) settings = load_config(config_path);
    for (const auto& [key, value] : flags) {
        if (value.empty()) continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        settings[key] = {value, flag};
    }
    return build_scenario(settings);
}

int cmd_qr_size(const QrGeometry& g) {
    validate(g);
    const double m = qr_physical_size(g);
    std::printf("%.4g m (%.4g mm)\n", m, m * 1000.0);
    return 0;
}

int cmd_keygen(const std::string& seed_hex, const std::string& out_path) {
    KeyPair kp;
    if (seed_hex.empty()) {
        kp = random_keypair();
    } else {
        const auto seed = from_hex(seed_hex);
        if (seed.size() != 32) throw ConfigError("--seed: expected 64 hex digits");
        kp = generate_keypair(ByteView(seed));
    }
    std::cout << encode_vab(kp.public_key) << '\n';
    if (!out_path.empty()) {
        auto out = open_out(out_path);
        out << "private_key=" << to_hex(kp.private_key.bytes) << '\n'
            << "public_key=" << to_hex(kp.public_key.bytes) << '\n';
    }
    return 0;
}

}  // namespace

RunOutcome run_scenario(const Scenario& sc) {
    if (!sc.graph) throw ConfigError("missing required key 'graph' (config key 'graph' or --graph)");
    RunOutcome run;
    run.report = simulate(sc, *sc.graph, sc.load_name, sc.out_dir / "events.log", run.verification);
    std::vector<sim::MetricsReport> group{run.report};
    sim::normalize_reachability(group);
    run.report = group.front();
    {
        auto csv = open_out(sc.out_dir / "report.csv");
        sim::write_csv_header(csv);
        sim::write_csv_row(csv, run.report);
    }
    auto hops = open_out(sc.out_dir / "hops.csv");
    sim::write_hops_csv(hops, group);
    return run;
}

std::vector<RunOutcome> run_suite(const Scenario& base) {
    std::vector<RunOutcome> runs;
    const std::pair<const char*, sim::LoadProfile> loads[] = {{"low", sim::LoadProfile::low()},
                                                              {"high", sim::LoadProfile::high()}};
    for (const auto& [name, profile] : loads) {
        Scenario sc = base;
        sc.load.packets_per_node = profile.packets_per_node;
        std::vector<sim::MetricsReport> group;
        std::vector<sim::VerificationStats> stats;
        for (auto kind : {sim::GraphKind::TriangularLattice, sim::GraphKind::Line, sim::GraphKind::Complete}) {
            const auto path = sc.out_dir / "events" / (std::string(name) + "-" + sim::to_string(kind) + ".log");
            stats.emplace_back();
            group.push_back(simulate(sc, kind, name, path, stats.back()));
        }
        sim::normalize_reachability(group);
        for (std::size_t i = 0; i < group.size(); ++i) runs.push_back({group[i], stats[i]});
    }
    std::vector<sim::MetricsReport> reports;
    for (const auto& r : runs) reports.push_back(r.report);
    {
        auto csv = open_out(base.out_dir / "suite.csv");
        sim::write_csv_header(csv);
        for (const auto& r : reports) sim::write_csv_row(csv, r);
    }
    auto hops = open_out(base.out_dir / "hops.csv");
    sim::write_hops_csv(hops, reports);
    return runs;
}

int main(int argc, char** argv) {
    CLI::App app{"Authenticated V2V messaging: simulation runner and key tooling", "vanetauth"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> run_flags;
    auto* run = app.add_subcommand("run", "Simulate one scenario and write its metrics and event log");
    run->add_option("--config", config_path, "key=value scenario file")->check(CLI::ExistingFile);
    add_setting_flags(*run, run_flags, true);

    std::string suite_config;
    std::map<std::string, std::string> suite_flags;
    auto* suite = app.add_subcommand("run-suite", "Simulate all graphs at both loads");
    suite->add_option("--config", suite_config, "key=value scenario file")->check(CLI::ExistingFile);
    add_setting_flags(*suite, suite_flags, false);

    QrGeometry geometry;
    auto* qr = app.add_subcommand("qr-size", "Smallest QR edge a camera can resolve");
    qr->add_option("--fov", geometry.fov_deg, "field of view in degrees")->capture_default_str();
    qr->add_option("--distance", geometry.distance_m, "camera distance in metres")->capture_default_str();
    qr->add_option("--resolution", geometry.resolution_px, "sensor pixels")->capture_default_str();
    qr->add_option("--aspect", geometry.aspect_ratio, "aspect ratio")->capture_default_str();
    qr->add_option("--modules", geometry.modules, "modules per side")->capture_default_str();
    qr->add_option("--px-per-module", geometry.px_per_module, "pixels per module")->capture_default_str();

    std::string seed_hex, key_out;
    auto* keygen = app.add_subcommand("keygen", "Generate a keypair and print its VAB payload");
    keygen->add_option("--seed", seed_hex, "32-byte seed as hex (random if omitted)");
    keygen->add_option("--out", key_out, "write the keypair to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const auto sc = resolve(config_path, run_flags);
            const auto outcome = run_scenario(sc);
            sim::write_table(std::cout, {outcome.report});
            print_diagnostics({outcome});
            std::cout << "wrote " << (sc.out_dir / "report.csv").string() << '\n';
        } else if (suite->parsed()) {
            if (!suite_config.empty() && load_config(suite_config).contains("graph")) {
                throw ConfigError(suite_config + ": 'graph' is fixed by run-suite");
            }
            const auto sc = resolve(suite_config, suite_flags);
            const auto runs = run_suite(sc);
            std::vector<sim::MetricsReport> reports;
            for (const auto& r : runs) reports.push_back(r.report);
            sim::write_table(std::cout, reports);
            print_diagnostics(runs);
            std::cout << "wrote " << (sc.out_dir / "suite.csv").string() << '\n';
        } else if (qr->parsed()) {
            return cmd_qr_size(geometry);
        } else if (keygen->parsed()) {
            return cmd_keygen(seed_hex, key_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace vanet::cli
