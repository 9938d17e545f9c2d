#pragma once

// Flat key=value scenario configuration for the experiment runner. Values may come from a
// config file and from command-line overrides; every error carries its origin.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vanet/sim.hpp"

namespace vanet::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A raw value and where it came from ("file.cfg:3" or "--flag").
struct Setting {
    std::string value;
    std::string origin;
};

using Settings = std::map<std::string, Setting>;

/// Keys accepted in config files and as --key-with-dashes flags.
const std::vector<std::string>& known_keys();

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError naming the line.
Settings parse_config(std::istream& in, const std::string& source_name);
Settings load_config(const std::filesystem::path& path);

struct Scenario {
    std::optional<sim::GraphKind> graph;
    std::size_t nodes = 21;
    sim::LoadProfile load = sim::LoadProfile::low();
    std::string load_name = "low";
    sim::PropagationModel propagation = sim::PropagationModel::global_pubsub();
    std::uint64_t seed = 1;
    sim::SimOptions options;
    std::filesystem::path out_dir;

    /// Defaults shared by every run: the protocol's node defaults with a rate limit sized
    /// for honest traffic in a dense 21-vehicle scenario.
    static Scenario defaults();
};

/// Applies settings over `base`. Throws ConfigError naming the offending origin.
Scenario build_scenario(const Settings& settings, Scenario base = Scenario::defaults());

/// Directory used when no out_dir is configured: $VANET_OUT_DIR, else "./vanet-out".
std::filesystem::path default_out_dir();

}  // namespace vanet::cli
