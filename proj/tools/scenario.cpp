#include "scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>

namespace vanet::cli {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "graph",          "nodes",        "load",          "packets_per_node", "window_ms",
        "propagation",    "latency_ms",   "jitter_ms",     "loss",             "seed",
        "confidence",     "threshold",    "max_depth",     "confirm_confirmations",
        "replay_window_ms", "pkp_ttl_ms", "rate_limit",    "rate_bucket",      "verify_delay_us",
        "payload_bytes",  "out_dir",
    };
    return keys;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const Setting& s, const std::string& key, const std::string& why) {
    throw ConfigError(s.origin + ": " + key + ": " + why + " (got '" + s.value + "')");
}

template <class T>
T number(const std::string& key, const Setting& s) {
    T v{};
    const auto* first = s.value.data();
    const auto* last = first + s.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) fail(s, key, "expected a number");
    return v;
}

bool boolean(const std::string& key, const Setting& s) {
    if (s.value == "on" || s.value == "true" || s.value == "1" || s.value == "yes") return true;
    if (s.value == "off" || s.value == "false" || s.value == "0" || s.value == "no") return false;
    fail(s, key, "expected on/off");
}

}  // namespace

Settings parse_config(std::istream& in, const std::string& source_name) {
    Settings out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(lineno);
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const auto key = trim(std::string_view(text).substr(0, eq));
        const auto value = trim(std::string_view(text).substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
        if (value.empty()) throw ConfigError(where + ": " + key + ": missing value");
        if (out.contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        out[key] = {value, where};
    }
    return out;
}

Settings load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    return parse_config(in, path.string());
}

Scenario Scenario::defaults() {
    Scenario s;
    s.options.node.rate_limit.tokens_per_second = 100.0;
    s.options.node.rate_limit.bucket_size = 200.0;
    s.out_dir = default_out_dir();
    return s;
}

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("VANET_OUT_DIR"); env && *env) return env;
    return "vanet-out";
}

Scenario build_scenario(const Settings& settings, Scenario sc) {
    auto& node = sc.options.node;
    for (const auto& [key, s] : settings) {
        if (key == "graph") {
            auto kind = sim::parse_graph_kind(s.value);
            if (!kind) fail(s, key, "expected triangular, line or complete");
            sc.graph = kind;
        } else if (key == "nodes") {
            sc.nodes = number<std::size_t>(key, s);
            if (sc.nodes < 2) fail(s, key, "need at least 2 vehicles");
        } else if (key == "load") {
            if (s.value == "low") {
                sc.load.packets_per_node = sim::LoadProfile::low().packets_per_node;
            } else if (s.value == "high") {
                sc.load.packets_per_node = sim::LoadProfile::high().packets_per_node;
            } else {
                sc.load.packets_per_node = number<unsigned>(key, s);
            }
            sc.load_name = s.value;
        } else if (key == "packets_per_node") {
            sc.load.packets_per_node = number<unsigned>(key, s);
            sc.load_name = s.value;
        } else if (key == "window_ms") {
            sc.load.window_ms = number<std::int64_t>(key, s);
            if (sc.load.window_ms <= 0) fail(s, key, "must be positive");
        } else if (key == "propagation") {
            const auto base = sc.propagation;
            if (s.value == "global") {
                sc.propagation = sim::PropagationModel::global_pubsub();
            } else if (s.value == "adjacency") {
                sc.propagation = sim::PropagationModel::adjacency_only();
            } else if (s.value.starts_with("flood:")) {
                Setting ttl{s.value.substr(6), s.origin};
                sc.propagation = sim::PropagationModel::flooding(number<unsigned>(key, ttl));
                if (sc.propagation.flood_ttl == 0) fail(s, key, "flooding TTL must be at least 1");
            } else {
                fail(s, key, "expected global, adjacency or flood:<ttl>");
            }
            sc.propagation.base_latency_us = base.base_latency_us;
            sc.propagation.jitter_us = base.jitter_us;
            sc.propagation.loss_probability = base.loss_probability;
        } else if (key == "latency_ms") {
            const auto v = number<double>(key, s);
            if (v < 0) fail(s, key, "must be non-negative");
            sc.propagation.base_latency_us = static_cast<std::int64_t>(v * 1000.0);
        } else if (key == "jitter_ms") {
            const auto v = number<double>(key, s);
            if (v < 0) fail(s, key, "must be non-negative");
            sc.propagation.jitter_us = static_cast<std::int64_t>(v * 1000.0);
        } else if (key == "loss") {
            const auto v = number<double>(key, s);
            if (!(v >= 0.0 && v < 1.0)) fail(s, key, "must be in [0, 1)");
            sc.propagation.loss_probability = v;
        } else if (key == "seed") {
            sc.seed = number<std::uint64_t>(key, s);
        } else if (key == "confidence") {
            if (s.value == "harmonic") {
                node.confidence_function = ConfidenceFunction::Harmonic;
            } else if (s.value == "geometric") {
                node.confidence_function = ConfidenceFunction::Geometric;
            } else {
                fail(s, key, "expected harmonic or geometric");
            }
        } else if (key == "threshold") {
            node.acceptance_threshold = number<double>(key, s);
            if (!(node.acceptance_threshold > 0)) fail(s, key, "must be positive");
        } else if (key == "max_depth") {
            if (s.value == "none") {
                node.max_confirmation_depth.reset();
            } else {
                node.max_confirmation_depth = number<unsigned>(key, s);
                if (*node.max_confirmation_depth == 0) fail(s, key, "must be at least 1 or 'none'");
            }
        } else if (key == "confirm_confirmations") {
            node.confirm_confirmations = boolean(key, s);
        } else if (key == "replay_window_ms") {
            node.replay_window_ms = number<std::int64_t>(key, s);
            if (node.replay_window_ms <= 0) fail(s, key, "must be positive");
        } else if (key == "pkp_ttl_ms") {
            node.pkp_ttl_ms = number<std::int64_t>(key, s);
            if (node.pkp_ttl_ms <= 0) fail(s, key, "must be positive");
        } else if (key == "rate_limit") {
            if (s.value == "off") {
                node.rate_limit.enabled = false;
            } else {
                node.rate_limit.enabled = true;
                node.rate_limit.tokens_per_second = number<double>(key, s);
                if (!(node.rate_limit.tokens_per_second > 0)) fail(s, key, "must be positive or 'off'");
            }
        } else if (key == "rate_bucket") {
            node.rate_limit.bucket_size = number<double>(key, s);
            if (!(node.rate_limit.bucket_size >= 1)) fail(s, key, "must be at least 1");
        } else if (key == "verify_delay_us") {
            sc.options.verify_delay_us = number<std::int64_t>(key, s);
            if (sc.options.verify_delay_us < 0) fail(s, key, "must be non-negative");
        } else if (key == "payload_bytes") {
            sc.options.payload_bytes = number<std::size_t>(key, s);
        } else if (key == "out_dir") {
            sc.out_dir = s.value;
        } else {
            throw ConfigError(s.origin + ": unknown key '" + key + "'");
        }
    }
    return sc;
}

}  // namespace vanet::cli
