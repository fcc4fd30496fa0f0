#pragma once

// Flat key=value configuration: one key per line, '#' starts a comment,
// unknown keys are rejected with the offending key and line number.
// Every key maps 1:1 onto an ExperimentConfig field, so a manifest's
// config echo is itself a valid config file.

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "io.hpp"

namespace jmgtlab {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct ConfigKey {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

inline const std::map<std::string, ConfigKey>& config_keys() {
    static const std::map<std::string, ConfigKey> keys = [] {
        std::map<std::string, ConfigKey> m;
        auto dbl = [&m](const std::string& name, double ExperimentConfig::* field) {
            m[name] = ConfigKey{
                [name, field](ExperimentConfig& c, const std::string& v) {
                    c.*field = parse_double(name, v);
                },
                [field](const ExperimentConfig& c) { return format_double(c.*field); }};
        };
        auto integer = [&m](const std::string& name, int ExperimentConfig::* field) {
            m[name] = ConfigKey{
                [name, field](ExperimentConfig& c, const std::string& v) {
                    c.*field = parse_int(name, v);
                },
                [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
        };
        auto text = [&m](const std::string& name, std::string ExperimentConfig::* field) {
            m[name] = ConfigKey{
                [field](ExperimentConfig& c, const std::string& v) { c.*field = v; },
                [field](const ExperimentConfig& c) { return c.*field; }};
        };
        integer("dim", &ExperimentConfig::dim);
        integer("modes", &ExperimentConfig::modes);
        dbl("length_x", &ExperimentConfig::length_x);
        dbl("length_y", &ExperimentConfig::length_y);
        dbl("c", &ExperimentConfig::c);
        dbl("delta", &ExperimentConfig::delta);
        dbl("k", &ExperimentConfig::k);
        dbl("tau", &ExperimentConfig::tau);
        dbl("tau_max", &ExperimentConfig::tau_max);
        dbl("tau_factor", &ExperimentConfig::tau_factor);
        integer("tau_count", &ExperimentConfig::tau_count);
        text("profile", &ExperimentConfig::profile);
        text("u0_modes", &ExperimentConfig::u0_modes);
        dbl("amplitude", &ExperimentConfig::amplitude);
        dbl("u1_ratio", &ExperimentConfig::u1_ratio);
        dbl("T", &ExperimentConfig::T);
        dbl("dt", &ExperimentConfig::dt);
        integer("stride", &ExperimentConfig::stride);
        dbl("padding", &ExperimentConfig::padding);
        dbl("blowup_ceiling", &ExperimentConfig::blowup_ceiling);
        dbl("fit_floor_rel", &ExperimentConfig::fit_floor_rel);
        dbl("fit_trim", &ExperimentConfig::fit_trim);
        dbl("r2_min", &ExperimentConfig::r2_min);
        dbl("uniformity_fraction", &ExperimentConfig::uniformity_fraction);
        dbl("picard_tol", &ExperimentConfig::picard_tol);
        integer("picard_max_iter", &ExperimentConfig::picard_max_iter);
        dbl("threshold_tol", &ExperimentConfig::threshold_tol);
        dbl("threshold_ceiling", &ExperimentConfig::threshold_ceiling);
        text("threshold_level", &ExperimentConfig::threshold_level);
        dbl("mms_dt", &ExperimentConfig::mms_dt);
        dbl("mms_T", &ExperimentConfig::mms_T);
        dbl("mms_amplitude", &ExperimentConfig::mms_amplitude);
        dbl("mms_padding", &ExperimentConfig::mms_padding);
        text("solver", &ExperimentConfig::solver);
        return m;
    }();
    return keys;
}

} // namespace detail

inline void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                              const std::string& value, int line_no = 0) {
    const auto& keys = detail::config_keys();
    auto it = keys.find(key);
    if (it == keys.end()) {
        std::string where = line_no > 0 ? " (line " + std::to_string(line_no) + ")" : "";
        throw ConfigError("unknown key '" + key + "'" + where);
    }
    try {
        it->second.set(cfg, value);
    } catch (const ConfigError& e) {
        std::string where = line_no > 0 ? " (line " + std::to_string(line_no) + ")" : "";
        throw ConfigError(std::string(e.what()) + where);
    }
}

/// Parse a config file into `cfg` (defaults untouched for absent keys),
/// then apply flag overrides, then validate.
inline ExperimentConfig parse_config(const std::string& path,
                                     const std::vector<std::pair<std::string, std::string>>&
                                         flag_overrides = {}) {
    ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot read config file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(f, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected key=value at line " + std::to_string(line_no));
            apply_config_line(cfg, detail::trim(line.substr(0, eq)),
                              detail::trim(line.substr(eq + 1)), line_no);
        }
    }
    for (const auto& [key, value] : flag_overrides) apply_config_line(cfg, key, value);
    cfg.validate();
    return cfg;
}

/// Fully resolved key=value echo; parsing it back reproduces `cfg`.
inline std::string config_echo(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [name, key] : detail::config_keys()) {
        const std::string v = key.get(cfg);
        if (name == "u0_modes" && v.empty()) continue;
        out += name + " = " + v + "\n";
    }
    return out;
}

inline std::vector<std::string> config_key_names() {
    std::vector<std::string> names;
    for (const auto& [name, key] : detail::config_keys()) names.push_back(name);
    return names;
}

} // namespace jmgtlab
