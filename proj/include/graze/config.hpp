// Key-value configuration files: `key = value` lines, '#' comments.
// Unknown keys are an error.
#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "graze/errors.hpp"
#include "graze/model.hpp"

namespace graze {

/// Event-driven integration settings. All strictly positive.
struct IntegratorConfig {
    double rel_tol = 1e-10;              ///< relative local error tolerance
    double abs_tol = 1e-12;              ///< absolute local error tolerance
    double event_tol = 1e-10;            ///< event-time bracketing tolerance (time units)
    double max_step = 0.1;               ///< maximum step (time units)
    double max_period_multiples = 20.0;  ///< cap on integration horizon

    void validate() const {
        if (!(rel_tol > 0 && abs_tol > 0 && event_tol > 0 && max_step > 0 &&
              max_period_multiples > 0))
            throw ConfigError("IntegratorConfig: all fields must be strictly positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: value for '" + key + "' is not a decimal number: '" + val + "'");
    }
}

} // namespace detail

/// Keys recognised in configuration files (model + integrator sections share
/// one file format).
inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "zeta", "epsilon", "amp", "omega",                                  // model
        "rel_tol", "abs_tol", "event_tol", "max_step", "max_period_multiples", // integrator
    };
    return keys;
}

/// Parse a key-value config stream. Unknown keys are an error.
inline std::map<std::string, double> parse_config(std::istream& in, const std::string& origin) {
    std::map<std::string, double> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (!known_config_keys().count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (out.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = detail::parse_double(key, val);
    }
    return out;
}

inline std::map<std::string, double> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in, path);
}

/// Build oscillator parameters from a parsed config; all four fields required.
inline OscParams osc_params_from_config(const std::map<std::string, double>& kv) {
    OscParams p;
    for (const char* req : {"zeta", "epsilon", "amp", "omega"})
        if (!kv.count(req)) throw ConfigError(std::string("config: missing key '") + req + "'");
    p.zeta = kv.at("zeta");
    p.epsilon = kv.at("epsilon");
    p.amp = kv.at("amp");
    p.omega = kv.at("omega");
    p.validate();
    return p;
}

/// Build integrator settings from a parsed config; absent keys keep defaults.
inline IntegratorConfig integrator_from_config(const std::map<std::string, double>& kv) {
    IntegratorConfig c;
    if (kv.count("rel_tol")) c.rel_tol = kv.at("rel_tol");
    if (kv.count("abs_tol")) c.abs_tol = kv.at("abs_tol");
    if (kv.count("event_tol")) c.event_tol = kv.at("event_tol");
    if (kv.count("max_step")) c.max_step = kv.at("max_step");
    if (kv.count("max_period_multiples")) c.max_period_multiples = kv.at("max_period_multiples");
    c.validate();
    return c;
}

} // namespace graze
