// SPDX-License-Identifier: Apache-2.0
//
// zfenergy - transmit-energy statistics for a multi-antenna downlink with mobile users
// Copyright (C) 2026 the zfenergy authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Flat key=value experiment configuration: trivially parseable, diff
// friendly, and stable under re-serialization.

#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "zfenergy/channel_engine.hpp"
#include "zfenergy/errors.hpp"

namespace zfe {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw config_error("config: field '" + key + "' is not a number: '" + value + "'");
    }
    if (used != value.size())
        throw config_error("config: field '" + key + "' is not a number: '" + value + "'");
    return v;
}

inline int parse_integer(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw config_error("config: field '" + key + "' is not an integer: '" + value + "'");
    return i;
}

} // namespace detail

/// Parse a flat key=value configuration. Lines starting with '#' and blank
/// lines are ignored. Unknown keys and missing required keys are rejected
/// with the field name in the message.
inline SystemConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(line_no) + " is not of the form key=value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) throw config_error("config: line " + std::to_string(line_no) + " has an empty key");
        if (kv.count(key)) throw config_error("config: duplicate field '" + key + "'");
        kv[key] = value;
    }

    static const char* required[] = {"K", "N", "rho", "beta", "r0", "R", "ell", "xi", "T"};
    static const char* known[] = {"K",  "N",  "rho", "sigma2",    "beta",        "r0",
                                  "R",  "ell", "xi",  "T",         "time_step",   "fading_mode",
                                  "tau_d", "zero_kind", "mode_count"};
    for (const auto& [key, value] : kv) {
        bool ok = false;
        for (const char* name : known) ok = ok || key == name;
        if (!ok) throw config_error("config: unknown field '" + key + "'");
    }
    for (const char* name : required)
        if (!kv.count(name)) throw config_error("config: missing required field '" + std::string(name) + "'");

    SystemConfig cfg;
    cfg.num_ues = detail::parse_integer("K", kv["K"]);
    cfg.num_antennas = detail::parse_integer("N", kv["N"]);
    cfg.rho = detail::parse_number("rho", kv["rho"]);
    cfg.sigma2 = kv.count("sigma2") ? detail::parse_number("sigma2", kv["sigma2"]) : 1.0;
    cfg.geom.pathloss_exp = detail::parse_number("beta", kv["beta"]);
    cfg.geom.cutoff = detail::parse_number("r0", kv["r0"]);
    cfg.geom.radius = detail::parse_number("R", kv["R"]);
    cfg.mob.step_length = detail::parse_number("ell", kv["ell"]);
    cfg.mob.step_time = detail::parse_number("xi", kv["xi"]);
    cfg.horizon = detail::parse_number("T", kv["T"]);
    cfg.time_step = kv.count("time_step") ? detail::parse_number("time_step", kv["time_step"]) : 0.0;
    cfg.tau_d = kv.count("tau_d") ? detail::parse_number("tau_d", kv["tau_d"]) : 0.0;
    cfg.mode_count = kv.count("mode_count") ? detail::parse_integer("mode_count", kv["mode_count"]) : 64;

    if (kv.count("fading_mode")) {
        const std::string& m = kv["fading_mode"];
        if (m == "exact")
            cfg.fading_mode = FadingMode::Exact;
        else if (m == "hardened")
            cfg.fading_mode = FadingMode::Hardened;
        else
            throw config_error("config: field 'fading_mode' must be 'exact' or 'hardened', got '" + m + "'");
    }
    if (kv.count("zero_kind")) {
        const std::string& z = kv["zero_kind"];
        if (z == "j1")
            cfg.zero_kind = BesselZeroKind::ZerosOfJ1;
        else if (z == "j1_prime")
            cfg.zero_kind = BesselZeroKind::ZerosOfJ1Prime;
        else
            throw config_error("config: field 'zero_kind' must be 'j1' or 'j1_prime', got '" + z + "'");
    }

    cfg.validate();
    return cfg;
}

inline SystemConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    return parse_config(in);
}

} // namespace zfe
