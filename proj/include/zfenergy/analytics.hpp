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
// Closed-form large-system statistics of the consumed energy: its mean, the
// mobility-driven variance through the radial eigenmode series Theta, the
// fast-fading variance term, and the derived outage probability and battery
// sizing rules.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "zfenergy/channel_engine.hpp"
#include "zfenergy/errors.hpp"
#include "zfenergy/special_math.hpp"
#include "zfenergy/version.hpp"

namespace zfe {

/// One retained term of the Theta series.
struct ThetaTerm {
    double zero = 0.0;          // k_i
    double phi = 0.0;           // phi_i
    double time_integral = 0.0; // int_0^1 (1 - e^(-a t))^2 dt with a = k_i^2 D T / R^2
    double value = 0.0;         // 2 phi_i^2 / (k_i^2 J0(k_i)^2) * time_integral
};

/// Truncated evaluation of Theta with its truncation diagnostics.
struct ThetaSeries {
    BesselZeroKind zero_kind = BesselZeroKind::ZerosOfJ1;
    std::vector<ThetaTerm> terms;
    double total = 0.0;
    double truncation_bound = 0.0;
};

/// Mean and variance split of the total energy.
struct MomentPair {
    double mean_energy = 0.0;       // J
    double variance_mobility = 0.0; // J^2, walker-position fluctuations
    double variance_fading = 0.0;   // J^2, fast-fading fluctuations
    double variance_total = 0.0;    // J^2, sum of the two
};

/// Moments of 1/g under a uniform position in the cell.
///   order 1:  E[r^beta + r0^beta]   = 2 R^beta/(beta+2) + r0^beta
///   order 2:  E[(r^beta + r0^beta)^2]
///           = R^(2 beta)/(beta+1) + 4 r0^beta R^beta/(beta+2) + r0^(2 beta)
inline double inverse_gain_moment(int order, const CellGeometry& geom) {
    geom.validate();
    const double beta = geom.pathloss_exp;
    const double rb = std::pow(geom.radius, beta);
    const double cb = std::pow(geom.cutoff, beta);
    if (order == 1) return 2.0 * rb / (beta + 2.0) + cb;
    if (order == 2) return rb * rb / (beta + 1.0) + 4.0 * cb * rb / (beta + 2.0) + cb * cb;
    throw config_error("inverse_gain_moment: order must be 1 or 2");
}

namespace detail {

// Alternate closed form of the order-2 moment that circulates in reference
// material; its leading coefficient differs from the direct uniform-disk
// integral by a factor of two. Reported alongside the direct value only.
inline double inverse_gain_moment2_alternate(const CellGeometry& geom) {
    const double beta = geom.pathloss_exp;
    const double rb = std::pow(geom.radius, beta);
    const double cb = std::pow(geom.cutoff, beta);
    return rb * rb / (2.0 * beta + 2.0) + 4.0 * cb * rb / (beta + 2.0) + cb * cb;
}

// int_0^1 (1 - e^(-a t))^2 dt, series-protected near a = 0.
inline double theta_time_integral(double a) {
    if (a < 1e-3) return a * a / 3.0 - a * a * a / 4.0 + 7.0 * a * a * a * a / 60.0;
    const double em1 = -std::expm1(-a);  // 1 - e^-a
    const double em2 = -std::expm1(-2.0 * a);
    return 1.0 - 2.0 * em1 / a + em2 / (2.0 * a);
}

// Zeros plus phi coefficients, cached per (kind, beta) and grown on demand.
inline std::vector<std::pair<double, double>> zero_phi_prefix(BesselZeroKind kind, double beta, int count) {
    using Key = std::pair<int, std::uint64_t>;
    static std::map<Key, std::vector<std::pair<double, double>>> cache;
    static std::mutex mutex;

    const Key key{static_cast<int>(kind), std::bit_cast<std::uint64_t>(beta)};
    std::lock_guard<std::mutex> lock(mutex);
    auto& entry = cache[key];
    if (static_cast<int>(entry.size()) < count) {
        const BesselZeroTable table = find_bessel_zeros(kind, count, 1e-9);
        QuadratureSpec spec;
        spec.abs_tol = 1e-13;
        spec.rel_tol = 1e-12;
        for (std::size_t i = entry.size(); i < table.zeros.size(); ++i)
            entry.emplace_back(table.zeros[i], phi_coefficient(table.zeros[i], beta, spec));
    }
    return {entry.begin(), entry.begin() + count};
}

} // namespace detail

/// Mean consumed energy over [0, T]:
///   T * (rho c / (1 - c)) * (2 R^beta/(beta+2) + r0^beta).
inline double mean_energy(const SystemConfig& cfg) {
    cfg.validate();
    const double c = cfg.ratio();
    return cfg.horizon * cfg.rho * c / (1.0 - c) * inverse_gain_moment(1, cfg.geom);
}

/// Evaluate Theta = sum_i 2 phi_i^2 / (k_i^2 J0(k_i)^2) * time_integral_i,
/// accumulating terms until three consecutive ones fall below the relative
/// tolerance and the extrapolated tail is negligible.
inline ThetaSeries theta(const SystemConfig& cfg, double rel_tol = 1e-9) {
    cfg.validate();
    if (!(rel_tol > 0.0)) throw config_error("theta: rel_tol must be > 0");

    const double scale = cfg.mob.diffusion() * cfg.horizon / (cfg.geom.radius * cfg.geom.radius);
    ThetaSeries series;
    series.zero_kind = cfg.zero_kind;

    constexpr int kMaxTerms = 500;
    constexpr int kChunk = 16;
    int below_count = 0;
    double prev_value = 0.0;
    double ceiling = 0.0; // saturated value of the retained terms (time integrals at 1)
    for (int count = kChunk; count <= kMaxTerms; count += kChunk) {
        const auto zp = detail::zero_phi_prefix(cfg.zero_kind, cfg.geom.pathloss_exp, count);
        for (std::size_t i = series.terms.size(); i < zp.size(); ++i) {
            const auto [k, phi] = zp[i];
            const double j0k = bessel_j0(k);
            const double ti = detail::theta_time_integral(k * k * scale);
            const double value = 2.0 * phi * phi / (k * k * j0k * j0k) * ti;
            series.terms.push_back({k, phi, ti, value});
            series.total += value;
            ceiling += 2.0 * phi * phi / (k * k * j0k * j0k);

            below_count = (value <= rel_tol * series.total) ? below_count + 1 : 0;
            if (below_count >= 3) {
                const double ratio =
                    (prev_value > 0.0) ? std::min(value / prev_value, 0.97) : 0.5;
                series.truncation_bound = value * ratio / (1.0 - ratio);
                if (series.truncation_bound < rel_tol * series.total) return series;
            }
            prev_value = value;
        }
        // Vanishing-diffusion regime: the series is negligible against its own
        // saturation level, so declare it converged to zero.
        if (count >= 32 && series.total < 1e-8 * ceiling) {
            series.truncation_bound = series.total;
            return series;
        }
    }
    throw numerical_error("theta: series did not converge within 500 terms", series.total,
                          series.terms.empty() ? 0.0 : series.terms.back().value);
}

/// Mobility-driven energy variance:
///   (T R^2 / (D K)) * (rho^2 c^2 R^(2 beta) / (1 - c)^2) * Theta.
inline double variance_mobility(const SystemConfig& cfg) {
    cfg.validate();
    const double c = cfg.ratio();
    const double r2b = std::pow(cfg.geom.radius, 2.0 * cfg.geom.pathloss_exp);
    const double pref = cfg.horizon * cfg.geom.radius * cfg.geom.radius /
                        (cfg.mob.diffusion() * cfg.num_ues) * cfg.rho * cfg.rho * c * c * r2b /
                        ((1.0 - c) * (1.0 - c));
    return pref * theta(cfg).total;
}

/// Fast-fading energy variance:
///   T tau_d * (rho^2 c^3 / (1 - c)^3) * (1/K^2) * E[1/g^2].
inline double variance_fading(const SystemConfig& cfg) {
    cfg.validate();
    const double c = cfg.ratio();
    const double k2 = static_cast<double>(cfg.num_ues) * cfg.num_ues;
    return cfg.horizon * cfg.tau() * cfg.rho * cfg.rho * c * c * c /
           ((1.0 - c) * (1.0 - c) * (1.0 - c)) / k2 * inverse_gain_moment(2, cfg.geom);
}

/// All closed-form moments of one configuration.
inline MomentPair energy_moments(const SystemConfig& cfg) {
    MomentPair m;
    m.mean_energy = mean_energy(cfg);
    m.variance_mobility = variance_mobility(cfg);
    m.variance_fading = variance_fading(cfg);
    m.variance_total = m.variance_mobility + m.variance_fading;
    return m;
}

/// Probability that the consumed energy exceeds `threshold`, from the
/// Gaussian limit: Q((threshold - mean) / std).
inline double outage_probability(double threshold, const MomentPair& moments) {
    if (!(moments.variance_total > 0.0))
        throw config_error("outage_probability: variance_total must be > 0");
    return gaussian_q((threshold - moments.mean_energy) / std::sqrt(moments.variance_total));
}

/// Smallest battery level whose outage probability stays within epsilon:
///   eta = sqrt(VAR) * Qinv(epsilon) + mean.
inline double battery_requirement(double epsilon, const MomentPair& moments) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw config_error("battery_requirement: epsilon must lie in (0,1)");
    if (!(moments.variance_total > 0.0))
        throw config_error("battery_requirement: variance_total must be > 0");
    return std::sqrt(moments.variance_total) * gaussian_q_inv(epsilon) + moments.mean_energy;
}

/// Full closed-form report: inputs, moments, the Theta term table, and the
/// inverse-gain moments with their reference-form counterpart.
inline nlohmann::json theory_report(const SystemConfig& cfg, double theta_rel_tol = 1e-9) {
    cfg.validate();
    const MomentPair moments = energy_moments(cfg);
    const ThetaSeries ts = theta(cfg, theta_rel_tol);

    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t i = 0; i < ts.terms.size(); ++i) {
        const ThetaTerm& t = ts.terms[i];
        terms.push_back({{"index", i + 1},
                         {"zero", t.zero},
                         {"phi", t.phi},
                         {"time_integral", t.time_integral},
                         {"value", t.value}});
    }

    char digest_hex[32];
    std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                  static_cast<unsigned long long>(config_digest(cfg)));

    nlohmann::json j;
    j["toolkit_version"] = kVersion;
    j["cfg_digest"] = digest_hex;
    j["config"] = canonical_text(cfg);
    j["ratio_c"] = cfg.ratio();
    j["achievable_rate_bps_hz"] = achievable_rate(cfg.rho, cfg.sigma2);
    j["moments"] = {{"mean_energy_J", moments.mean_energy},
                    {"variance_mobility_J2", moments.variance_mobility},
                    {"variance_fading_J2", moments.variance_fading},
                    {"variance_total_J2", moments.variance_total}};
    j["theta"] = {{"zero_kind", to_string(ts.zero_kind)},
                  {"rel_tol", theta_rel_tol},
                  {"total", ts.total},
                  {"truncation_bound", ts.truncation_bound},
                  {"terms", terms}};
    j["inverse_gain_moments"] = {
        {"order1", inverse_gain_moment(1, cfg.geom)},
        {"order2_direct", inverse_gain_moment(2, cfg.geom)},
        {"order2_reference_form", detail::inverse_gain_moment2_alternate(cfg.geom)}};
    j["notes"] = nlohmann::json::array(
        {"order2 inverse-gain moment uses the direct uniform-disk integral; the reference form "
         "differs in its leading coefficient and is listed for comparison only"});
    return j;
}

} // namespace zfe
