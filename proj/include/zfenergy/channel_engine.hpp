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
// Fading and composite channel matrices, transmit power of the channel
// inverting precoder through the Gram-matrix trace inverse, its hardened
// deterministic equivalent, and energy accumulation along walker paths.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "zfenergy/cell_model.hpp"
#include "zfenergy/errors.hpp"
#include "zfenergy/rng.hpp"

namespace zfe {

enum class FadingMode { Exact, Hardened };

inline const char* to_string(FadingMode m) { return m == FadingMode::Exact ? "exact" : "hardened"; }

/// Full parameter set of one experiment. `time_step` and `tau_d` may be left
/// at zero, in which case they default to the mobility step time.
struct SystemConfig {
    int num_ues = 16;      // K
    int num_antennas = 32; // N
    double rho = 1.0;      // per-stream power design parameter (W)
    double sigma2 = 1.0;   // noise power (W)
    CellGeometry geom;
    MobilityParams mob;
    double horizon = 10.0;  // T (s)
    double time_step = 0.0; // energy integration step; 0 -> mob.step_time
    FadingMode fading_mode = FadingMode::Hardened;
    double tau_d = 0.0; // fading decorrelation time; 0 -> dt()
    BesselZeroKind zero_kind = BesselZeroKind::ZerosOfJ1;
    int mode_count = 64; // eigenmode truncation for the variance series

    double ratio() const { return static_cast<double>(num_ues) / num_antennas; }
    double dt() const { return time_step > 0.0 ? time_step : mob.step_time; }
    double tau() const { return tau_d > 0.0 ? tau_d : dt(); }

    void validate() const {
        if (num_ues < 1) throw config_error("SystemConfig: K must be >= 1");
        if (num_ues >= num_antennas) throw config_error("SystemConfig: requires K < N");
        if (!(rho > 0.0)) throw config_error("SystemConfig: rho must be > 0");
        if (!(sigma2 > 0.0)) throw config_error("SystemConfig: sigma2 must be > 0");
        geom.validate();
        mob.validate();
        if (time_step < 0.0) throw config_error("SystemConfig: time_step must be >= 0");
        if (tau_d < 0.0) throw config_error("SystemConfig: tau_d must be >= 0");
        if (!(horizon >= dt())) throw config_error("SystemConfig: requires T >= time_step");
        if (mode_count < 1) throw config_error("SystemConfig: mode_count must be >= 1");
    }
};

/// Canonical flat text form; field order is fixed and derived fields are
/// materialized, so equal semantics yield equal text.
inline std::string canonical_text(const SystemConfig& cfg) {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "K=%d\nN=%d\nrho=%.17g\nsigma2=%.17g\nbeta=%.17g\nr0=%.17g\nR=%.17g\n"
                  "ell=%.17g\nxi=%.17g\nT=%.17g\ntime_step=%.17g\nfading_mode=%s\ntau_d=%.17g\n"
                  "zero_kind=%s\nmode_count=%d\n",
                  cfg.num_ues, cfg.num_antennas, cfg.rho, cfg.sigma2, cfg.geom.pathloss_exp,
                  cfg.geom.cutoff, cfg.geom.radius, cfg.mob.step_length, cfg.mob.step_time,
                  cfg.horizon, cfg.dt(), to_string(cfg.fading_mode), cfg.tau(),
                  to_string(cfg.zero_kind), cfg.mode_count);
    return buf;
}

/// FNV-1a content hash of the canonical text.
inline std::uint64_t config_digest(const SystemConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Composite channel: per-row gain-scaled fading, K x N.
struct ChannelMatrix {
    Eigen::MatrixXcd entries;
    Eigen::VectorXd per_ue_gains;
};

/// K x N i.i.d. circularly-symmetric complex Gaussian entries, unit variance.
inline Eigen::MatrixXcd sample_fading(PhiloxStream& rng, int num_ues, int num_antennas) {
    if (num_ues < 1 || num_antennas < 1) throw config_error("sample_fading: dimensions must be >= 1");
    Eigen::MatrixXcd w(num_ues, num_antennas);
    for (int k = 0; k < num_ues; ++k)
        for (int n = 0; n < num_antennas; ++n) w(k, n) = rng.complex_normal();
    return w;
}

/// Scale row k of the fading matrix by sqrt(g(x_k)).
inline ChannelMatrix channel_matrix(const Eigen::MatrixXcd& fading, std::span<const Point2> positions,
                                    const CellGeometry& geom) {
    if (static_cast<std::size_t>(fading.rows()) != positions.size())
        throw config_error("channel_matrix: row count must match the number of positions");
    ChannelMatrix h;
    h.entries = fading;
    h.per_ue_gains.resize(fading.rows());
    for (Eigen::Index k = 0; k < fading.rows(); ++k) {
        const double g = path_gain(positions[static_cast<std::size_t>(k)], geom);
        h.per_ue_gains(k) = g;
        h.entries.row(k) *= std::sqrt(g);
    }
    return h;
}

namespace detail {

inline constexpr double kConditionLimit = 1e12;

// rho * tr((H H^H)^{-1}) through a Cholesky factor of the K x K Gram matrix:
// tr(G^{-1}) = ||L^{-1}||_F^2, never forming an N x N inverse.
inline double zf_power_impl(const Eigen::MatrixXcd& h, double rho) {
    if (!(rho > 0.0)) throw config_error("zf_power: rho must be > 0");
    const Eigen::Index k = h.rows();
    if (k < 1 || h.cols() < k) throw config_error("zf_power: requires a wide K x N matrix with K <= N");

    Eigen::MatrixXcd gram(k, k);
    gram.noalias() = h * h.adjoint();
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw singular_matrix_error("zf_power: Gram matrix is not positive definite (rank-deficient channel)",
                                    std::numeric_limits<double>::infinity());
    const double rcond = llt.rcond();
    if (!(rcond > 1.0 / kConditionLimit))
        throw singular_matrix_error("zf_power: Gram matrix condition estimate " +
                                        std::to_string(1.0 / rcond) + " exceeds 1e12",
                                    1.0 / rcond);
    Eigen::MatrixXcd linv = Eigen::MatrixXcd::Identity(k, k);
    llt.matrixL().solveInPlace(linv);
    return rho * linv.squaredNorm();
}

// ||x||^beta + r0^beta, with fast paths for the common even exponents.
inline double inverse_gain(const Point2& p, double beta, double cutoff_pow) {
    const double r2 = p.norm2();
    double rb;
    if (beta == 4.0) {
        rb = r2 * r2;
    } else if (beta == 6.0) {
        rb = r2 * r2 * r2;
    } else {
        rb = std::pow(r2, 0.5 * beta);
    }
    return rb + cutoff_pow;
}

} // namespace detail

/// Transmit power of the channel-inverting precoder, rho * tr((H H^H)^{-1}).
inline double zf_power(const ChannelMatrix& h, double rho) { return detail::zf_power_impl(h.entries, rho); }

/// Overload on a raw composite channel matrix.
inline double zf_power(const Eigen::MatrixXcd& h, double rho) { return detail::zf_power_impl(h, rho); }

/// Common spectral efficiency of every user, log2(1 + rho/sigma2).
inline double achievable_rate(double rho, double sigma2) {
    if (!(rho > 0.0)) throw config_error("achievable_rate: rho must be > 0");
    if (!(sigma2 > 0.0)) throw config_error("achievable_rate: sigma2 must be > 0");
    return std::log2(1.0 + rho / sigma2);
}

/// Deterministic equivalent of the transmit power at fixed user positions:
/// (rho c / (1 - c)) * (1/K) * sum_k 1/g(x_k).
inline double hardened_power(std::span<const Point2> positions, const SystemConfig& cfg) {
    cfg.validate();
    if (positions.size() != static_cast<std::size_t>(cfg.num_ues))
        throw config_error("hardened_power: position count must equal K");
    const double c = cfg.ratio();
    const double cutoff_pow = std::pow(cfg.geom.cutoff, cfg.geom.pathloss_exp);
    double sum = 0.0;
    for (const Point2& p : positions) {
        if (p.norm2() > cfg.geom.radius * cfg.geom.radius * (1.0 + 1e-12))
            throw config_error("hardened_power: position outside the cell");
        sum += detail::inverse_gain(p, cfg.geom.pathloss_exp, cutoff_pow);
    }
    return cfg.rho * c / (1.0 - c) * sum / cfg.num_ues;
}

/// Energy of one trial plus the per-step power trace.
struct EnergyResult {
    double energy = 0.0;              // J
    std::vector<double> trace_times;  // slot start times
    std::vector<double> trace_powers; // power at each slot start
};

/// Run one energy trial: K walkers start uniformly in the cell, power is
/// evaluated at every slot start per the fading mode, and energy is the
/// left-Riemann sum of power over [0, T].
///
/// The stream is split into per-walker substreams plus one fading substream,
/// so Exact and Hardened runs with the same stream see identical paths.
inline EnergyResult simulate_energy(const SystemConfig& cfg, PhiloxStream& rng, bool keep_trace = true) {
    cfg.validate();
    const int k = cfg.num_ues;
    const double dt = cfg.dt();
    const double horizon = cfg.horizon;
    const int n_slots = std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-9)));

    std::vector<PhiloxStream> walk_streams;
    walk_streams.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) walk_streams.push_back(rng.substream(static_cast<std::uint32_t>(i)));
    PhiloxStream fading_stream = rng.substream(static_cast<std::uint32_t>(k));
    PhiloxStream placement_stream = rng.substream(static_cast<std::uint32_t>(k) + 1);

    std::vector<Point2> positions(static_cast<std::size_t>(k));
    for (auto& p : positions) p = sample_uniform_disk(placement_stream, cfg.geom.radius);

    const double cutoff_pow = std::pow(cfg.geom.cutoff, cfg.geom.pathloss_exp);
    const double hardened_scale = cfg.rho * cfg.ratio() / (1.0 - cfg.ratio()) / k;

    Eigen::MatrixXcd fading(k, cfg.num_antennas);

    EnergyResult result;
    if (keep_trace) {
        result.trace_times.reserve(static_cast<std::size_t>(n_slots));
        result.trace_powers.reserve(static_cast<std::size_t>(n_slots));
    }

    long steps_done = 0;
    for (int j = 0; j < n_slots; ++j) {
        const double t_j = j * dt;
        const long steps_due = static_cast<long>(std::floor(t_j / cfg.mob.step_time + 1e-9));
        while (steps_done < steps_due) {
            for (int i = 0; i < k; ++i)
                positions[static_cast<std::size_t>(i)] =
                    step_random_walk(positions[static_cast<std::size_t>(i)], walk_streams[static_cast<std::size_t>(i)],
                                     cfg.mob, cfg.geom.radius);
            ++steps_done;
        }

        double power = 0.0;
        if (cfg.fading_mode == FadingMode::Hardened) {
            double sum = 0.0;
            for (const Point2& p : positions) sum += detail::inverse_gain(p, cfg.geom.pathloss_exp, cutoff_pow);
            power = hardened_scale * sum;
        } else {
            for (int attempt = 0;; ++attempt) {
                fading = sample_fading(fading_stream, k, cfg.num_antennas);
                try {
                    power = zf_power(channel_matrix(fading, positions, cfg.geom), cfg.rho);
                    break;
                } catch (const singular_matrix_error& e) {
                    if (attempt >= 1)
                        throw singular_matrix_error(std::string("simulate_energy: slot ") + std::to_string(j) +
                                                        " failed twice: " + e.what(),
                                                    e.condition_estimate());
                }
            }
        }

        const double width = std::min(dt, horizon - t_j);
        result.energy += power * width;
        if (keep_trace) {
            result.trace_times.push_back(t_j);
            result.trace_powers.push_back(power);
        }
    }
    return result;
}

} // namespace zfe
