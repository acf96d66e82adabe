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
// Repeated energy trials with deterministic per-trial substreams, moment
// summaries, and the theory-versus-simulation validation report.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "zfenergy/analytics.hpp"
#include "zfenergy/channel_engine.hpp"
#include "zfenergy/errors.hpp"
#include "zfenergy/special_math.hpp"
#include "zfenergy/version.hpp"

namespace zfe {

/// Per-trial total energies plus the seed lineage that produced them.
struct EnergySamples {
    std::vector<double> values; // J, indexed by trial
    std::uint64_t master_seed = 0;
    int n_trials = 0;
    std::uint64_t cfg_digest = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Moment estimates with normal-approximation confidence intervals and the
/// normality statistic of the standardized sample.
struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;     // J
    double variance = 0.0; // J^2, unbiased
    Interval mean_ci95;
    Interval variance_ci95;
    double ks_stat = 0.0;
    double ks_pvalue = 0.0;
};

/// Run `n_trials` independent energy simulations. Trial i always consumes
/// substream (master_seed, i), so results are bitwise identical for any
/// worker count and any scheduling order. Pass `traces` to also collect the
/// per-slot power trace of every trial.
inline EnergySamples run_trials(const SystemConfig& cfg, int n_trials, std::uint64_t master_seed,
                                int n_threads = 0, std::vector<EnergyResult>* traces = nullptr) {
    cfg.validate();
    if (n_trials < 1) throw config_error("run_trials: n_trials must be >= 1");
    int workers = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_trials));

    EnergySamples samples;
    samples.values.assign(static_cast<std::size_t>(n_trials), 0.0);
    samples.master_seed = master_seed;
    samples.n_trials = n_trials;
    samples.cfg_digest = config_digest(cfg);
    if (traces) traces->assign(static_cast<std::size_t>(n_trials), {});

    const PhiloxStream root(master_seed);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    int failed_trial = -1;
    std::string failure_message;

    const auto worker = [&]() {
        for (;;) {
            const int trial = next.fetch_add(1);
            if (trial >= n_trials || failed.load()) return;
            PhiloxStream stream = root.substream(static_cast<std::uint32_t>(trial));
            try {
                EnergyResult result = simulate_energy(cfg, stream, traces != nullptr);
                samples.values[static_cast<std::size_t>(trial)] = result.energy;
                if (traces) (*traces)[static_cast<std::size_t>(trial)] = std::move(result);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failed_trial < 0 || trial < failed_trial) {
                    failed_trial = trial;
                    failure_message = e.what();
                }
                failed.store(true);
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load())
        throw numerical_error("run_trials: trial " + std::to_string(failed_trial) +
                              " failed: " + failure_message);
    for (double v : samples.values)
        if (!(v > 0.0) || !std::isfinite(v))
            throw numerical_error("run_trials: non-positive or non-finite trial energy");
    return samples;
}

/// Summarize a sample set: unbiased moments, 95% normal-approximation CIs,
/// and the normality test of the standardized values.
inline MomentSummary summarize(const EnergySamples& samples) {
    if (samples.values.size() < 8) throw config_error("summarize: need at least 8 trials");
    const SampleStats st = sample_stats(samples.values);
    if (!(st.variance > 0.0)) throw config_error("summarize: degenerate sample set (zero variance)");

    MomentSummary s;
    s.n = st.n;
    s.mean = st.mean;
    s.variance = st.variance;
    const double n = static_cast<double>(st.n);
    const double mean_half = 1.959963984540054 * std::sqrt(st.variance / n);
    s.mean_ci95 = {st.mean - mean_half, st.mean + mean_half};
    const double var_half = 1.959963984540054 * st.variance * std::sqrt(2.0 / (n - 1.0));
    s.variance_ci95 = {std::max(0.0, st.variance - var_half), st.variance + var_half};
    const KsResult ks = ks_normality(samples.values);
    s.ks_stat = ks.statistic;
    s.ks_pvalue = ks.p_value;
    return s;
}

/// One point of the complementary CDF comparison Pr(E_T / T > alpha).
struct TailPoint {
    double alpha = 0.0;
    double empirical = 0.0;
    double theory = 0.0;
};

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

/// Empirical-versus-closed-form comparison of one configuration.
struct ValidationReport {
    std::uint64_t master_seed = 0;
    int n_trials = 0;
    std::uint64_t cfg_digest = 0;
    MomentPair theory;
    MomentSummary empirical;
    double mean_rel_error = 0.0;
    double variance_rel_error = 0.0;
    std::vector<TailPoint> tail;         // Pr(E_T/T > alpha) on an alpha grid
    std::vector<HistogramBin> histogram; // standardized samples
};

/// Run the full comparison: empirical mean and variance against the closed
/// forms, the normality test, and the tail curve Pr(E_T/T > alpha).
inline ValidationReport validate_gaussian_limit(const SystemConfig& cfg, int n_trials,
                                          std::uint64_t master_seed, int n_threads = 0) {
    const EnergySamples samples = run_trials(cfg, n_trials, master_seed, n_threads);
    ValidationReport report;
    report.master_seed = master_seed;
    report.n_trials = n_trials;
    report.cfg_digest = samples.cfg_digest;
    report.theory = energy_moments(cfg);
    report.empirical = summarize(samples);
    report.mean_rel_error =
        std::abs(report.empirical.mean - report.theory.mean_energy) / report.theory.mean_energy;
    report.variance_rel_error =
        std::abs(report.empirical.variance - report.theory.variance_total) / report.theory.variance_total;

    const double t = cfg.horizon;
    const double mean_rate = report.theory.mean_energy / t;
    const double sd_rate = std::sqrt(report.theory.variance_total) / t;
    const int n_alpha = 41;
    report.tail.reserve(n_alpha);
    for (int i = 0; i < n_alpha; ++i) {
        const double alpha = mean_rate + sd_rate * (-4.0 + 8.0 * i / (n_alpha - 1));
        int above = 0;
        for (double v : samples.values)
            if (v / t > alpha) ++above;
        const double theory_tail =
            gaussian_q((alpha * t - report.theory.mean_energy) / std::sqrt(report.theory.variance_total));
        report.tail.push_back({alpha, static_cast<double>(above) / n_trials, theory_tail});
    }

    const double emp_sd = std::sqrt(report.empirical.variance);
    const int n_bins = 24;
    report.histogram.assign(n_bins, {});
    for (int b = 0; b < n_bins; ++b) {
        report.histogram[static_cast<std::size_t>(b)].lo = -4.0 + 8.0 * b / n_bins;
        report.histogram[static_cast<std::size_t>(b)].hi = -4.0 + 8.0 * (b + 1) / n_bins;
    }
    for (double v : samples.values) {
        const double z = (v - report.empirical.mean) / emp_sd;
        int b = static_cast<int>(std::floor((z + 4.0) / 8.0 * n_bins));
        b = std::max(0, std::min(n_bins - 1, b));
        ++report.histogram[static_cast<std::size_t>(b)].count;
    }
    return report;
}

inline void write_samples_csv(std::ostream& os, const EnergySamples& samples) {
    os << "# zfenergy-csv-v1 samples\n";
    os << "trial,energy_J\n";
    char line[64];
    for (std::size_t i = 0; i < samples.values.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g\n", i, samples.values[i]);
        os << line;
    }
}

inline void write_power_trace_csv(std::ostream& os, const std::vector<EnergyResult>& traces) {
    os << "# zfenergy-csv-v1 power_trace\n";
    os << "trial,t,P\n";
    char line[96];
    for (std::size_t trial = 0; trial < traces.size(); ++trial)
        for (std::size_t j = 0; j < traces[trial].trace_times.size(); ++j) {
            std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", trial, traces[trial].trace_times[j],
                          traces[trial].trace_powers[j]);
            os << line;
        }
}

inline nlohmann::json to_json(const MomentSummary& s) {
    return {{"n", s.n},
            {"mean_J", s.mean},
            {"variance_J2", s.variance},
            {"mean_ci95", {s.mean_ci95.lo, s.mean_ci95.hi}},
            {"variance_ci95", {s.variance_ci95.lo, s.variance_ci95.hi}},
            {"ks_stat", s.ks_stat},
            {"ks_pvalue", s.ks_pvalue}};
}

inline nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json tail = nlohmann::json::array();
    for (const TailPoint& p : r.tail)
        tail.push_back({{"alpha", p.alpha}, {"empirical", p.empirical}, {"theory", p.theory}});
    nlohmann::json hist = nlohmann::json::array();
    for (const HistogramBin& b : r.histogram)
        hist.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});

    char digest_hex[32];
    std::snprintf(digest_hex, sizeof digest_hex, "%016llx", static_cast<unsigned long long>(r.cfg_digest));
    return {{"toolkit_version", kVersion},
            {"cfg_digest", digest_hex},
            {"master_seed", r.master_seed},
            {"n_trials", r.n_trials},
            {"theory",
             {{"mean_energy_J", r.theory.mean_energy},
              {"variance_mobility_J2", r.theory.variance_mobility},
              {"variance_fading_J2", r.theory.variance_fading},
              {"variance_total_J2", r.theory.variance_total}}},
            {"empirical", to_json(r.empirical)},
            {"mean_rel_error", r.mean_rel_error},
            {"variance_rel_error", r.variance_rel_error},
            {"tail", tail},
            {"histogram", hist}};
}

} // namespace zfe
