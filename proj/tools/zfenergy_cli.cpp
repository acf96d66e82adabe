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
// Command-line front end: analyze | simulate | dimension | validate.
// Every run writes its manifest before any computation; re-running from a
// manifest reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "zfenergy/analytics.hpp"
#include "zfenergy/cell_model.hpp"
#include "zfenergy/channel_engine.hpp"
#include "zfenergy/config_io.hpp"
#include "zfenergy/montecarlo.hpp"
#include "zfenergy/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

struct validation_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::string manifest_path;
    std::string out_dir = "zfenergy_out";
    std::string samples_path;
    std::uint64_t seed = 1;
    int trials = 2000;
    int threads = 0;
    double epsilon = 0.01;
    std::optional<double> mean_override;
    std::optional<double> variance_override;
    bool verbose = false;
    bool check = false;
    bool sweep = false;
};

std::string digest_hex(std::uint64_t digest) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw zfe::config_error("cannot open output file '" + path.string() + "'");
    out << content;
}

/// Resolve the configuration either from --config or from a prior manifest.
/// A manifest restores the resolved config, seed, and trial count.
zfe::SystemConfig resolve_config(Options& opts, const std::string& subcommand) {
    if (!opts.manifest_path.empty()) {
        std::ifstream in(opts.manifest_path);
        if (!in) throw zfe::config_error("cannot open manifest '" + opts.manifest_path + "'");
        json manifest;
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw zfe::config_error("manifest parse failure: " + std::string(e.what()));
        }
        if (manifest.value("subcommand", "") != subcommand)
            throw zfe::config_error("manifest subcommand '" + manifest.value("subcommand", "") +
                                    "' does not match '" + subcommand + "'");
        opts.seed = manifest.value("seed", opts.seed);
        opts.trials = manifest.value("trials", opts.trials);
        if (manifest.contains("epsilon")) opts.epsilon = manifest["epsilon"].get<double>();
        if (manifest.contains("mean_override")) opts.mean_override = manifest["mean_override"].get<double>();
        if (manifest.contains("variance_override"))
            opts.variance_override = manifest["variance_override"].get<double>();
        opts.verbose = manifest.value("verbose", opts.verbose);
        opts.sweep = manifest.value("sweep", opts.sweep);
        opts.config_path = manifest.value("config_path", opts.config_path);
        return zfe::parse_config_text(manifest.at("config").get<std::string>());
    }
    if (opts.config_path.empty()) throw zfe::config_error("either --config or --manifest is required");
    return zfe::load_config(opts.config_path);
}

json make_manifest(const std::string& subcommand, const Options& opts, const zfe::SystemConfig& cfg) {
    json m;
    m["toolkit_version"] = zfe::kVersion;
    m["subcommand"] = subcommand;
    m["config_path"] = opts.config_path;
    m["output_dir"] = opts.out_dir;
    m["seed"] = opts.seed;
    m["trials"] = opts.trials;
    m["threads"] = opts.threads;
    if (subcommand == "dimension") {
        m["epsilon"] = opts.epsilon;
        if (opts.mean_override) m["mean_override"] = *opts.mean_override;
        if (opts.variance_override) m["variance_override"] = *opts.variance_override;
    }
    if (opts.verbose) m["verbose"] = true;
    if (opts.sweep) m["sweep"] = true;
    m["cfg_digest"] = digest_hex(zfe::config_digest(cfg));
    m["config"] = zfe::canonical_text(cfg);
    return m;
}

std::filesystem::path prepare_out_dir(const Options& opts, const std::string& subcommand,
                                      const zfe::SystemConfig& cfg) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "manifest.json", make_manifest(subcommand, opts, cfg).dump(2) + "\n");
    return dir;
}

// ----- analyze ------------------------------------------------------------

int cmd_analyze(Options& opts) {
    const zfe::SystemConfig cfg = resolve_config(opts, "analyze");
    const auto dir = prepare_out_dir(opts, "analyze", cfg);

    const json report = zfe::theory_report(cfg);
    write_file(dir / "theory.json", report.dump(2) + "\n");

    const zfe::MomentPair m = zfe::energy_moments(cfg);
    std::printf("configuration digest   %s\n", digest_hex(zfe::config_digest(cfg)).c_str());
    std::printf("ratio c = K/N          %.6g\n", cfg.ratio());
    std::printf("rate per user          %.6g bit/s/Hz\n", zfe::achievable_rate(cfg.rho, cfg.sigma2));
    std::printf("mean energy            %.6e J\n", m.mean_energy);
    std::printf("variance (mobility)    %.6e J^2\n", m.variance_mobility);
    std::printf("variance (fading)      %.6e J^2\n", m.variance_fading);
    std::printf("variance (total)       %.6e J^2\n", m.variance_total);
    std::printf("theta terms            %zu (total %.9e)\n",
                report["theta"]["terms"].size(), report["theta"]["total"].get<double>());
    std::printf("report                 %s\n", (dir / "theory.json").string().c_str());
    return kExitOk;
}

// ----- simulate -----------------------------------------------------------

int cmd_simulate(Options& opts) {
    const zfe::SystemConfig cfg = resolve_config(opts, "simulate");
    const auto dir = prepare_out_dir(opts, "simulate", cfg);

    std::vector<zfe::EnergyResult> traces;
    const zfe::EnergySamples samples =
        zfe::run_trials(cfg, opts.trials, opts.seed, opts.threads, opts.verbose ? &traces : nullptr);

    {
        std::ofstream out(dir / "samples.csv", std::ios::binary);
        zfe::write_samples_csv(out, samples);
    }
    if (opts.verbose) {
        std::ofstream out(dir / "power_trace.csv", std::ios::binary);
        zfe::write_power_trace_csv(out, traces);
    }

    json summary;
    summary["toolkit_version"] = zfe::kVersion;
    summary["cfg_digest"] = digest_hex(samples.cfg_digest);
    summary["master_seed"] = samples.master_seed;
    summary["n_trials"] = samples.n_trials;
    if (samples.n_trials >= 8) summary["summary"] = zfe::to_json(zfe::summarize(samples));
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    std::printf("trials    %d\n", samples.n_trials);
    if (samples.n_trials >= 8) {
        const zfe::MomentSummary s = zfe::summarize(samples);
        std::printf("mean      %.6e J   [%.6e, %.6e]\n", s.mean, s.mean_ci95.lo, s.mean_ci95.hi);
        std::printf("variance  %.6e J^2 [%.6e, %.6e]\n", s.variance, s.variance_ci95.lo, s.variance_ci95.hi);
        std::printf("KS        D=%.4f p=%.4f\n", s.ks_stat, s.ks_pvalue);
    }
    std::printf("samples   %s\n", (dir / "samples.csv").string().c_str());
    return kExitOk;
}

// ----- dimension ----------------------------------------------------------

std::vector<double> load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw zfe::config_error("cannot open samples file '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("trial", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (values.empty()) throw zfe::config_error("samples file '" + path + "' contains no rows");
    return values;
}

int cmd_dimension(Options& opts) {
    const zfe::SystemConfig cfg = resolve_config(opts, "dimension");
    if (!(opts.epsilon > 0.0) || !(opts.epsilon < 1.0))
        throw zfe::config_error("--epsilon must lie in (0,1)");
    if (opts.mean_override.has_value() != opts.variance_override.has_value())
        throw zfe::config_error("--mean and --variance must be given together");
    const auto dir = prepare_out_dir(opts, "dimension", cfg);

    zfe::MomentPair moments;
    std::string source = "analytic";
    if (opts.mean_override) {
        moments.mean_energy = *opts.mean_override;
        moments.variance_mobility = *opts.variance_override;
        moments.variance_fading = 0.0;
        moments.variance_total = *opts.variance_override;
        source = "override";
    } else {
        moments = zfe::energy_moments(cfg);
    }
    const double eta = zfe::battery_requirement(opts.epsilon, moments);

    json report;
    report["toolkit_version"] = zfe::kVersion;
    report["cfg_digest"] = digest_hex(zfe::config_digest(cfg));
    report["epsilon"] = opts.epsilon;
    report["moments_source"] = source;
    report["mean_J"] = moments.mean_energy;
    report["variance_J2"] = moments.variance_total;
    report["eta_J"] = eta;
    report["outage_at_eta"] = zfe::outage_probability(eta, moments);

    if (!opts.samples_path.empty()) {
        std::vector<double> values = load_samples_csv(opts.samples_path);
        std::sort(values.begin(), values.end());
        const double pos = (1.0 - opts.epsilon) * (static_cast<double>(values.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        report["empirical_eta_J"] = values[lo] + frac * (values[hi] - values[lo]);
        report["samples_path"] = opts.samples_path;
        report["samples_n"] = values.size();
    }
    write_file(dir / "dimension.json", report.dump(2) + "\n");

    std::printf("epsilon   %.6g\n", opts.epsilon);
    std::printf("mean      %.6e J (%s)\n", moments.mean_energy, source.c_str());
    std::printf("variance  %.6e J^2\n", moments.variance_total);
    std::printf("eta       %.6e J\n", eta);
    if (report.contains("empirical_eta_J"))
        std::printf("eta (empirical quantile) %.6e J\n", report["empirical_eta_J"].get<double>());
    return kExitOk;
}

// ----- validate -----------------------------------------------------------

json reference_comparison() {
    // Fixed parameter sets of the bundled reference table; the rows use the
    // toy units R=1, r0=0.1, rho=1, ell=0.05, xi=0.0025.
    struct Row {
        double horizon;
        int num_ues, num_antennas;
        double beta;
        double ref_mean, ref_var;
    };
    static const Row rows[] = {
        {2.0, 16, 32, 4.0, 1.33, 0.015},   {2.0, 16, 64, 4.0, 0.889, 0.0067},
        {10.0, 16, 32, 4.0, 6.668, 0.0891}, {10.0, 16, 64, 4.0, 4.445, 0.0396},
        {2.0, 64, 128, 4.0, 0.889, 0.0067}, {2.0, 64, 128, 6.0, 1.0, 0.0029},
        {10.0, 64, 128, 4.0, 4.445, 0.0396}, {10.0, 64, 128, 6.0, 5.0, 0.0169},
    };
    json block;
    block["note"] =
        "reference mean/variance values as published do not reproduce from the closed-form "
        "expressions implemented here; they are reported for context, not used as targets";
    json list = json::array();
    for (const Row& row : rows) {
        zfe::SystemConfig cfg;
        cfg.num_ues = row.num_ues;
        cfg.num_antennas = row.num_antennas;
        cfg.rho = 1.0;
        cfg.geom = {1.0, 0.1, row.beta};
        cfg.mob = {0.05, 0.0025};
        cfg.horizon = row.horizon;
        const zfe::MomentPair m = zfe::energy_moments(cfg);
        list.push_back({{"T", row.horizon},
                        {"K", row.num_ues},
                        {"N", row.num_antennas},
                        {"beta", row.beta},
                        {"computed_mean_J", m.mean_energy},
                        {"computed_variance_J2", m.variance_total},
                        {"reference_mean_J", row.ref_mean},
                        {"reference_variance_J2", row.ref_var}});
    }
    block["rows"] = list;
    return block;
}

json step_size_sweep(const zfe::SystemConfig& base, const Options& opts) {
    json sweep = json::array();
    const int trials = std::max(100, opts.trials / 4);
    for (int scale : {1, 2, 4}) {
        zfe::SystemConfig cfg = base;
        cfg.mob.step_length = base.mob.step_length / scale;
        cfg.mob.step_time = base.mob.step_time / (scale * scale); // keeps D fixed
        cfg.time_step = 0.0;
        cfg.tau_d = base.tau();
        const zfe::EnergySamples samples = zfe::run_trials(cfg, trials, opts.seed, opts.threads);
        const zfe::MomentSummary s = zfe::summarize(samples);
        sweep.push_back({{"step_scale", scale},
                         {"ell", cfg.mob.step_length},
                         {"xi", cfg.mob.step_time},
                         {"trials", trials},
                         {"mean_J", s.mean},
                         {"variance_J2", s.variance}});
    }
    return sweep;
}

int cmd_validate(Options& opts) {
    const zfe::SystemConfig cfg = resolve_config(opts, "validate");
    const auto dir = prepare_out_dir(opts, "validate", cfg);

    const zfe::EnergySamples samples = zfe::run_trials(cfg, opts.trials, opts.seed, opts.threads);
    zfe::ValidationReport report;
    {
        // reuse the drawn samples for the full report
        report.master_seed = opts.seed;
        report.n_trials = opts.trials;
        report.cfg_digest = samples.cfg_digest;
        report.theory = zfe::energy_moments(cfg);
        report.empirical = zfe::summarize(samples);
        report.mean_rel_error =
            std::abs(report.empirical.mean - report.theory.mean_energy) / report.theory.mean_energy;
        report.variance_rel_error = std::abs(report.empirical.variance - report.theory.variance_total) /
                                    report.theory.variance_total;
        const double t = cfg.horizon;
        const double mean_rate = report.theory.mean_energy / t;
        const double sd_rate = std::sqrt(report.theory.variance_total) / t;
        for (int i = 0; i < 41; ++i) {
            const double alpha = mean_rate + sd_rate * (-4.0 + 8.0 * i / 40.0);
            int above = 0;
            for (double v : samples.values)
                if (v / t > alpha) ++above;
            report.tail.push_back({alpha, static_cast<double>(above) / opts.trials,
                                   zfe::gaussian_q((alpha * t - report.theory.mean_energy) /
                                                   std::sqrt(report.theory.variance_total))});
        }
        const double sd = std::sqrt(report.empirical.variance);
        report.histogram.assign(24, {});
        for (int b = 0; b < 24; ++b)
            report.histogram[static_cast<std::size_t>(b)] = {-4.0 + b / 3.0, -4.0 + (b + 1) / 3.0, 0};
        for (double v : samples.values) {
            int b = static_cast<int>(std::floor(((v - report.empirical.mean) / sd + 4.0) * 3.0));
            b = std::max(0, std::min(23, b));
            ++report.histogram[static_cast<std::size_t>(b)].count;
        }
    }

    {
        std::ofstream out(dir / "samples.csv", std::ios::binary);
        zfe::write_samples_csv(out, samples);
    }
    {
        std::string csv = "# zfenergy-csv-v1 histogram\nlo,hi,count\n";
        char line[96];
        for (const auto& b : report.histogram) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", b.lo, b.hi, b.count);
            csv += line;
        }
        write_file(dir / "histogram.csv", csv);
    }
    {
        std::string csv = "# zfenergy-csv-v1 tail\nalpha,empirical,theory\n";
        char line[128];
        for (const auto& p : report.tail) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.alpha, p.empirical, p.theory);
            csv += line;
        }
        write_file(dir / "tail.csv", csv);
    }

    json out = zfe::to_json(report);
    out["reference_comparison"] = reference_comparison();
    if (opts.sweep) out["step_size_sweep"] = step_size_sweep(cfg, opts);
    write_file(dir / "validation.json", out.dump(2) + "\n");

    std::printf("empirical mean     %.6e J (rel err %.3f%%)\n", report.empirical.mean,
                100.0 * report.mean_rel_error);
    std::printf("empirical variance %.6e J^2 (rel err %.3f%%)\n", report.empirical.variance,
                100.0 * report.variance_rel_error);
    std::printf("KS                 D=%.4f p=%.4f\n", report.empirical.ks_stat, report.empirical.ks_pvalue);
    std::printf("report             %s\n", (dir / "validation.json").string().c_str());

    if (opts.check) {
        if (report.mean_rel_error > 0.05)
            throw validation_failure("validate: mean relative error above 5%");
        if (report.variance_rel_error > 0.15)
            throw validation_failure("validate: variance relative error above 15%");
        if (!(report.empirical.ks_pvalue > 0.01))
            throw validation_failure("validate: KS p-value not above 0.01");
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy statistics toolkit for a multi-antenna downlink with mobile users"};
    app.require_subcommand(1);
    Options opts;

    const auto add_common = [&opts](CLI::App* cmd, bool with_trials) {
        cmd->add_option("--config", opts.config_path, "experiment configuration (flat key=value file)");
        cmd->add_option("--out", opts.out_dir, "output directory (default zfenergy_out)");
        cmd->add_option("--manifest", opts.manifest_path, "re-run from a previous manifest");
        if (with_trials) {
            cmd->add_option("--trials", opts.trials, "number of independent trials");
            cmd->add_option("--seed", opts.seed, "master seed");
            cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
        }
        cmd->add_flag("--verbose", opts.verbose, "also write per-trial power traces");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "closed-form moments and the Theta term table");
    add_common(analyze, false);

    CLI::App* simulate = app.add_subcommand("simulate", "run energy trials, write samples and summary");
    add_common(simulate, true);

    CLI::App* dimension = app.add_subcommand("dimension", "battery level for a given outage budget");
    add_common(dimension, false);
    dimension->add_option("--epsilon", opts.epsilon, "outage probability budget in (0,1)");
    dimension->add_option("--samples", opts.samples_path, "samples CSV for an empirical quantile");
    dimension->add_option("--mean", opts.mean_override, "override the analytic mean (J)");
    dimension->add_option("--variance", opts.variance_override, "override the analytic variance (J^2)");

    CLI::App* validate = app.add_subcommand("validate", "theory-versus-simulation validation bundle");
    add_common(validate, true);
    validate->add_flag("--assert", opts.check, "exit 4 when the comparison breaches tolerances");
    validate->add_flag("--sweep", opts.sweep, "include a walk step-size sensitivity sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(opts);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (dimension->parsed()) return cmd_dimension(opts);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const zfe::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const validation_failure& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const zfe::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
