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
// End-to-end checks of the command-line front end, driven as a subprocess.

#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "zfenergy/config_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const fs::path& scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "zfe_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    const fs::path out = scratch_dir() / "stdout.txt";
    const fs::path err = scratch_dir() / "stderr.txt";
    const std::string cmd = std::string(ZFE_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                            err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream f(p);
    f << text;
    return p;
}

const std::string kSmallConfig = "K = 8\nN = 16\nrho = 1\nbeta = 4\nr0 = 0.1\nR = 1\n"
                                 "ell = 0.05\nxi = 0.0025\nT = 0.5\n";

} // namespace

TEST_CASE("analyze writes a manifest and a theory report") {
    const fs::path cfg = write_config("small.cfg", kSmallConfig);
    const fs::path out = scratch_dir() / "analyze_out";
    const CliResult r = run_cli("analyze --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("mean energy") != std::string::npos);

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("subcommand") == "analyze");
    CHECK(manifest.at("toolkit_version") == "1.0.0");

    const json theory = json::parse(slurp(out / "theory.json"));
    CHECK(theory.at("moments").at("mean_energy_J").get<double>() > 0.0);
    CHECK(theory.at("cfg_digest") == manifest.at("cfg_digest"));
}

TEST_CASE("config errors exit with code 2 and name the field") {
    SECTION("K >= N") {
        const fs::path cfg = write_config("kn.cfg", "K = 16\nN = 16\nrho = 1\nbeta = 4\nr0 = 0.1\n"
                                                    "R = 1\nell = 0.05\nxi = 0.0025\nT = 1\n");
        const CliResult r = run_cli("analyze --config " + cfg.string() + " --out " +
                                    (scratch_dir() / "kn_out").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("requires K < N") != std::string::npos);
    }

    SECTION("missing r0") {
        const fs::path cfg = write_config("missing.cfg", "K = 8\nN = 16\nrho = 1\nbeta = 4\nR = 1\n"
                                                         "ell = 0.05\nxi = 0.0025\nT = 1\n");
        const CliResult r = run_cli("analyze --config " + cfg.string() + " --out " +
                                    (scratch_dir() / "missing_out").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("'r0'") != std::string::npos);
    }

    SECTION("unknown field") {
        const fs::path cfg = write_config("unknown.cfg", kSmallConfig + "bogus = 3\n");
        const CliResult r = run_cli("analyze --config " + cfg.string() + " --out " +
                                    (scratch_dir() / "unknown_out").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("'bogus'") != std::string::npos);
    }

    SECTION("missing subcommand or config") {
        CHECK(run_cli("analyze").exit_code == 2);
        CHECK(run_cli("frobnicate").exit_code == 2);
    }
}

TEST_CASE("simulate writes samples and reproduces bitwise from its manifest") {
    const fs::path cfg = write_config("sim.cfg", kSmallConfig);

    SECTION("one trial gives a single data row") {
        const fs::path out = scratch_dir() / "sim_one";
        const CliResult r = run_cli("simulate --config " + cfg.string() + " --trials 1 --seed 7 --out " +
                                    out.string());
        REQUIRE(r.exit_code == 0);
        const std::string csv = slurp(out / "samples.csv");
        CHECK(csv.rfind("# zfenergy-csv-v1 samples\ntrial,energy_J\n0,", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    }

    SECTION("identical runs and manifest re-runs are byte-identical") {
        const fs::path out1 = scratch_dir() / "sim_a";
        const fs::path out2 = scratch_dir() / "sim_b";
        const fs::path out3 = scratch_dir() / "sim_c";
        REQUIRE(run_cli("simulate --config " + cfg.string() + " --trials 40 --seed 3 --threads 1 --out " +
                        out1.string())
                    .exit_code == 0);
        REQUIRE(run_cli("simulate --config " + cfg.string() + " --trials 40 --seed 3 --threads 4 --out " +
                        out2.string())
                    .exit_code == 0);
        REQUIRE(run_cli("simulate --manifest " + (out1 / "manifest.json").string() + " --out " +
                        out3.string())
                    .exit_code == 0);
        const std::string csv1 = slurp(out1 / "samples.csv");
        CHECK(csv1 == slurp(out2 / "samples.csv"));
        CHECK(csv1 == slurp(out3 / "samples.csv"));
        CHECK(!csv1.empty());

        const json summary = json::parse(slurp(out1 / "summary.json"));
        CHECK(summary.at("n_trials") == 40);
        CHECK(summary.at("summary").at("mean_J").get<double>() > 0.0);
    }

    SECTION("verbose adds a power trace") {
        const fs::path out = scratch_dir() / "sim_v";
        REQUIRE(run_cli("simulate --config " + cfg.string() + " --trials 2 --seed 1 --verbose --out " +
                        out.string())
                    .exit_code == 0);
        const std::string trace = slurp(out / "power_trace.csv");
        CHECK(trace.rfind("# zfenergy-csv-v1 power_trace\ntrial,t,P\n", 0) == 0);
        CHECK(std::count(trace.begin(), trace.end(), '\n') == 2 + 2 * 200); // 2 trials x 200 slots
    }
}

TEST_CASE("dimension reproduces the worked sizing example from overrides") {
    const fs::path cfg = write_config("dim.cfg", kSmallConfig);
    const fs::path out = scratch_dir() / "dim_out";
    const CliResult r = run_cli("dimension --config " + cfg.string() +
                                " --epsilon 0.01 --mean 1730 --variance 56500 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(slurp(out / "dimension.json"));
    const double eta = rep.at("eta_J").get<double>();
    CHECK(eta > 2.27e3);
    CHECK(eta < 2.29e3);
    CHECK(rep.at("moments_source") == "override");

    SECTION("an even budget returns the mean") {
        const fs::path out2 = scratch_dir() / "dim_mean";
        REQUIRE(run_cli("dimension --config " + cfg.string() +
                        " --epsilon 0.5 --mean 1730 --variance 56500 --out " + out2.string())
                    .exit_code == 0);
        const json rep2 = json::parse(slurp(out2 / "dimension.json"));
        CHECK(rep2.at("eta_J").get<double>() == Approx(1730.0).margin(1e-6));
    }

    SECTION("epsilon domain and override pairing") {
        CHECK(run_cli("dimension --config " + cfg.string() + " --epsilon 1.5 --out " +
                      (scratch_dir() / "dim_bad").string())
                  .exit_code == 2);
        CHECK(run_cli("dimension --config " + cfg.string() + " --epsilon 0.1 --mean 10 --out " +
                      (scratch_dir() / "dim_pair").string())
                  .exit_code == 2);
    }
}

TEST_CASE("dimension empirical quantile agrees with the analytic level") {
    // Hardened run long enough for the Gaussian limit to be a good fit.
    const fs::path cfg = write_config("dimq.cfg", "K = 16\nN = 32\nrho = 1\nbeta = 4\nr0 = 0.1\nR = 1\n"
                                                  "ell = 0.05\nxi = 0.0025\nT = 4\n");
    const fs::path sim_out = scratch_dir() / "dimq_sim";
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --trials 1200 --seed 5 --out " +
                    sim_out.string())
                .exit_code == 0);
    const fs::path out = scratch_dir() / "dimq_out";
    REQUIRE(run_cli("dimension --config " + cfg.string() + " --epsilon 0.1 --samples " +
                    (sim_out / "samples.csv").string() + " --out " + out.string())
                .exit_code == 0);
    const json rep = json::parse(slurp(out / "dimension.json"));
    const double analytic = rep.at("eta_J").get<double>();
    const double empirical = rep.at("empirical_eta_J").get<double>();
    CHECK(std::abs(empirical - analytic) / analytic < 0.05);
}

TEST_CASE("validate emits the full bundle") {
    const fs::path cfg = write_config("val.cfg", "K = 16\nN = 32\nrho = 1\nbeta = 4\nr0 = 0.1\nR = 1\n"
                                                 "ell = 0.05\nxi = 0.0025\nT = 4\n");
    const fs::path out = scratch_dir() / "val_out";
    const CliResult r = run_cli("validate --config " + cfg.string() +
                                " --trials 500 --seed 12 --assert --out " + out.string());
    REQUIRE(r.exit_code == 0); // tolerances hold at this scale

    const json v = json::parse(slurp(out / "validation.json"));
    CHECK(v.at("mean_rel_error").get<double>() < 0.05);
    CHECK(v.at("variance_rel_error").get<double>() < 0.15);
    CHECK(v.at("empirical").at("ks_pvalue").get<double>() > 0.01);
    CHECK(v.at("reference_comparison").at("rows").size() == 8);
    CHECK(v.at("tail").size() == 41);

    const std::string hist = slurp(out / "histogram.csv");
    CHECK(hist.rfind("# zfenergy-csv-v1 histogram\nlo,hi,count\n", 0) == 0);
    CHECK(std::count(hist.begin(), hist.end(), '\n') == 2 + 24);
    const std::string tail = slurp(out / "tail.csv");
    CHECK(std::count(tail.begin(), tail.end(), '\n') == 2 + 41);
    CHECK(fs::exists(out / "samples.csv"));

    SECTION("reference rows carry both computed and reference values") {
        const json row = v.at("reference_comparison").at("rows").at(0);
        CHECK(row.at("computed_mean_J").get<double>() == Approx(0.6668666666666666).epsilon(1e-9));
        CHECK(row.at("reference_mean_J").get<double>() == Approx(1.33));
    }
}

TEST_CASE("validate sweep block reports per-step-scale moments") {
    const fs::path cfg = write_config("sweep.cfg", kSmallConfig);
    const fs::path out = scratch_dir() / "sweep_out";
    const CliResult r = run_cli("validate --config " + cfg.string() +
                                " --trials 120 --seed 9 --sweep --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const json v = json::parse(slurp(out / "validation.json"));
    REQUIRE(v.contains("step_size_sweep"));
    REQUIRE(v.at("step_size_sweep").size() == 3);
    for (const auto& entry : v.at("step_size_sweep")) {
        CHECK(entry.at("mean_J").get<double>() > 0.0);
        CHECK(entry.at("variance_J2").get<double>() > 0.0);
    }
    // halving the step length keeps the diffusion constant
    CHECK(v.at("step_size_sweep").at(1).at("ell").get<double>() == Approx(0.025));
    CHECK(v.at("step_size_sweep").at(1).at("xi").get<double>() == Approx(0.000625));
}

TEST_CASE("validate --assert exits 4 when the horizon is too short for the asymptotics") {
    // At DT/R^2 = 0.125 the sample variance sits far above the long-horizon
    // closed form, so the assertion gate must trip.
    const fs::path cfg = write_config("short.cfg", kSmallConfig);
    const fs::path out = scratch_dir() / "short_out";
    const CliResult r = run_cli("validate --config " + cfg.string() +
                                " --trials 400 --seed 4 --assert --out " + out.string());
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("validation failure") != std::string::npos);
    CHECK(fs::exists(out / "validation.json")); // the bundle is still written
}

TEST_CASE("dimension re-runs from its manifest with overrides preserved") {
    const fs::path cfg = write_config("dimm.cfg", kSmallConfig);
    const fs::path out1 = scratch_dir() / "dimm_a";
    const fs::path out2 = scratch_dir() / "dimm_b";
    REQUIRE(run_cli("dimension --config " + cfg.string() +
                    " --epsilon 0.02 --mean 500 --variance 900 --out " + out1.string())
                .exit_code == 0);
    REQUIRE(run_cli("dimension --manifest " + (out1 / "manifest.json").string() + " --out " +
                    out2.string())
                .exit_code == 0);
    CHECK(slurp(out1 / "dimension.json") == slurp(out2 / "dimension.json"));
}

TEST_CASE("validate emits histogram data at the reference histogram configuration") {
    // T=10, K=16, N=32, beta=4 in toy units; pass/fail rides on the KS
    // result, not on any particular histogram shape.
    const fs::path cfg = write_config("fig.cfg", "K = 16\nN = 32\nrho = 1\nbeta = 4\nr0 = 0.1\nR = 1\n"
                                                 "ell = 0.05\nxi = 0.0025\nT = 10\n");
    const fs::path out = scratch_dir() / "fig_out";
    const CliResult r = run_cli("validate --config " + cfg.string() + " --trials 600 --seed 21 --out " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    const json v = json::parse(slurp(out / "validation.json"));
    CHECK(v.at("empirical").at("ks_pvalue").get<double>() > 0.01);
    int total = 0;
    for (const auto& b : v.at("histogram")) total += b.at("count").get<int>();
    CHECK(total == 600);
    CHECK(fs::exists(out / "histogram.csv"));
}
