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
// Run a batch of energy trials and put the sample moments next to the
// closed forms, including the normality check of the standardized sample.

#include <cmath>
#include <cstdio>

#include "zfenergy/analytics.hpp"
#include "zfenergy/montecarlo.hpp"

int main() {
    zfe::SystemConfig cfg;
    cfg.num_ues = 32;
    cfg.num_antennas = 64;
    cfg.rho = 1.0;
    cfg.geom = {1.0, 0.1, 4.0};
    cfg.mob = {0.05, 0.0025};
    cfg.horizon = 10.0;
    cfg.fading_mode = zfe::FadingMode::Hardened;

    const int trials = 800;
    const zfe::EnergySamples samples = zfe::run_trials(cfg, trials, /*master_seed=*/42);
    const zfe::MomentSummary sim = zfe::summarize(samples);
    const zfe::MomentPair theory = zfe::energy_moments(cfg);

    std::printf("%-22s %-14s %s\n", "", "simulation", "closed form");
    std::printf("%-22s %-14.6f %.6f\n", "mean (J)", sim.mean, theory.mean_energy);
    std::printf("%-22s %-14.6f %.6f\n", "variance (J^2)", sim.variance, theory.variance_total);
    std::printf("mean 95%% CI            [%.6f, %.6f]\n", sim.mean_ci95.lo, sim.mean_ci95.hi);
    std::printf("KS of standardized     D = %.4f, p = %.3f\n", sim.ks_stat, sim.ks_pvalue);

    const double eta = zfe::battery_requirement(0.01, theory);
    std::printf("\nbattery for 1%% outage  %.4f J  (empirical tail there: %.4f)\n", eta,
                [&] {
                    int above = 0;
                    for (double v : samples.values)
                        if (v > eta) ++above;
                    return static_cast<double>(above) / trials;
                }());
    return 0;
}
