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
// Size the energy reserve of a stand-alone base station: compute the
// closed-form moments of the consumed energy and the battery level needed
// to keep the outage probability under a set of budgets.

#include <cstdio>

#include "zfenergy/analytics.hpp"

int main() {
    zfe::SystemConfig cfg;
    cfg.num_ues = 16;
    cfg.num_antennas = 32;
    cfg.rho = 1.0;
    cfg.geom = {1.0, 0.1, 4.0}; // R, r0, path-loss exponent
    cfg.mob = {0.05, 0.0025};   // step length, step time -> D = 0.25
    cfg.horizon = 10.0;

    const zfe::MomentPair m = zfe::energy_moments(cfg);
    std::printf("mean energy         %.6f J\n", m.mean_energy);
    std::printf("variance (mobility) %.6f J^2\n", m.variance_mobility);
    std::printf("variance (fading)   %.3e J^2\n", m.variance_fading);

    std::printf("\n%-12s %-12s %s\n", "epsilon", "eta (J)", "headroom over the mean");
    for (double eps : {0.2, 0.05, 0.01, 0.001}) {
        const double eta = zfe::battery_requirement(eps, m);
        std::printf("%-12g %-12.4f %+.1f%%\n", eps, eta, 100.0 * (eta / m.mean_energy - 1.0));
    }
    return 0;
}
