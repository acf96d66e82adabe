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
// Independent numerical oracles used by the test suites. None of these call
// into the implementation paths they are used to check.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "zfenergy/cell_model.hpp"
#include "zfenergy/rng.hpp"

namespace oracle {

// Long-double ascending power series for J0 and J1.
inline long double j0_series(long double x) {
    const long double q = 0.25L * x * x;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m < 300; ++m) {
        term *= -q / (static_cast<long double>(m) * m);
        sum += term;
        if (fabsl(term) < 1e-25L * (1.0L + fabsl(sum))) break;
    }
    return sum;
}

inline long double j1_series(long double x) {
    const long double q = 0.25L * x * x;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m < 300; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + 1.0L));
        sum += term;
        if (fabsl(term) < 1e-25L * (1.0L + fabsl(sum))) break;
    }
    return 0.5L * x * sum;
}

inline long double j1_prime_series(long double x) {
    if (x == 0.0L) return 0.5L;
    return j0_series(x) - j1_series(x) / x;
}

// Bisection on a bracketing interval of a sign change.
inline long double bisect(const std::function<long double(long double)>& f, long double lo,
                          long double hi) {
    long double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        if (mid == lo || mid == hi) break;
        const long double fm = f(mid);
        if ((flo < 0.0L) != (fm < 0.0L)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5L * (lo + hi);
}

// Brute-force trapezoid quadrature in long double.
inline long double trapezoid(const std::function<long double(long double)>& f, long double a,
                             long double b, int n) {
    long double sum = 0.5L * (f(a) + f(b));
    for (int i = 1; i < n; ++i) sum += f(a + (b - a) * i / n);
    return sum * (b - a) / n;
}

// Upper-tail asymptotic expansion of the Gaussian tail, truncated at its
// smallest term; near machine accuracy for z >= 7.
inline long double gaussian_q_asymptotic(long double z) {
    const long double pdf = expl(-0.5L * z * z) / sqrtl(2.0L * 3.14159265358979323846264338328L);
    long double term = 1.0L, sum = 1.0L, prev = 1e30L;
    for (int k = 1; k < 64; ++k) {
        term *= -(2.0L * k - 1.0L) / (z * z);
        if (fabsl(term) >= prev) break;
        sum += term;
        prev = fabsl(term);
    }
    return pdf / z * sum;
}

// Series + continued-fraction Gaussian tail, independent of std::erfc.
inline long double gaussian_q_ref(long double z) {
    const long double pi = 3.14159265358979323846264338328L;
    const bool flip = z < 0.0L;
    const long double az = fabsl(z);
    long double q;
    if (az < 3.0L) {
        // Q(z) = 1/2 - phi(z) * sum_{k>=0} z^(2k+1) / (1*3*5*...*(2k+1))
        long double term = az, sum = az;
        for (int k = 1; k < 200; ++k) {
            term *= az * az / (2.0L * k + 1.0L);
            sum += term;
            if (term < 1e-25L * sum) break;
        }
        q = 0.5L - expl(-0.5L * az * az) / sqrtl(2.0L * pi) * sum;
    } else {
        // Mills-ratio continued fraction: Q(z) = phi(z) / (z + 1/(z + 2/(z + ...)))
        long double cf = 0.0L;
        for (int k = 60; k >= 1; --k) cf = static_cast<long double>(k) / (az + cf);
        q = expl(-0.5L * az * az) / sqrtl(2.0L * pi) / (az + cf);
    }
    return flip ? 1.0L - q : q;
}

/// Twin-walk covariance estimate of cov[r^beta(t1), r^beta(t2)] for walkers
/// started uniformly, averaged over the start. Each pair shares a start and
/// walks independently; the statistic (f - f~)(f' - f~')/2 is an unbiased
/// estimate of the expected conditional covariance.
struct CovarianceEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

inline CovarianceEstimate twin_walk_covariance(int n_pairs, long steps1, long steps2, double beta,
                                               const zfe::MobilityParams& mob, double radius,
                                               std::uint64_t seed) {
    if (steps1 > steps2) std::swap(steps1, steps2);
    const zfe::PhiloxStream root(seed);
    const long last = std::max(steps1, steps2);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        zfe::PhiloxStream pair_stream = root.substream(static_cast<std::uint32_t>(i));
        zfe::PhiloxStream walk_a = pair_stream.substream(0);
        zfe::PhiloxStream walk_b = pair_stream.substream(1);
        zfe::PhiloxStream place = pair_stream.substream(2);
        const zfe::Point2 start = zfe::sample_uniform_disk(place, radius);
        zfe::Point2 a = start, b = start;
        double fa1 = 0.0, fb1 = 0.0;
        for (long j = 1; j <= last; ++j) {
            a = zfe::step_random_walk(a, walk_a, mob, radius);
            b = zfe::step_random_walk(b, walk_b, mob, radius);
            if (j == steps1) {
                fa1 = std::pow(a.norm2(), 0.5 * beta);
                fb1 = std::pow(b.norm2(), 0.5 * beta);
            }
        }
        const double fa2 = (steps2 == last) ? std::pow(a.norm2(), 0.5 * beta) : fa1;
        const double fb2 = (steps2 == last) ? std::pow(b.norm2(), 0.5 * beta) : fb1;
        const double u = 0.5 * (fa1 - fb1) * (fa2 - fb2);
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n_pairs;
    const double var = (sumsq / n_pairs - mean * mean) / (n_pairs - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0))};
}

} // namespace oracle
