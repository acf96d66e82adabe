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
// Self-contained numerical primitives: Bessel J0/J1 and the J1 derivative,
// zero tables, adaptive Simpson quadrature, the Gaussian tail function and
// its inverse, and basic sample statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zfenergy/errors.hpp"

namespace zfe {

namespace detail {

inline void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) throw config_error(std::string(name) + ": non-finite input rejected");
}

// Ascending power series; accurate to ~1e-12 absolute for |x| <= 12.
inline double bessel_j0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 80; ++m) {
        term *= -q / (static_cast<double>(m) * m);
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

inline double bessel_j1_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 80; ++m) {
        term *= -q / (static_cast<double>(m) * (m + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return 0.5 * x * sum;
}

// Downward (Miller) recurrence with normalization J0 + 2*sum J_{2m} = 1.
// Returns J_0..J_n at x > 0. Stable at every order and argument; used both
// for large-argument J0/J1 and by the disk propagator's angular modes.
inline std::vector<double> bessel_j_sequence(double x, int n_max) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int start = std::max(n_max, static_cast<int>(x)) + 128;
    double jnext = 0.0;   // J_{m+1}
    double jcur = 1e-280; // J_m (arbitrary scale)
    double norm = 0.0;    // accumulates J0 + 2*J2 + 2*J4 + ...
    for (int m = start; m >= 1; --m) {
        double jprev = (2.0 * m / x) * jcur - jnext;
        jnext = jcur;
        jcur = jprev;
        if (m - 1 <= n_max) out[static_cast<std::size_t>(m - 1)] = jcur;
        if ((m - 1) >= 2 && (m - 1) % 2 == 0) norm += 2.0 * jcur;
        if (std::abs(jcur) > 1e280) {
            jcur *= 1e-280;
            jnext *= 1e-280;
            norm *= 1e-280;
            for (auto& v : out) v *= 1e-280;
        }
    }
    norm += jcur; // jcur now holds J_0
    for (auto& v : out) v /= norm;
    return out;
}

// Hankel asymptotic expansion, truncated at the smallest term; the optimal
// truncation error is far below 1e-14 for x >= 20.
inline void bessel_j01_hankel(double x, double& j0, double& j1) {
    const double inv8x = 1.0 / (8.0 * x);
    for (int nu = 0; nu <= 1; ++nu) {
        const double mu = 4.0 * nu * nu;
        double p = 1.0, q = 0.0;
        double term = 1.0;
        double smallest = 1.0;
        for (int k = 1; k < 40; ++k) {
            const double odd = 2.0 * k - 1.0;
            term *= (mu - odd * odd) * inv8x / k;
            if (std::abs(term) >= smallest) break;
            smallest = std::abs(term);
            const int phase = k % 4; // cycle: +Q, -P, -Q, +P
            if (phase == 1)
                q += term;
            else if (phase == 2)
                p -= term;
            else if (phase == 3)
                q -= term;
            else
                p += term;
        }
        const double chi = x - (0.5 * nu + 0.25) * 3.14159265358979323846;
        const double value = std::sqrt(2.0 / (3.14159265358979323846 * x)) *
                             (p * std::cos(chi) - q * std::sin(chi));
        if (nu == 0)
            j0 = value;
        else
            j1 = value;
    }
}

inline void bessel_j01_large(double x, double& j0, double& j1) {
    if (x >= 20.0) {
        bessel_j01_hankel(x, j0, j1);
        return;
    }
    const std::vector<double> seq = bessel_j_sequence(x, 1);
    j0 = seq[0];
    j1 = seq[1];
}

} // namespace detail

/// Bessel function of the first kind, order zero.
inline double bessel_j0(double x) {
    detail::require_finite(x, "bessel_j0");
    const double ax = std::abs(x);
    if (ax <= 12.0) return detail::bessel_j0_series(ax);
    double j0 = 0.0, j1 = 0.0;
    detail::bessel_j01_large(ax, j0, j1);
    return j0;
}

/// Bessel function of the first kind, order one. Odd in x.
inline double bessel_j1(double x) {
    detail::require_finite(x, "bessel_j1");
    const double ax = std::abs(x);
    double v = 0.0;
    if (ax <= 12.0) {
        v = detail::bessel_j1_series(ax);
    } else {
        double j0 = 0.0;
        detail::bessel_j01_large(ax, j0, v);
    }
    return x < 0.0 ? -v : v;
}

/// Derivative of J1, via J1'(x) = J0(x) - J1(x)/x, with the series limit 1/2 at x = 0.
inline double bessel_j1_prime(double x) {
    detail::require_finite(x, "bessel_j1_prime");
    if (x == 0.0) return 0.5;
    return bessel_j0(x) - bessel_j1(x) / x;
}

enum class BesselZeroKind { ZerosOfJ1, ZerosOfJ1Prime };

inline const char* to_string(BesselZeroKind k) {
    return k == BesselZeroKind::ZerosOfJ1 ? "j1" : "j1_prime";
}

/// Ordered positive zeros of J1 or of J1', with the worst residual observed
/// when evaluating the target function at the stored zeros.
struct BesselZeroTable {
    BesselZeroKind kind = BesselZeroKind::ZerosOfJ1;
    std::vector<double> zeros;
    double achieved_tolerance = 0.0;
};

/// Locate the first `count` positive zeros by scanning for sign changes in
/// steps of pi/4 and bisecting each bracket down to machine width.
inline BesselZeroTable find_bessel_zeros(BesselZeroKind kind, int count, double tol = 1e-12) {
    if (count < 1) throw config_error("find_bessel_zeros: count must be >= 1");
    if (!(tol > 0.0)) throw config_error("find_bessel_zeros: tol must be > 0");
    const auto target = [kind](double x) {
        return kind == BesselZeroKind::ZerosOfJ1 ? bessel_j1(x) : bessel_j1_prime(x);
    };

    BesselZeroTable table;
    table.kind = kind;
    table.zeros.reserve(static_cast<std::size_t>(count));

    const double step = 0.25 * 3.14159265358979323846;
    const double scan_limit = (count + 2) * 3.14159265358979323846 + 4.0;
    double a = 0.25;
    double fa = target(a);
    while (static_cast<int>(table.zeros.size()) < count) {
        double b = a + step;
        if (b > scan_limit)
            throw numerical_error("find_bessel_zeros: failed to bracket a zero within the scan bound");
        double fb = target(b);
        if ((fa < 0.0) != (fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double fm = target(mid);
                if ((flo < 0.0) != (fm < 0.0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double z = 0.5 * (lo + hi);
            table.zeros.push_back(z);
            table.achieved_tolerance = std::max(table.achieved_tolerance, std::abs(target(z)));
        }
        a = b;
        fa = fb;
    }
    if (table.achieved_tolerance > tol)
        throw numerical_error("find_bessel_zeros: residual above requested tolerance",
                              table.zeros.back(), table.achieved_tolerance);
    return table;
}

/// Tolerances and subdivision budget for adaptive quadrature.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2'000'000;

    void validate() const {
        if (!(abs_tol > 0.0)) throw config_error("QuadratureSpec: abs_tol must be > 0");
        if (!(rel_tol > 0.0)) throw config_error("QuadratureSpec: rel_tol must be > 0");
        if (max_subdivisions < 1) throw config_error("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

namespace detail {

template <class F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth, int& budget) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth > 0 && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= 52 || budget <= 0) {
        throw numerical_error("integrate: tolerance not met within the subdivision budget",
                              left + right, std::abs(delta) / 15.0);
    }
    budget -= 1;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, budget) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, budget);
}

} // namespace detail

/// Adaptive composite Simpson integration of f over [a,b].
///
/// `max_panel` bounds the width of the initial panels before any adaptive
/// refinement; pass pi/k for integrands oscillating like J0(k t) so that no
/// panel spans more than one half-period.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {},
                 double max_panel = std::numeric_limits<double>::infinity()) {
    spec.validate();
    if (!(a < b)) throw config_error("integrate: requires a < b");
    if (!(max_panel > 0.0)) throw config_error("integrate: max_panel must be > 0");

    const int n_panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
    const double h = (b - a) / n_panels;

    // Coarse pass to give the relative tolerance something to bite on.
    double coarse = 0.0;
    std::vector<double> fl(static_cast<std::size_t>(n_panels) + 1);
    std::vector<double> fm(static_cast<std::size_t>(n_panels));
    for (int i = 0; i <= n_panels; ++i) {
        const double x = a + h * i;
        fl[static_cast<std::size_t>(i)] = f(x);
        if (!std::isfinite(fl[static_cast<std::size_t>(i)]))
            throw config_error("integrate: integrand is not finite on [a,b]");
    }
    std::vector<double> whole(static_cast<std::size_t>(n_panels));
    for (int i = 0; i < n_panels; ++i) {
        const double x0 = a + h * i;
        fm[static_cast<std::size_t>(i)] = f(x0 + 0.5 * h);
        whole[static_cast<std::size_t>(i)] =
            h / 6.0 *
            (fl[static_cast<std::size_t>(i)] + 4.0 * fm[static_cast<std::size_t>(i)] + fl[static_cast<std::size_t>(i) + 1]);
        coarse += whole[static_cast<std::size_t>(i)];
    }

    const double tol_total = std::max(spec.abs_tol, spec.rel_tol * std::abs(coarse));
    int budget = spec.max_subdivisions;
    double result = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        const double x0 = a + h * i;
        const double x1 = x0 + h;
        result += detail::adaptive_simpson(f, x0, x1, fl[static_cast<std::size_t>(i)],
                                           fm[static_cast<std::size_t>(i)], fl[static_cast<std::size_t>(i) + 1],
                                           whole[static_cast<std::size_t>(i)], tol_total / n_panels, 0, budget);
    }
    return result;
}

/// Radial expansion coefficient phi(k) = 2 * integral_0^1 J0(k t) t^(beta+1) dt.
inline double phi_coefficient(double k, double beta, const QuadratureSpec& spec = {}) {
    if (!(k > 0.0)) throw config_error("phi_coefficient: k must be > 0");
    if (beta < 0.0) throw config_error("phi_coefficient: beta must be >= 0");
    const double pi = 3.14159265358979323846;
    const auto integrand = [k, beta](double t) { return bessel_j0(k * t) * std::pow(t, beta + 1.0); };
    return 2.0 * integrate(integrand, 0.0, 1.0, spec, pi / k);
}

/// Gaussian tail function Q(z) = P(Z > z) for a standard normal Z.
inline double gaussian_q(double z) {
    detail::require_finite(z, "gaussian_q");
    return 0.5 * std::erfc(z * 0.70710678118654752440);
}

/// Standard normal density.
inline double gaussian_pdf(double z) {
    return 0.39894228040143267794 * std::exp(-0.5 * z * z);
}

/// Standard normal CDF.
inline double gaussian_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

/// Inverse of gaussian_q on (0,1): returns z with Q(z) = p.
inline double gaussian_q_inv(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw config_error("gaussian_q_inv: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    const bool flip = p > 0.5; // work on the upper tail, z >= 0
    const double pp = flip ? 1.0 - p : p;

    // Rational initial guess (Abramowitz-Stegun 26.2.22), then Newton on Q.
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
    for (int it = 0; it < 6; ++it) {
        const double err = gaussian_q(z) - pp;
        const double dz = err / gaussian_pdf(z);
        z += dz;
        if (std::abs(dz) < 1e-13 * (1.0 + std::abs(z))) break;
    }
    return flip ? -z : z;
}

/// Kolmogorov-Smirnov distance and asymptotic p-value.
struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

namespace detail {

inline double kolmogorov_tail(double lambda) {
    if (lambda < 0.1) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace detail

/// Basic sample statistics (unbiased variance).
struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t n = 0;
};

inline SampleStats sample_stats(std::span<const double> samples) {
    if (samples.size() < 2) throw config_error("sample_stats: need at least 2 samples");
    double mean = 0.0;
    for (double v : samples) {
        if (!std::isfinite(v)) throw config_error("sample_stats: non-finite sample");
        mean += v;
    }
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return {mean, ss / static_cast<double>(samples.size() - 1), samples.size()};
}

/// Kolmogorov-Smirnov test of the standardized samples against N(0,1).
/// Samples are centered and scaled by their own mean and standard deviation.
inline KsResult ks_normality(std::span<const double> samples) {
    if (samples.size() < 8) throw config_error("ks_normality: need at least 8 samples");
    const SampleStats st = sample_stats(samples);
    if (!(st.variance > 0.0)) throw config_error("ks_normality: degenerate sample set (zero variance)");
    const double sd = std::sqrt(st.variance);

    std::vector<double> z(samples.begin(), samples.end());
    for (auto& v : z) v = (v - st.mean) / sd;
    std::sort(z.begin(), z.end());

    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = gaussian_cdf(z[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - cdf);
        d = std::max(d, cdf - static_cast<double>(i) / n);
    }
    const double sqrt_n = std::sqrt(n);
    const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    return {d, detail::kolmogorov_tail(lambda)};
}

} // namespace zfe
