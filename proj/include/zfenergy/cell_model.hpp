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
// Circular-cell geometry, the distance-based channel gain, the reflecting
// random walk used as the mobility model, and the diffusion propagator on
// the disk with a zero-flux (Neumann) boundary.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "zfenergy/errors.hpp"
#include "zfenergy/rng.hpp"
#include "zfenergy/special_math.hpp"

namespace zfe {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

/// Circular cell of radius R with gain cutoff r0 and path-loss exponent beta.
struct CellGeometry {
    double radius = 1.0;       // R
    double cutoff = 0.1;       // r0
    double pathloss_exp = 4.0; // beta

    void validate() const {
        if (!(radius > 0.0)) throw config_error("CellGeometry: R must be > 0");
        if (!(cutoff >= 0.0)) throw config_error("CellGeometry: r0 must be >= 0");
        if (!(radius > cutoff)) throw config_error("CellGeometry: requires R > r0");
        if (!(pathloss_exp > 2.0)) throw config_error("CellGeometry: requires beta > 2");
    }
};

/// Step length and step time of the random walk; the diffusion constant of
/// the continuum limit is D = ell^2 / (4 xi).
struct MobilityParams {
    double step_length = 0.05; // ell
    double step_time = 0.0025; // xi

    double diffusion() const { return step_length * step_length / (4.0 * step_time); }

    void validate() const {
        if (!(step_length > 0.0)) throw config_error("MobilityParams: ell must be > 0");
        if (!(step_time > 0.0)) throw config_error("MobilityParams: xi must be > 0");
    }
};

/// Time-indexed positions of one user under the reflecting random walk.
struct Trajectory {
    int ue_id = 0;
    std::vector<double> times;
    std::vector<Point2> positions;
};

/// Distance-based channel gain 1 / (||x||^beta + r0^beta).
inline double path_gain(Point2 position, const CellGeometry& geom) {
    geom.validate();
    const double r = position.norm();
    if (r > geom.radius * (1.0 + 1e-12)) throw config_error("path_gain: position outside the cell");
    return 1.0 / (std::pow(r, geom.pathloss_exp) + std::pow(geom.cutoff, geom.pathloss_exp));
}

/// Uniform point on the disk of radius R: radius R*sqrt(u), uniform angle.
inline Point2 sample_uniform_disk(PhiloxStream& rng, double R) {
    if (!(R > 0.0)) throw config_error("sample_uniform_disk: R must be > 0");
    const double r = R * std::sqrt(rng.uniform01());
    const double a = 2.0 * kPi * rng.uniform01();
    return {r * std::cos(a), r * std::sin(a)};
}

/// One step of length ell in a uniformly random direction; a step that would
/// leave the disk is specularly reflected at the rim (repeatedly if needed),
/// preserving the traveled path length.
inline Point2 step_random_walk(Point2 pos, PhiloxStream& rng, const MobilityParams& mob, double R) {
    mob.validate();
    if (!(R > 0.0)) throw config_error("step_random_walk: R must be > 0");
    if (pos.norm2() > R * R * (1.0 + 1e-12)) throw config_error("step_random_walk: position outside the cell");

    double ux, uy, s2;
    do {
        ux = 2.0 * rng.uniform01() - 1.0;
        uy = 2.0 * rng.uniform01() - 1.0;
        s2 = ux * ux + uy * uy;
    } while (s2 > 1.0 || s2 < 1e-12);
    const double inv = 1.0 / std::sqrt(s2);

    double px = pos.x, py = pos.y;
    double dx = mob.step_length * ux * inv, dy = mob.step_length * uy * inv;
    for (int guard = 0; guard < 64; ++guard) {
        const double cx = px + dx, cy = py + dy;
        if (cx * cx + cy * cy <= R * R) return {cx, cy};

        // Entry point on the rim: |p + s d| = R with s in (0,1].
        const double a = dx * dx + dy * dy;
        const double b = px * dx + py * dy;
        const double c = px * px + py * py - R * R;
        const double disc = std::sqrt(std::max(b * b - a * c, 0.0));
        double s = (b <= 0.0) ? (disc - b) / a : -c / (b + disc);
        s = std::min(std::max(s, 0.0), 1.0);

        double hx = px + s * dx, hy = py + s * dy;
        const double hn = std::sqrt(hx * hx + hy * hy);
        hx *= R / hn;
        hy *= R / hn;

        // Reflect the remaining displacement about the tangent at the rim.
        const double rx = (1.0 - s) * dx, ry = (1.0 - s) * dy;
        const double nx = hx / R, ny = hy / R;
        const double dot = rx * nx + ry * ny;
        px = hx;
        py = hy;
        dx = rx - 2.0 * dot * nx;
        dy = ry - 2.0 * dot * ny;
    }
    // Pathological rounding corner: settle just inside the rim.
    const double pn = std::sqrt(px * px + py * py);
    const double scale = R * (1.0 - 1e-12) / pn;
    return {px * scale, py * scale};
}

/// Chain n_steps reflected steps starting from `start`; times are j * xi.
inline Trajectory make_trajectory(Point2 start, int n_steps, const MobilityParams& mob, double R,
                                  PhiloxStream& rng, int ue_id = 0) {
    if (n_steps < 0) throw config_error("make_trajectory: n_steps must be >= 0");
    Trajectory traj;
    traj.ue_id = ue_id;
    traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.positions.reserve(static_cast<std::size_t>(n_steps) + 1);
    Point2 pos = start;
    traj.times.push_back(0.0);
    traj.positions.push_back(pos);
    for (int j = 1; j <= n_steps; ++j) {
        pos = step_random_walk(pos, rng, mob, R);
        traj.times.push_back(j * mob.step_time);
        traj.positions.push_back(pos);
    }
    return traj;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "# zfenergy-csv-v1 trajectory\n";
    os << "ue_id,t,x,y\n";
    char line[128];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", traj.ue_id, traj.times[i],
                      traj.positions[i].x, traj.positions[i].y);
        os << line;
    }
}

/// Truncation controls for the eigenmode expansion of the disk propagator.
struct PropagatorParams {
    int mode_count = 64; // radial modes per angular order
    BesselZeroKind zero_kind = BesselZeroKind::ZerosOfJ1;

    void validate() const {
        if (mode_count < 1) throw config_error("PropagatorParams: mode_count must be >= 1");
    }
};

namespace detail {

inline double bessel_jm(double x, int m) {
    if (m == 0) return bessel_j0(x);
    if (m == 1) return bessel_j1(x);
    return bessel_j_sequence(x, m)[static_cast<std::size_t>(m)];
}

// J_m'(x) = J_{m-1}(x) - (m/x) J_m(x)
inline double bessel_jm_prime(double x, int m) {
    if (m == 0) return -bessel_j1(x);
    const std::vector<double> seq = bessel_j_sequence(x, m);
    return seq[static_cast<std::size_t>(m - 1)] - (m / x) * seq[static_cast<std::size_t>(m)];
}

// First `count` positive zeros of J_m' for m >= 1 (the Neumann radial
// wavenumbers of angular order m). Scan + bisection, like find_bessel_zeros.
inline std::vector<double> neumann_zeros(int m, int count) {
    std::vector<double> zeros;
    zeros.reserve(static_cast<std::size_t>(count));
    const double step = 0.25 * kPi;
    double a = std::max(0.5, 0.8 * m);
    double fa = bessel_jm_prime(a, m);
    while (static_cast<int>(zeros.size()) < count) {
        const double b = a + step;
        const double fb = bessel_jm_prime(b, m);
        if ((fa < 0.0) != (fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double fm = bessel_jm_prime(mid, m);
                if ((flo < 0.0) != (fm < 0.0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return zeros;
}

} // namespace detail

/// Heat kernel F(x, x0; t) of diffusion on the disk with a reflecting rim,
/// expanded over Neumann eigenmodes and truncated at `mode_count` radial
/// modes per angular order. Angular orders are retained until the slowest
/// mode of the next order is negligible at the smallest time of interest.
class DiskPropagator {
  public:
    DiskPropagator(const CellGeometry& geom, const MobilityParams& mob, const PropagatorParams& pp,
                   double t_min)
        : radius_(geom.radius), diffusion_(mob.diffusion()) {
        geom.validate();
        mob.validate();
        pp.validate();
        if (!(t_min > 0.0)) throw config_error("DiskPropagator: t_min must be > 0");

        const double tau_min = diffusion_ * t_min / (radius_ * radius_);
        const double area = kPi * radius_ * radius_;

        // m = 0 radial family. The reflecting boundary requires J0'(k) = 0,
        // i.e. k at the zeros of J1; the alternative table is kept selectable
        // so the two conventions can be compared experimentally.
        {
            const BesselZeroTable table = find_bessel_zeros(pp.zero_kind, pp.mode_count, 1e-9);
            Order order;
            order.m = 0;
            for (double k : table.zeros) {
                const double j0k = bessel_j0(k);
                const double j1k = bessel_j1(k);
                const double nk = 0.5 * (j1k * j1k + j0k * j0k); // int_0^1 J0(k u)^2 u du
                order.modes.push_back({k, 1.0 / (2.0 * area * nk)});
            }
            orders_.push_back(std::move(order));
        }

        for (int m = 1; m <= 160; ++m) {
            const std::vector<double> zeros = detail::neumann_zeros(m, pp.mode_count);
            const double slowest = zeros.front();
            if (std::exp(-slowest * slowest * tau_min) < 1e-14 && m > 1) break;
            Order order;
            order.m = m;
            for (double k : zeros) {
                const double jm = detail::bessel_jm(k, m);
                const double nk = 0.5 * (1.0 - static_cast<double>(m) * m / (k * k)) * jm * jm;
                order.modes.push_back({k, 1.0 / (area * nk)});
            }
            orders_.push_back(std::move(order));
            if (std::exp(-slowest * slowest * tau_min) < 1e-14) break;
        }
    }

    double operator()(Point2 x, Point2 x0, double t) const {
        if (!(t > 0.0)) throw config_error("DiskPropagator: t must be > 0");
        const double r = x.norm();
        const double r0 = x0.norm();
        if (r > radius_ * (1.0 + 1e-12) || r0 > radius_ * (1.0 + 1e-12))
            throw config_error("DiskPropagator: position outside the cell");

        const double dtheta = std::atan2(x.y, x.x) - std::atan2(x0.y, x0.x);

        const std::vector<double>* jx = radial_table(r);
        const std::vector<double>* jx0 = radial_table(r0);
        const std::vector<double>* decay = decay_table(t);

        double value = 1.0 / (kPi * radius_ * radius_);
        std::size_t idx = 0;
        for (const Order& order : orders_) {
            const double ca = std::cos(order.m * dtheta);
            for (const Mode& mode : order.modes) {
                const double pair = (*jx)[idx] * (*jx0)[idx]; // commutes, keeps F symmetric
                value += (*decay)[idx] * mode.coef * pair * ca;
                ++idx;
            }
        }
        return value;
    }

    int angular_orders() const { return static_cast<int>(orders_.size()); }

  private:
    struct Mode {
        double k;
        double coef; // eigenmode pair normalization, 1/(area * n_k) style
    };
    struct Order {
        int m;
        std::vector<Mode> modes;
    };

    const std::vector<double>* radial_table(double r) const {
        const std::uint64_t key = std::bit_cast<std::uint64_t>(r);
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return &it->second;
        std::vector<double> vals;
        for (const Order& order : orders_)
            for (const Mode& mode : order.modes)
                vals.push_back(detail::bessel_jm(mode.k * r / radius_, order.m));
        return &cache_.emplace(key, std::move(vals)).first->second;
    }

    const std::vector<double>* decay_table(double t) const {
        const std::uint64_t key = std::bit_cast<std::uint64_t>(t);
        const double tau = diffusion_ * t / (radius_ * radius_);
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = decay_cache_.find(key);
        if (it != decay_cache_.end()) return &it->second;
        std::vector<double> vals;
        for (const Order& order : orders_)
            for (const Mode& mode : order.modes) vals.push_back(std::exp(-mode.k * mode.k * tau));
        return &decay_cache_.emplace(key, std::move(vals)).first->second;
    }

    double radius_;
    double diffusion_;
    std::vector<Order> orders_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::uint64_t, std::vector<double>> cache_;
    mutable std::unordered_map<std::uint64_t, std::vector<double>> decay_cache_;
};

/// Propagator value with a process-wide cache of expansions keyed on the
/// geometry, diffusion constant, truncation, and requested time.
inline double propagator(Point2 x, Point2 x0, double t, const CellGeometry& geom,
                         const MobilityParams& mob, const PropagatorParams& pp) {
    if (!(t > 0.0)) throw config_error("propagator: t must be > 0");
    using Key = std::tuple<std::uint64_t, std::uint64_t, int, int, std::uint64_t>;
    static std::map<Key, std::shared_ptr<const DiskPropagator>> cache;
    static std::mutex mutex;

    const Key key{std::bit_cast<std::uint64_t>(geom.radius), std::bit_cast<std::uint64_t>(mob.diffusion()),
                  pp.mode_count, static_cast<int>(pp.zero_kind), std::bit_cast<std::uint64_t>(t)};
    std::shared_ptr<const DiskPropagator> prop;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, std::make_shared<const DiskPropagator>(geom, mob, pp, t)).first;
        prop = it->second;
    }
    return (*prop)(x, x0, t);
}

namespace detail {

struct RadialCovarianceMode {
    double lambda; // decay rate k^2 D / R^2
    double weight; // R^(2 beta) phi^2 / (J0^2 + J1^2)
};

inline const std::vector<RadialCovarianceMode>& radial_covariance_modes(const CellGeometry& geom,
                                                                        const MobilityParams& mob,
                                                                        const PropagatorParams& pp) {
    using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, int, int>;
    static std::map<Key, std::vector<RadialCovarianceMode>> cache;
    static std::mutex mutex;

    const Key key{std::bit_cast<std::uint64_t>(geom.radius), std::bit_cast<std::uint64_t>(geom.pathloss_exp),
                  std::bit_cast<std::uint64_t>(mob.diffusion()), pp.mode_count, static_cast<int>(pp.zero_kind)};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const double R = geom.radius;
    const double beta = geom.pathloss_exp;
    const double D = mob.diffusion();
    const double r2b = std::pow(R, 2.0 * beta);
    const BesselZeroTable table = find_bessel_zeros(pp.zero_kind, pp.mode_count, 1e-9);

    std::vector<RadialCovarianceMode> modes;
    modes.reserve(table.zeros.size());
    QuadratureSpec spec;
    spec.abs_tol = 1e-13;
    spec.rel_tol = 1e-12;
    for (double k : table.zeros) {
        const double phi = phi_coefficient(k, beta, spec);
        const double j0k = bessel_j0(k);
        const double j1k = bessel_j1(k);
        modes.push_back({k * k * D / (R * R), r2b * phi * phi / (j0k * j0k + j1k * j1k)});
    }
    return cache.emplace(key, std::move(modes)).first->second;
}

} // namespace detail

/// Covariance of ||x(t)||^beta and ||x(t')||^beta for a walker started from
/// the uniform distribution, averaged over the start: the radial (m = 0)
/// eigenmode series with the F(t-t') - F(t+t') difference structure. Vanishes
/// at t = t' = 0 and saturates to the uniform-disk variance of r^beta.
inline double radial_moment_covariance(double t, double t_prime, const CellGeometry& geom,
                                       const MobilityParams& mob, const PropagatorParams& pp) {
    geom.validate();
    mob.validate();
    pp.validate();
    if (t < 0.0 || t_prime < 0.0) throw config_error("radial_moment_covariance: times must be >= 0");

    const auto& modes = detail::radial_covariance_modes(geom, mob, pp);
    const double gap = std::abs(t - t_prime);
    const double tmin = std::min(t, t_prime);
    double sum = 0.0;
    for (const auto& mode : modes) {
        const double transient = -std::expm1(-2.0 * mode.lambda * tmin); // 1 - e^(-2 lambda min)
        sum += mode.weight * std::exp(-mode.lambda * gap) * transient;
    }
    return sum;
}

} // namespace zfe
