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

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "zfenergy/errors.hpp"

namespace zfe {

/// Counter-based pseudo-random stream (Philox 4x32-10).
///
/// Each stream is identified by a 64-bit seed (the cipher key) plus two
/// 32-bit substream selectors kept in the upper counter words. Every
/// (seed, selector) pair owns a disjoint 2^64-block counter range, so
/// substreams never overlap and can be consumed from different threads
/// without coordination. Output is a pure function of (key, counter):
/// the same stream always produces the same values on every platform.
class PhiloxStream {
  public:
    explicit PhiloxStream(std::uint64_t seed)
        : key0_(static_cast<std::uint32_t>(seed)), key1_(static_cast<std::uint32_t>(seed >> 32)) {}

    /// Derive an independent child stream. At most two levels of derivation
    /// are supported (e.g. trial index, then per-walker index within a trial).
    PhiloxStream substream(std::uint32_t id) const {
        PhiloxStream child(*this);
        child.block_ = 0;
        child.avail_ = 0;
        child.have_cached_normal_ = false;
        if (depth_ == 0) {
            child.sel_hi_ = id + 1u; // selector 0 is the root's own space
        } else if (depth_ == 1) {
            child.sel_lo_ = id + 1u;
        } else {
            throw config_error("PhiloxStream: substream nesting deeper than two levels");
        }
        child.depth_ = depth_ + 1;
        return child;
    }

    std::uint32_t next_u32() {
        if (avail_ == 0) refill();
        return buf_[--avail_];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in the open interval (0,1); never returns 0 or 1.
    double uniform01() {
        const std::uint64_t mant = next_u64() >> 11; // 53 bits
        return (static_cast<double>(mant) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; generates pairs, caches the second.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        cached_normal_ = r * std::sin(a);
        have_cached_normal_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with unit variance
    /// (real and imaginary parts each of variance 1/2).
    std::complex<double> complex_normal() {
        const double u = uniform01();
        const double v = uniform01();
        const double r = std::sqrt(-std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        return {r * std::cos(a), r * std::sin(a)};
    }

  private:
    void refill() {
        // Philox 4x32-10 block function.
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = sel_lo_;
        std::uint32_t c3 = sel_hi_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = {c0, c1, c2, c3};
        avail_ = 4;
        ++block_;
    }

    std::uint32_t key0_ = 0;
    std::uint32_t key1_ = 0;
    std::uint32_t sel_lo_ = 0;
    std::uint32_t sel_hi_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0;
    int depth_ = 0;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

} // namespace zfe
