// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_RNG_HPP
#define QSPECKLE_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>

namespace qspeckle {

// Counter-based random streams (Philox 4x32-10).  Every Monte Carlo trial
// owns an independent stream addressed by (seed, trial_id), so the draw
// sequence of a trial never depends on scheduling, worker count, or on how
// many values other trials consumed.
class TrialStream {
  public:
    TrialStream(std::uint64_t seed, std::uint64_t trial_id)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          trial_lo_(static_cast<std::uint32_t>(trial_id)),
          trial_hi_(static_cast<std::uint32_t>(trial_id >> 32))
    {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Pair of independent standard normals (Box-Muller; fully defined in
    // terms of the uniform stream, no library-specific distribution state).
    std::pair<double, double> normal_pair()
    {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1 always
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    // Circularly symmetric complex normal with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance)
    {
        const auto [x, y] = normal_pair();
        const double s = std::sqrt(0.5 * variance);
        return {s * x, s * y};
    }

    std::uint64_t next_u64()
    {
        if (have_ == 0) refill();
        const std::uint32_t lo = buf_[4 - have_];
        const std::uint32_t hi = buf_[5 - have_];
        have_ -= 2;
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

  private:
    void refill()
    {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = trial_lo_;
        std::uint32_t c3 = trial_hi_;
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ull * c0;
            const std::uint64_t p1 = 0xCD9E8D57ull * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = {c0, c1, c2, c3};
        have_ = 4;
        ++block_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t trial_lo_;
    std::uint32_t trial_hi_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
};

}  // namespace qspeckle

#endif  // QSPECKLE_RNG_HPP
