#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rtxd {

/// Deterministic random stream. All variates are derived from raw 64-bit
/// words through fixed arithmetic (no std::*_distribution), so a given
/// seed yields the same sequence on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(mix(mix(seed))) {}

    /// Stream for one unit of work (trial, estimator run, ...). Streams
    /// for distinct indices are independent regardless of creation order.
    static RngStream child(std::uint64_t master_seed, std::uint64_t index) {
        return RngStream(mix(master_seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Inverse-CDF exponential with the given mean.
    double exponential(double mean) {
        return -mean * std::log1p(-uniform01());
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t pick(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

} // namespace rtxd
